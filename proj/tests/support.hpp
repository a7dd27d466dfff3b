#pragma once

// Shared helpers for the unit and acceptance suites: deterministic random
// system generators and independent oracles the library results are checked
// against. Everything here is intentionally simple and self-contained so that
// a test failure always implicates the library, not the harness.

#include "thermoformal/cylinder.hpp"
#include "thermoformal/kms.hpp"
#include "thermoformal/recode.hpp"
#include "thermoformal/rng.hpp"
#include "thermoformal/spectral.hpp"
#include "thermoformal/subshift.hpp"
#include "thermoformal/thermo.hpp"
#include "thermoformal/transfer.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <array>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <sys/wait.h>
#include <vector>

namespace testsupport {

using namespace thermoformal;

// Rejection-samples a primitive transition matrix with no dead rows/columns.
inline SubshiftSpec random_primitive_spec(SplitRng& rng, int dmin, int dmax) {
    for (int attempt = 0; attempt < 10000; ++attempt) {
        const int d = dmin + rng.uniform_int(dmax - dmin + 1);
        std::vector<std::vector<int>> t(static_cast<std::size_t>(d),
                                        std::vector<int>(static_cast<std::size_t>(d), 0));
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) t[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = rng.uniform() < 0.6 ? 1 : 0;
        bool ok = true;
        for (int i = 0; i < d && ok; ++i) {
            int r = 0, c = 0;
            for (int j = 0; j < d; ++j) {
                r += t[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
                c += t[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)];
            }
            ok = r > 0 && c > 0;
        }
        if (!ok) continue;
        SubshiftSpec spec(d, t);
        if (is_primitive(spec)) return spec;
    }
    throw std::runtime_error("random_primitive_spec: rejection sampling failed");
}

// Potential with log-weights uniform in [-2, 2] on the admissible words.
inline CylinderPotential random_potential(SplitRng& rng, const SubshiftSpec& spec, int depth) {
    WordTable table(spec, depth);
    std::vector<double> a(table.size());
    for (double& v : a) v = rng.uniform(-2.0, 2.0);
    return CylinderPotential::from_log_weights(CylinderFunction(spec, depth, std::move(a)));
}

// Cylinder function with values uniform in [lo, hi].
inline CylinderFunction random_function(SplitRng& rng, const SubshiftSpec& spec, int depth,
                                        double lo, double hi) {
    WordTable table(spec, depth);
    std::vector<double> v(table.size());
    for (double& x : v) x = rng.uniform(lo, hi);
    return CylinderFunction(spec, depth, std::move(v));
}

// Random stationary Markov measure supported on the transition graph.
inline MarkovMeasure random_markov(SplitRng& rng, const SubshiftSpec& spec) {
    const int d = spec.alphabet_size();
    std::vector<double> P(static_cast<std::size_t>(d) * d, 0.0);
    for (int i = 0; i < d; ++i) {
        double s = 0.0;
        for (int j : spec.successors(i)) {
            double w = rng.uniform(0.2, 1.0);
            P[static_cast<std::size_t>(i) * d + j] = w;
            s += w;
        }
        for (int j : spec.successors(i)) P[static_cast<std::size_t>(i) * d + j] /= s;
    }
    return MarkovMeasure::from_transition(spec, std::move(P));
}

// Perron data of a positive-off-diagonal 2x2 matrix from the characteristic
// polynomial (an oracle independent of the iterative solver).
struct Perron2 {
    double lambda;
    std::array<double, 2> u; // right eigenvector
    std::array<double, 2> v; // left eigenvector
};

inline Perron2 perron2(double a, double b, double c, double e) {
    const double disc = std::sqrt((a - e) * (a - e) + 4.0 * b * c);
    const double lambda = 0.5 * ((a + e) + disc);
    return Perron2{lambda, {b, lambda - a}, {c, lambda - a}};
}

// Perron eigendata of a general nonnegative matrix via a dense eigensolve.
struct PerronDense {
    double lambda;
    std::vector<double> right;
    std::vector<double> left;
};

inline std::vector<double> perron_vector(const Eigen::MatrixXd& M) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(M);
    int best = 0;
    for (int i = 1; i < M.rows(); ++i)
        if (std::abs(es.eigenvalues()[i]) > std::abs(es.eigenvalues()[best])) best = i;
    Eigen::VectorXcd vec = es.eigenvectors().col(best);
    int pivot = 0;
    for (int i = 1; i < vec.size(); ++i)
        if (std::abs(vec[i]) > std::abs(vec[pivot])) pivot = i;
    vec /= vec[pivot];
    std::vector<double> out(static_cast<std::size_t>(vec.size()));
    for (int i = 0; i < vec.size(); ++i) out[static_cast<std::size_t>(i)] = vec[i].real();
    return out;
}

inline PerronDense perron_dense(const Eigen::MatrixXd& M) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(M, false);
    double lambda = 0.0;
    for (int i = 0; i < M.rows(); ++i) lambda = std::max(lambda, std::abs(es.eigenvalues()[i]));
    return PerronDense{lambda, perron_vector(M), perron_vector(M.transpose())};
}

// Brute-force thermodynamic data for a depth-3 potential on a small alphabet,
// computed on the 2-block chain without going through the recoding module: the
// states are the admissible 2-words of the ORIGINAL subshift, the transition
// weight from (x0 x1) to (x1 x2) is rho(x0 x1 x2), and the Gibbs chain comes
// from the dense Perron eigenvectors.
struct Depth3Oracle {
    double pressure;
    WordTable words3;                  // admissible 3-words of the original spec
    std::vector<double> gibbs_weights; // Gibbs weight of each 3-word, same order
};

inline Depth3Oracle depth3_oracle(const SubshiftSpec& spec, const CylinderFunction& rho3) {
    if (rho3.depth() != 3) throw std::invalid_argument("depth3_oracle expects a depth-3 weight");
    WordTable blocks(spec, 2);
    WordTable words3(spec, 3);
    const int m = static_cast<int>(blocks.size());
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
    for (std::size_t t = 0; t < words3.size(); ++t) {
        auto w = words3.word(t);
        Word s0{w[0], w[1]}, s1{w[1], w[2]};
        T(static_cast<int>(blocks.find(s0)), static_cast<int>(blocks.find(s1))) = rho3[t];
    }
    PerronDense pd = perron_dense(T);
    // Normalize the eigenvector signs to positive.
    for (double& x : pd.right) x = std::abs(x);
    for (double& x : pd.left) x = std::abs(x);

    double z = 0.0;
    for (int s = 0; s < m; ++s) z += pd.right[static_cast<std::size_t>(s)] * pd.left[static_cast<std::size_t>(s)];
    Depth3Oracle out{std::log(pd.lambda), std::move(words3), {}};
    out.gibbs_weights.resize(out.words3.size());
    for (std::size_t t = 0; t < out.words3.size(); ++t) {
        auto w = out.words3.word(t);
        Word s0{w[0], w[1]}, s1{w[1], w[2]};
        int i0 = static_cast<int>(blocks.find(s0));
        int i1 = static_cast<int>(blocks.find(s1));
        double p = pd.right[static_cast<std::size_t>(i0)] * pd.left[static_cast<std::size_t>(i0)] / z;
        double P = T(i0, i1) * pd.right[static_cast<std::size_t>(i1)] /
                   (pd.lambda * pd.right[static_cast<std::size_t>(i0)]);
        out.gibbs_weights[t] = p * P;
    }
    return out;
}

// Mean of the potential's log-weights under a Markov measure on the same spec.
inline double mean_log_weight(const MarkovMeasure& mu, const CylinderPotential& rho) {
    return mu.at_depth(std::max(2, rho.depth())).integrate(rho.log_weights());
}

#ifdef THERMOFORMAL_CLI_PATH
struct CliResult {
    int exit_code;
    std::string out;
};

// Runs the CLI binary with the given argument string, capturing stdout.
inline CliResult run_cli(const std::string& args) {
    const std::string cmd = std::string(THERMOFORMAL_CLI_PATH) + " " + args + " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) throw std::runtime_error("popen failed for: " + cmd);
    std::string out;
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof(buf), pipe)) > 0) out.append(buf, n);
    int status = pclose(pipe);
    int code = (status >= 0 && WIFEXITED(status)) ? WEXITSTATUS(status) : -1;
    return CliResult{code, std::move(out)};
}

// Drops the wall_time_ms line so reruns can be compared byte-for-byte.
inline std::string strip_wall_time(const std::string& text) {
    std::string out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string::npos) nl = text.size();
        std::string line = text.substr(pos, nl - pos);
        if (line.find("wall_time_ms") == std::string::npos) {
            out += line;
            out += '\n';
        }
        pos = nl + 1;
    }
    return out;
}
#endif

} // namespace testsupport
