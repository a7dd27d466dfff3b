#include "thermoformal/spectral.hpp"

#include "thermoformal/errors.hpp"
#include "thermoformal/log.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace thermoformal {

namespace {

double vec_sum(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
}

} // namespace

SpectralData rpf_solve(const TransferOperator& op, double tol, int max_iter) {
    if (tol <= 0.0) throw std::invalid_argument("tolerance must be positive");
    if (max_iter < 1) throw std::invalid_argument("max_iter must be at least 1");
    const SubshiftSpec& spec = op.spec();
    if (!is_primitive(spec))
        throw NonPrimitiveError("rpf_solve requires a primitive transition matrix");
    const int d = spec.alphabet_size();

    // Pre-scale by the largest weight (the e^{-max A} guard); lambda rescales out.
    double mx = 0.0;
    for (double v : op.matrix_data()) mx = std::max(mx, v);
    std::vector<double> B = op.matrix_data();
    for (double& v : B) v /= mx;

    auto mat_t = [&](const std::vector<double>& M, const std::vector<double>& x,
                     std::vector<double>& y) {
        for (int j = 0; j < d; ++j) {
            double s = 0.0;
            for (int i : spec.predecessors(j)) s += M[static_cast<std::size_t>(i) * d + j] * x[i];
            y[static_cast<std::size_t>(j)] = s;
        }
    };
    auto mat = [&](const std::vector<double>& M, const std::vector<double>& x,
                   std::vector<double>& y) {
        for (int i = 0; i < d; ++i) {
            double s = 0.0;
            for (int j : spec.successors(i)) s += M[static_cast<std::size_t>(i) * d + j] * x[j];
            y[static_cast<std::size_t>(i)] = s;
        }
    };
    // The boosted matrix is a high power of B and is dense-positive, so its
    // products must not be restricted to the one-step sparsity pattern.
    auto mat_t_dense = [&](const std::vector<double>& M, const std::vector<double>& x,
                           std::vector<double>& y) {
        for (int j = 0; j < d; ++j) {
            double s = 0.0;
            for (int i = 0; i < d; ++i) s += M[static_cast<std::size_t>(i) * d + j] * x[static_cast<std::size_t>(i)];
            y[static_cast<std::size_t>(j)] = s;
        }
    };
    auto mat_dense = [&](const std::vector<double>& M, const std::vector<double>& x,
                         std::vector<double>& y) {
        for (int i = 0; i < d; ++i) {
            double s = 0.0;
            for (int j = 0; j < d; ++j) s += M[static_cast<std::size_t>(i) * d + j] * x[static_cast<std::size_t>(j)];
            y[static_cast<std::size_t>(i)] = s;
        }
    };

    std::vector<double> phi(static_cast<std::size_t>(d), 1.0 / d);
    std::vector<double> nu(static_cast<std::size_t>(d), 1.0 / d);
    std::vector<double> y(static_cast<std::size_t>(d)), z(static_cast<std::size_t>(d));

    // For slowly mixing matrices, iterate with a normalized high power of B
    // (same eigenvectors); residuals are always measured against B itself.
    const int boost_after = 2000;
    std::vector<double> boosted;
    bool boosted_mode = false;

    double lphi = std::numeric_limits<double>::quiet_NaN();
    double lnu = std::numeric_limits<double>::quiet_NaN();
    double rphi = std::numeric_limits<double>::infinity();
    double rnu = std::numeric_limits<double>::infinity();
    bool converged = false;
    int it = 0;

    for (it = 1; it <= max_iter; ++it) {
        if (boosted_mode) {
            mat_t_dense(boosted, phi, y);
            double sy = vec_sum(y);
            for (int i = 0; i < d; ++i) phi[static_cast<std::size_t>(i)] = y[static_cast<std::size_t>(i)] / sy;
            mat_dense(boosted, nu, z);
            double sz = vec_sum(z);
            for (int i = 0; i < d; ++i) nu[static_cast<std::size_t>(i)] = z[static_cast<std::size_t>(i)] / sz;
        }

        mat_t(B, phi, y);
        mat(B, nu, z);
        const double sy = vec_sum(y);
        const double sz = vec_sum(z);
        rphi = 0.0;
        for (int i = 0; i < d; ++i)
            rphi = std::max(rphi, std::abs(y[static_cast<std::size_t>(i)] - sy * phi[static_cast<std::size_t>(i)]));
        rnu = 0.0;
        for (int i = 0; i < d; ++i)
            rnu += std::abs(z[static_cast<std::size_t>(i)] - sz * nu[static_cast<std::size_t>(i)]);
        const double dl = std::max(std::abs(sy - lphi), std::abs(sz - lnu));
        lphi = sy;
        lnu = sz;
        for (int i = 0; i < d; ++i) {
            phi[static_cast<std::size_t>(i)] = y[static_cast<std::size_t>(i)] / sy;
            nu[static_cast<std::size_t>(i)] = z[static_cast<std::size_t>(i)] / sz;
        }

        const double lam = 0.5 * (lphi + lnu);
        const double res_target = 1e-13 * lam;
        if (dl < tol * std::max(1.0, lam) && rphi <= res_target && rnu <= res_target) {
            converged = true;
            break;
        }
        if (it == boost_after && !boosted_mode) {
            boosted = B;
            for (int round = 0; round < 10; ++round) {
                std::vector<double> sq(static_cast<std::size_t>(d) * d, 0.0);
                for (int i = 0; i < d; ++i)
                    for (int kk = 0; kk < d; ++kk) {
                        double bik = boosted[static_cast<std::size_t>(i) * d + kk];
                        if (bik == 0.0) continue;
                        for (int j = 0; j < d; ++j)
                            sq[static_cast<std::size_t>(i) * d + j] +=
                                bik * boosted[static_cast<std::size_t>(kk) * d + j];
                    }
                double m2 = 0.0;
                for (double v : sq) m2 = std::max(m2, v);
                for (double& v : sq) v /= m2;
                boosted = std::move(sq);
            }
            boosted_mode = true;
            log_msg(LogLevel::debug, "rpf_solve: enabling squared-power boost after %d iterations", it);
        }
    }

    const double lambda = 0.5 * (lphi + lnu) * mx;
    if (!converged)
        throw NoConvergenceError("rpf_solve: power iteration did not converge within " +
                                     std::to_string(max_iter) + " iterations",
                                 std::max(rphi, rnu) * mx);

    // nu as a probability, then phi scaled so that nu(phi) = 1.
    double tot = vec_sum(nu);
    for (double& v : nu) v /= tot;
    double pairing = 0.0;
    for (int i = 0; i < d; ++i) pairing += nu[static_cast<std::size_t>(i)] * phi[static_cast<std::size_t>(i)];
    for (double& v : phi) v /= pairing;

    // Residuals of the returned data against the unscaled matrix.
    double rphi_f = 0.0, rnu_f = 0.0;
    for (int j = 0; j < d; ++j) {
        double s = 0.0;
        for (int i : spec.predecessors(j)) s += op.matrix(i, j) * phi[static_cast<std::size_t>(i)];
        rphi_f = std::max(rphi_f, std::abs(s - lambda * phi[static_cast<std::size_t>(j)]));
    }
    for (int i = 0; i < d; ++i) {
        double s = 0.0;
        for (int j : spec.successors(i)) s += op.matrix(i, j) * nu[static_cast<std::size_t>(j)];
        rnu_f += std::abs(s - lambda * nu[static_cast<std::size_t>(i)]);
    }
    if (rphi_f > 1e-10 * lambda || rnu_f > 1e-10 * lambda)
        throw NoConvergenceError("rpf_solve: residuals exceed the guaranteed bound",
                                 std::max(rphi_f, rnu_f));

    return SpectralData{lambda,
                        CylinderFunction(spec, 1, std::move(phi)),
                        CylinderMeasure(spec, 1, std::move(nu)),
                        it,
                        rphi_f,
                        rnu_f};
}

TransferOperator normalize(const TransferOperator& op, const SpectralData& sd) {
    const SubshiftSpec& spec = op.spec();
    if (sd.phi.spec() != spec)
        throw std::invalid_argument("spectral data does not match the operator");
    WordTable pairs(spec, 2);
    std::vector<double> vals(pairs.size());
    for (std::size_t t = 0; t < pairs.size(); ++t) {
        auto w = pairs.word(t);
        vals[t] = op.matrix(w[0], w[1]) * sd.phi[static_cast<std::size_t>(w[0])] /
                  (sd.lambda * sd.phi[static_cast<std::size_t>(w[1])]);
    }
    CylinderFunction rho_t(spec, 2, std::move(vals));
    return TransferOperator::build(CylinderPotential::from_weights(std::move(rho_t)));
}

std::vector<double> stationary_distribution(const SubshiftSpec& spec, const std::vector<double>& P) {
    const int d = spec.alphabet_size();
    if (P.size() != static_cast<std::size_t>(d) * d)
        throw std::invalid_argument("transition kernel has wrong dimensions");
    std::vector<double> q(static_cast<std::size_t>(d), 1.0 / d), next(static_cast<std::size_t>(d));
    for (int it = 0; it < 50000; ++it) {
        for (int j = 0; j < d; ++j) {
            double s = 0.0;
            for (int i : spec.predecessors(j)) s += q[static_cast<std::size_t>(i)] * P[static_cast<std::size_t>(i) * d + j];
            next[static_cast<std::size_t>(j)] = s;
        }
        double tot = vec_sum(next);
        double diff = 0.0;
        for (int j = 0; j < d; ++j) {
            next[static_cast<std::size_t>(j)] /= tot;
            diff = std::max(diff, std::abs(next[static_cast<std::size_t>(j)] - q[static_cast<std::size_t>(j)]));
        }
        q.swap(next);
        if (diff < 1e-15) break;
    }
    return q;
}

MarkovMeasure::MarkovMeasure(SubshiftSpec spec, std::vector<double> p, std::vector<double> P)
    : spec_(std::move(spec)), p_(std::move(p)), P_(std::move(P)) {
    const int d = spec_.alphabet_size();
    if (p_.size() != static_cast<std::size_t>(d) || P_.size() != static_cast<std::size_t>(d) * d)
        throw std::invalid_argument("Markov measure has wrong dimensions");
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            if (!spec_.allowed(i, j) && P_[static_cast<std::size_t>(i) * d + j] != 0.0)
                throw std::invalid_argument("transition kernel is supported outside the transition graph");
    for (int i = 0; i < d; ++i) {
        double row = 0.0;
        for (int j = 0; j < d; ++j) {
            double v = P_[static_cast<std::size_t>(i) * d + j];
            if (!(v >= 0.0) || !std::isfinite(v))
                throw std::invalid_argument("transition kernel entries must be nonnegative");
            row += v;
        }
        if (std::abs(row - 1.0) > 1e-9)
            throw std::invalid_argument("row " + std::to_string(i) + " of P does not sum to 1");
        for (int j = 0; j < d; ++j) P_[static_cast<std::size_t>(i) * d + j] /= row;
    }
    double tot = 0.0;
    for (double v : p_) {
        if (!(v >= 0.0) || !std::isfinite(v))
            throw std::invalid_argument("initial distribution entries must be nonnegative");
        tot += v;
    }
    if (std::abs(tot - 1.0) > 1e-9)
        throw std::invalid_argument("initial distribution does not sum to 1");
    for (double& v : p_) v /= tot;
    // Stationarity: p P = p.
    for (int j = 0; j < d; ++j) {
        double s = 0.0;
        for (int i : spec_.predecessors(j)) s += p_[static_cast<std::size_t>(i)] * P_[static_cast<std::size_t>(i) * d + j];
        if (std::abs(s - p_[static_cast<std::size_t>(j)]) > 2e-12)
            throw std::invalid_argument("initial distribution is not stationary for P");
    }
}

MarkovMeasure MarkovMeasure::from_transition(const SubshiftSpec& spec, std::vector<double> P) {
    std::vector<double> p = stationary_distribution(spec, P);
    return MarkovMeasure(spec, std::move(p), std::move(P));
}

double MarkovMeasure::cylinder_weight(std::span<const int> w) const {
    spec_.require_admissible(w);
    double acc = p_[static_cast<std::size_t>(w[0])];
    for (std::size_t t = 0; t + 1 < w.size(); ++t) acc *= P(w[t], w[t + 1]);
    return acc;
}

CylinderMeasure MarkovMeasure::at_depth(int depth) const {
    WordTable table(spec_, depth);
    std::vector<double> weights(table.size());
    for (std::size_t i = 0; i < table.size(); ++i) {
        auto w = table.word(i);
        double acc = p_[static_cast<std::size_t>(w[0])];
        for (std::size_t t = 0; t + 1 < w.size(); ++t) acc *= P(w[t], w[t + 1]);
        weights[i] = acc;
    }
    return CylinderMeasure(spec_, depth, std::move(weights));
}

GibbsMeasure gibbs_measure(const SpectralData& sd, const TransferOperator& op) {
    const SubshiftSpec& spec = op.spec();
    if (sd.phi.spec() != spec)
        throw std::invalid_argument("spectral data does not match the operator");
    const int d = spec.alphabet_size();
    auto u = sd.nu.weights();  // right eigenvector of B, probability-normalized
    auto v = sd.phi.values();  // left eigenvector, nu(phi) = 1

    std::vector<double> p(static_cast<std::size_t>(d));
    double z = 0.0;
    for (int i = 0; i < d; ++i) {
        p[static_cast<std::size_t>(i)] = u[static_cast<std::size_t>(i)] * v[static_cast<std::size_t>(i)];
        z += p[static_cast<std::size_t>(i)];
    }
    for (double& x : p) x /= z;

    std::vector<double> P(static_cast<std::size_t>(d) * d, 0.0);
    for (int i = 0; i < d; ++i) {
        double row = 0.0;
        for (int j : spec.successors(i)) {
            double val = op.matrix(i, j) * u[static_cast<std::size_t>(j)] /
                         (sd.lambda * u[static_cast<std::size_t>(i)]);
            P[static_cast<std::size_t>(i) * d + j] = val;
            row += val;
        }
        for (int j : spec.successors(i)) P[static_cast<std::size_t>(i) * d + j] /= row;
    }
    return GibbsMeasure{MarkovMeasure(spec, std::move(p), std::move(P)), sd, op};
}

double eigen_measure_cylinder(const SpectralData& sd, const TransferOperator& op,
                              std::span<const int> word) {
    const SubshiftSpec& spec = op.spec();
    spec.require_admissible(word);
    const std::size_t n = word.size();
    double acc = sd.nu[static_cast<std::size_t>(word[n - 1])] / sd.nu.total();
    for (std::size_t t = 0; t + 1 < n; ++t) acc *= op.matrix(word[t], word[t + 1]);
    return acc / std::pow(sd.lambda, static_cast<double>(n - 1));
}

double spectral_gap(const TransferOperator& op) {
    const SubshiftSpec& spec = op.spec();
    if (!is_primitive(spec))
        throw NonPrimitiveError("spectral_gap requires a primitive transition matrix");
    const int d = spec.alphabet_size();
    if (d == 1) return 0.0;

    if (d <= 64) {
        // Gap is scale-invariant; normalize by the largest entry for stability.
        double mx = 0.0;
        for (double v : op.matrix_data()) mx = std::max(mx, v);
        Eigen::MatrixXd M(d, d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) M(i, j) = op.matrix(i, j) / mx;
        Eigen::EigenSolver<Eigen::MatrixXd> es(M, /*computeEigenvectors=*/false);
        std::vector<double> moduli(static_cast<std::size_t>(d));
        for (int i = 0; i < d; ++i) moduli[static_cast<std::size_t>(i)] = std::abs(es.eigenvalues()[i]);
        std::sort(moduli.begin(), moduli.end(), std::greater<double>());
        if (moduli[0] <= 0.0) return 0.0;
        return std::min(1.0, std::max(0.0, moduli[1] / moduli[0]));
    }

    // Large alphabets: deflate the Perron pair and estimate |lambda_2| from the
    // norm growth of the deflated matrix.
    SpectralData sd = rpf_solve(op);
    std::vector<double> C(static_cast<std::size_t>(d) * d);
    double uv = 0.0;
    for (int i = 0; i < d; ++i) uv += sd.nu[static_cast<std::size_t>(i)] * sd.phi[static_cast<std::size_t>(i)];
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            C[static_cast<std::size_t>(i) * d + j] =
                op.matrix(i, j) - sd.lambda * sd.nu[static_cast<std::size_t>(i)] * sd.phi[static_cast<std::size_t>(j)] / uv;
    std::vector<double> x(static_cast<std::size_t>(d), 1.0 / d), y(static_cast<std::size_t>(d));
    double logmod = 0.0;
    int measured = 0;
    for (int it = 0; it < 200; ++it) {
        for (int i = 0; i < d; ++i) {
            double s = 0.0;
            for (int j = 0; j < d; ++j) s += C[static_cast<std::size_t>(i) * d + j] * x[static_cast<std::size_t>(j)];
            y[static_cast<std::size_t>(i)] = s;
        }
        double norm = 0.0;
        for (double v : y) norm = std::max(norm, std::abs(v));
        if (norm == 0.0) return 0.0;
        if (it >= 100) {
            logmod += std::log(norm);
            ++measured;
        }
        for (int i = 0; i < d; ++i) x[static_cast<std::size_t>(i)] = y[static_cast<std::size_t>(i)] / norm;
    }
    double est = std::exp(logmod / std::max(1, measured));
    return std::min(1.0, std::max(0.0, est / sd.lambda));
}

ConvergenceReport convergence_report(const TransferOperator& normalized_op,
                                     const CylinderFunction& a, int steps) {
    if (steps < 1) throw std::invalid_argument("steps must be at least 1");
    const SubshiftSpec& spec = normalized_op.spec();
    if (a.spec() != spec)
        throw std::invalid_argument("function does not live on the operator's subshift");
    const int d = spec.alphabet_size();
    double dev = 0.0;
    for (int j = 0; j < d; ++j) {
        double col = 0.0;
        for (int i : spec.predecessors(j)) col += normalized_op.matrix(i, j);
        dev = std::max(dev, std::abs(col - 1.0));
    }
    if (dev > 1e-10)
        throw NotNormalizedError("convergence_report requires a normalized operator (max column deviation " +
                                 std::to_string(dev) + ")");

    SpectralData sd = rpf_solve(normalized_op);
    GibbsMeasure gibbs = gibbs_measure(sd, normalized_op);
    const double mean = gibbs.chain.at_depth(a.depth()).integrate(a);

    std::vector<double> e;
    e.reserve(static_cast<std::size_t>(steps) + 1);
    CylinderFunction f = a;
    for (int n = 0; n <= steps; ++n) {
        double sup = 0.0;
        for (double v : f.values()) sup = std::max(sup, std::abs(v - mean));
        e.push_back(sup);
        if (n < steps) f = apply(normalized_op, f);
    }

    const double gap = spectral_gap(normalized_op);
    const double floor = 1e-14 * (1.0 + std::abs(mean));
    double C = 1.0;
    if (e[0] > floor && gap > 0.0) {
        for (int n = 1; n <= steps; ++n) {
            if (e[static_cast<std::size_t>(n)] <= floor) continue;
            C = std::max(C, e[static_cast<std::size_t>(n)] / (std::pow(gap, n) * e[0]));
        }
    }
    return ConvergenceReport{std::move(e), mean, gap, C};
}

} // namespace thermoformal
