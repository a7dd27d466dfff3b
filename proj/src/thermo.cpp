#include "thermoformal/thermo.hpp"

#include "thermoformal/errors.hpp"
#include "thermoformal/log.hpp"
#include "thermoformal/recode.hpp"
#include "thermoformal/rng.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace thermoformal {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// Finite-dimensional inner objective
///   J(t) = sum_y m_out[y] log (L e^t)(y) - sum_x m_k[x] t(x) - shift
/// over log-coordinates t of positive depth-k cylinder functions. Convex
/// (log-sum-exp minus linear); the gradient sums to zero whenever m_out and
/// m_k have equal mass (scale invariance of J).
class InnerObjective {
  public:
    InnerObjective(const SubshiftSpec& spec, const CylinderFunction& log_rho, int k)
        : spec_(spec), k_(k), out_depth_(std::max(k - 1, 1)),
          words_k_(spec, k), words_out_(spec, out_depth_) {
        if (k < 1) throw std::invalid_argument("competitor depth must be at least 1");
        const int d = spec_.alphabet_size();
        std::vector<double> logB(static_cast<std::size_t>(d) * d, kNegInf);
        {
            WordTable pairs(spec_, 2);
            CylinderFunction lw = log_rho.lifted_to(2);
            for (std::size_t t = 0; t < pairs.size(); ++t) {
                auto w = pairs.word(t);
                logB[static_cast<std::size_t>(w[0]) * d + w[1]] = lw.values()[t];
            }
        }
        offsets_.push_back(0);
        if (k_ == 1) {
            for (std::size_t yi = 0; yi < words_out_.size(); ++yi) {
                int j = words_out_.word(yi)[0];
                for (int a : spec_.predecessors(j)) {
                    contrib_x_.push_back(a);
                    contrib_logB_.push_back(logB[static_cast<std::size_t>(a) * d + j]);
                }
                offsets_.push_back(static_cast<int>(contrib_x_.size()));
            }
        } else {
            std::vector<int> x(static_cast<std::size_t>(k_));
            for (std::size_t yi = 0; yi < words_out_.size(); ++yi) {
                auto y = words_out_.word(yi);
                std::copy(y.begin(), y.end(), x.begin() + 1);
                for (int a : spec_.predecessors(y[0])) {
                    x[0] = a;
                    std::size_t xi = words_k_.find(x);
                    contrib_x_.push_back(static_cast<int>(xi));
                    contrib_logB_.push_back(logB[static_cast<std::size_t>(a) * d + y[0]]);
                }
                offsets_.push_back(static_cast<int>(contrib_x_.size()));
            }
        }
    }

    int dim() const { return static_cast<int>(words_k_.size()); }
    const WordTable& words_k() const { return words_k_; }
    const WordTable& words_out() const { return words_out_; }
    int out_depth() const { return out_depth_; }

    void set_measure(std::vector<double> m_out, std::vector<double> m_k, double shift) {
        if (m_out.size() != words_out_.size() || m_k.size() != words_k_.size())
            throw std::invalid_argument("measure tables have wrong sizes");
        m_out_ = std::move(m_out);
        m_k_ = std::move(m_k);
        shift_ = shift;
    }

    double eval(std::span<const double> t, std::vector<double>* grad,
                Eigen::MatrixXd* hess) const {
        const int n = dim();
        if (static_cast<int>(t.size()) != n)
            throw std::invalid_argument("coordinate vector has wrong size");
        double value = 0.0;
        if (grad) grad->assign(static_cast<std::size_t>(n), 0.0);
        if (hess) hess->setZero(n, n);
        std::vector<double> w;
        for (std::size_t yi = 0; yi < words_out_.size(); ++yi) {
            const int lo = offsets_[yi], hi = offsets_[yi + 1];
            double M = kNegInf;
            for (int c = lo; c < hi; ++c)
                M = std::max(M, contrib_logB_[static_cast<std::size_t>(c)] +
                                    t[static_cast<std::size_t>(contrib_x_[static_cast<std::size_t>(c)])]);
            double S = 0.0;
            w.assign(static_cast<std::size_t>(hi - lo), 0.0);
            for (int c = lo; c < hi; ++c) {
                double e = std::exp(contrib_logB_[static_cast<std::size_t>(c)] +
                                    t[static_cast<std::size_t>(contrib_x_[static_cast<std::size_t>(c)])] - M);
                w[static_cast<std::size_t>(c - lo)] = e;
                S += e;
            }
            const double glog = M + std::log(S);
            const double m = m_out_[yi];
            value += m * glog;
            if (grad || hess) {
                for (auto& e : w) e /= S;
                if (grad)
                    for (int c = lo; c < hi; ++c)
                        (*grad)[static_cast<std::size_t>(contrib_x_[static_cast<std::size_t>(c)])] +=
                            m * w[static_cast<std::size_t>(c - lo)];
                if (hess) {
                    for (int c1 = lo; c1 < hi; ++c1) {
                        const int x1 = contrib_x_[static_cast<std::size_t>(c1)];
                        const double w1 = w[static_cast<std::size_t>(c1 - lo)];
                        (*hess)(x1, x1) += m * w1;
                        for (int c2 = lo; c2 < hi; ++c2) {
                            const int x2 = contrib_x_[static_cast<std::size_t>(c2)];
                            (*hess)(x1, x2) -= m * w1 * w[static_cast<std::size_t>(c2 - lo)];
                        }
                    }
                }
            }
        }
        for (int x = 0; x < n; ++x) {
            value -= m_k_[static_cast<std::size_t>(x)] * t[static_cast<std::size_t>(x)];
            if (grad) (*grad)[static_cast<std::size_t>(x)] -= m_k_[static_cast<std::size_t>(x)];
        }
        return value - shift_;
    }

  private:
    SubshiftSpec spec_;
    int k_;
    int out_depth_;
    WordTable words_k_;
    WordTable words_out_;
    std::vector<int> offsets_;
    std::vector<int> contrib_x_;
    std::vector<double> contrib_logB_;
    std::vector<double> m_out_;
    std::vector<double> m_k_;
    double shift_ = 0.0;
};

struct NewtonOutcome {
    std::vector<double> t;
    double value = 0.0;
    double grad_norm = 0.0;
    int iterations = 0;
    bool converged = false;
    int evaluations = 0;
};

/// Damped Newton with ridge regularization and Armijo backtracking on the
/// convex objective above; descent is monotone from the starting point.
NewtonOutcome newton_minimize(const InnerObjective& obj, std::vector<double> t0, double gtol,
                              int max_iter) {
    const int n = obj.dim();
    NewtonOutcome out;
    out.t = std::move(t0);
    std::vector<double> g;
    Eigen::MatrixXd H(n, n);
    out.value = obj.eval(out.t, &g, &H);
    ++out.evaluations;
    std::vector<double> tn(static_cast<std::size_t>(n));
    for (int iter = 1; iter <= max_iter; ++iter) {
        out.iterations = iter - 1;
        double gnorm = 0.0;
        for (double v : g) gnorm = std::max(gnorm, std::abs(v));
        out.grad_norm = gnorm;
        if (gnorm < gtol) {
            out.converged = true;
            return out;
        }
        double maxdiag = 0.0;
        for (int i = 0; i < n; ++i) maxdiag = std::max(maxdiag, H(i, i));
        Eigen::MatrixXd Hr = H;
        for (int i = 0; i < n; ++i) Hr(i, i) += 1e-10 * (1.0 + maxdiag);
        Eigen::VectorXd gv(n);
        for (int i = 0; i < n; ++i) gv(i) = g[static_cast<std::size_t>(i)];
        Eigen::VectorXd dv = Hr.ldlt().solve(-gv);
        double slope = 0.0;
        bool finite = true;
        for (int i = 0; i < n; ++i) {
            if (!std::isfinite(dv(i))) finite = false;
            slope += g[static_cast<std::size_t>(i)] * dv(i);
        }
        if (!finite || slope >= 0.0) {
            for (int i = 0; i < n; ++i) dv(i) = -g[static_cast<std::size_t>(i)];
            slope = -gnorm * gnorm;
        }
        double mean = dv.sum() / n;
        for (int i = 0; i < n; ++i) dv(i) -= mean;
        slope = 0.0;
        for (int i = 0; i < n; ++i) slope += g[static_cast<std::size_t>(i)] * dv(i);
        if (slope >= 0.0) {
            for (int i = 0; i < n; ++i) dv(i) = -g[static_cast<std::size_t>(i)];
            slope = -gnorm * gnorm;
        }
        double s = 1.0;
        bool accepted = false;
        double fn = out.value;
        for (int bt = 0; bt < 60; ++bt) {
            for (int i = 0; i < n; ++i)
                tn[static_cast<std::size_t>(i)] = out.t[static_cast<std::size_t>(i)] + s * dv(i);
            fn = obj.eval(tn, nullptr, nullptr);
            ++out.evaluations;
            if (fn <= out.value + 1e-4 * s * slope) {
                accepted = true;
                break;
            }
            s *= 0.5;
        }
        if (!accepted) break;
        out.t.swap(tn);
        out.value = obj.eval(out.t, &g, &H);
        ++out.evaluations;
    }
    double gnorm = 0.0;
    for (double v : g) gnorm = std::max(gnorm, std::abs(v));
    out.grad_norm = gnorm;
    out.converged = gnorm < gtol;
    return out;
}

struct NelderMeadOutcome {
    std::vector<double> x;
    double f = 0.0;
    int iterations = 0;
    bool converged = false;
};

NelderMeadOutcome nelder_mead(const std::function<double(std::span<const double>)>& f,
                              std::vector<double> x0, double step, int max_iter, double ftol,
                              double xtol) {
    const int n = static_cast<int>(x0.size());
    std::vector<std::vector<double>> X(static_cast<std::size_t>(n) + 1, x0);
    std::vector<double> F(static_cast<std::size_t>(n) + 1);
    for (int i = 1; i <= n; ++i) X[static_cast<std::size_t>(i)][static_cast<std::size_t>(i - 1)] += step;
    for (int i = 0; i <= n; ++i) F[static_cast<std::size_t>(i)] = f(X[static_cast<std::size_t>(i)]);

    auto sort_simplex = [&]() {
        std::vector<int> order(static_cast<std::size_t>(n) + 1);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](int a, int b) { return F[static_cast<std::size_t>(a)] < F[static_cast<std::size_t>(b)]; });
        std::vector<std::vector<double>> X2;
        std::vector<double> F2;
        X2.reserve(X.size());
        F2.reserve(F.size());
        for (int idx : order) {
            X2.push_back(std::move(X[static_cast<std::size_t>(idx)]));
            F2.push_back(F[static_cast<std::size_t>(idx)]);
        }
        X = std::move(X2);
        F = std::move(F2);
    };

    NelderMeadOutcome out;
    int iter = 0;
    for (iter = 1; iter <= max_iter; ++iter) {
        sort_simplex();
        double fspread = F[static_cast<std::size_t>(n)] - F[0];
        double xspread = 0.0;
        for (int i = 1; i <= n; ++i)
            for (int c = 0; c < n; ++c)
                xspread = std::max(xspread, std::abs(X[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)] -
                                                     X[0][static_cast<std::size_t>(c)]));
        if (fspread <= ftol * (1.0 + std::abs(F[0])) && xspread <= xtol) {
            out.converged = true;
            break;
        }
        std::vector<double> centroid(static_cast<std::size_t>(n), 0.0);
        for (int i = 0; i < n; ++i)
            for (int c = 0; c < n; ++c)
                centroid[static_cast<std::size_t>(c)] += X[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)] / n;
        auto blend = [&](double coef) {
            std::vector<double> p(static_cast<std::size_t>(n));
            for (int c = 0; c < n; ++c)
                p[static_cast<std::size_t>(c)] = centroid[static_cast<std::size_t>(c)] +
                                                 coef * (centroid[static_cast<std::size_t>(c)] -
                                                         X[static_cast<std::size_t>(n)][static_cast<std::size_t>(c)]);
            return p;
        };
        std::vector<double> xr = blend(1.0);
        double fr = f(xr);
        if (fr < F[0]) {
            std::vector<double> xe = blend(2.0);
            double fe = f(xe);
            if (fe < fr) {
                X[static_cast<std::size_t>(n)] = std::move(xe);
                F[static_cast<std::size_t>(n)] = fe;
            } else {
                X[static_cast<std::size_t>(n)] = std::move(xr);
                F[static_cast<std::size_t>(n)] = fr;
            }
        } else if (fr < F[static_cast<std::size_t>(n - 1)]) {
            X[static_cast<std::size_t>(n)] = std::move(xr);
            F[static_cast<std::size_t>(n)] = fr;
        } else {
            bool shrink = false;
            if (fr < F[static_cast<std::size_t>(n)]) {
                std::vector<double> xc = blend(0.5);
                double fc = f(xc);
                if (fc <= fr) {
                    X[static_cast<std::size_t>(n)] = std::move(xc);
                    F[static_cast<std::size_t>(n)] = fc;
                } else {
                    shrink = true;
                }
            } else {
                std::vector<double> xc = blend(-0.5);
                double fc = f(xc);
                if (fc < F[static_cast<std::size_t>(n)]) {
                    X[static_cast<std::size_t>(n)] = std::move(xc);
                    F[static_cast<std::size_t>(n)] = fc;
                } else {
                    shrink = true;
                }
            }
            if (shrink) {
                for (int i = 1; i <= n; ++i) {
                    for (int c = 0; c < n; ++c)
                        X[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)] =
                            X[0][static_cast<std::size_t>(c)] +
                            0.5 * (X[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)] -
                                   X[0][static_cast<std::size_t>(c)]);
                    F[static_cast<std::size_t>(i)] = f(X[static_cast<std::size_t>(i)]);
                }
            }
        }
    }
    sort_simplex();
    out.x = X[0];
    out.f = F[0];
    out.iterations = std::min(iter, max_iter);
    return out;
}

std::vector<double> chain_weights(const WordTable& table, int d, const std::vector<double>& p,
                                  const std::vector<double>& P) {
    std::vector<double> w(table.size());
    for (std::size_t i = 0; i < table.size(); ++i) {
        auto word = table.word(i);
        double acc = p[static_cast<std::size_t>(word[0])];
        for (std::size_t t = 0; t + 1 < word.size(); ++t)
            acc *= P[static_cast<std::size_t>(word[t]) * d + word[t + 1]];
        w[i] = acc;
    }
    return w;
}

/// log of the Perron eigenvalue of the matrix exp(logw), computed entirely in
/// log-space with log-sum-exp reductions (large-beta Bowen path).
double lse_power_pressure(const SubshiftSpec& spec, const std::vector<double>& logw) {
    const int d = spec.alphabet_size();
    std::vector<double> lphi(static_cast<std::size_t>(d), 0.0), ly(static_cast<std::size_t>(d));
    double prev = std::numeric_limits<double>::quiet_NaN();
    double est = 0.0;
    for (int it = 0; it < 200000; ++it) {
        for (int j = 0; j < d; ++j) {
            double M = kNegInf;
            for (int i : spec.predecessors(j))
                M = std::max(M, logw[static_cast<std::size_t>(i) * d + j] + lphi[static_cast<std::size_t>(i)]);
            double S = 0.0;
            for (int i : spec.predecessors(j))
                S += std::exp(logw[static_cast<std::size_t>(i) * d + j] + lphi[static_cast<std::size_t>(i)] - M);
            ly[static_cast<std::size_t>(j)] = M + std::log(S);
        }
        double M2 = kNegInf;
        for (double v : ly) M2 = std::max(M2, v);
        double S2 = 0.0;
        for (double v : ly) S2 += std::exp(v - M2);
        est = M2 + std::log(S2);
        double dphi = 0.0;
        for (int j = 0; j < d; ++j) {
            double next = ly[static_cast<std::size_t>(j)] - est;
            dphi = std::max(dphi, std::abs(next - lphi[static_cast<std::size_t>(j)]));
            lphi[static_cast<std::size_t>(j)] = next;
        }
        if (std::isfinite(prev) && std::abs(est - prev) < 1e-14 * std::max(1.0, std::abs(est)) &&
            dphi < 1e-13)
            break;
        prev = est;
    }
    return est;
}

} // namespace

double pressure(const CylinderPotential& pot) {
    TransferOperator op = TransferOperator::build(pot);
    return std::log(rpf_solve(op).lambda);
}

double entropy_oracle(const MarkovMeasure& mu) {
    const int d = mu.spec().alphabet_size();
    double h = 0.0;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            double v = mu.P(i, j);
            if (v > 0.0) h -= mu.p(i) * v * std::log(v);
        }
    return h;
}

EntropyObjectiveEval entropy_objective(const MarkovMeasure& mu, const CylinderPotential& rho,
                                       int depth, std::span<const double> t) {
    if (mu.spec() != rho.spec())
        throw std::invalid_argument("measure and potential live on different subshifts");
    if (rho.depth() != 2)
        throw std::invalid_argument("entropy objective requires a canonical depth-2 potential");
    InnerObjective obj(mu.spec(), rho.log_weights(), depth);
    double shift = mu.at_depth(2).integrate(rho.log_weights());
    CylinderMeasure mo = mu.at_depth(obj.out_depth());
    CylinderMeasure mk = mu.at_depth(depth);
    obj.set_measure(std::vector<double>(mo.weights().begin(), mo.weights().end()),
                    std::vector<double>(mk.weights().begin(), mk.weights().end()), shift);
    EntropyObjectiveEval out;
    out.value = obj.eval(t, &out.gradient, nullptr);
    return out;
}

VariationalResult entropy_variational(const MarkovMeasure& mu, const CylinderPotential& rho,
                                      int depth) {
    if (mu.spec() != rho.spec())
        throw std::invalid_argument("measure and potential live on different subshifts");
    if (rho.depth() != 2)
        throw std::invalid_argument("entropy_variational requires a canonical depth-2 potential");
    if (depth < 1) throw std::invalid_argument("depth must be at least 1");
    InnerObjective obj(mu.spec(), rho.log_weights(), depth);
    double shift = mu.at_depth(2).integrate(rho.log_weights());
    CylinderMeasure mo = mu.at_depth(obj.out_depth());
    CylinderMeasure mk = mu.at_depth(depth);
    obj.set_measure(std::vector<double>(mo.weights().begin(), mo.weights().end()),
                    std::vector<double>(mk.weights().begin(), mk.weights().end()), shift);

    NewtonOutcome nr = newton_minimize(obj, std::vector<double>(static_cast<std::size_t>(obj.dim()), 0.0),
                                       1e-10, 300);
    if (nr.grad_norm >= 1e-9)
        throw OptimizerError("entropy_variational did not reach the gradient tolerance",
                             nr.grad_norm, nr.iterations);

    std::vector<double> a(nr.t.size());
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = std::exp(nr.t[i]);
    VariationalResult res;
    res.value = nr.value;
    res.depth = depth;
    res.minimizer = CylinderFunction(mu.spec(), depth, std::move(a));
    res.diagnostics =
        OptimizerDiagnostics{nr.iterations, 1, nr.grad_norm, true, nr.evaluations};
    res.max_intermediate_value = nr.value;
    return res;
}

RhoIndependenceResult entropy_rho_independence_check(const MarkovMeasure& mu,
                                                     const CylinderPotential& rho,
                                                     const CylinderPotential& rho_prime,
                                                     int depth) {
    if (rho.spec() != rho_prime.spec())
        throw std::invalid_argument("the two potentials live on different subshifts");
    if (rho.depth() != 2 || rho_prime.depth() != 2)
        throw std::invalid_argument("both potentials must be canonical depth 2");
    // The substitution a' = a rho / rho' preserves the depth class when the
    // ratio depends on the first coordinate only; otherwise it needs depth 2.
    const SubshiftSpec& spec = rho.spec();
    WordTable pairs(spec, 2);
    const auto& w = rho.weights().values();
    const auto& wp = rho_prime.weights().values();
    bool first_coordinate_only = true;
    {
        std::vector<double> seen(static_cast<std::size_t>(spec.alphabet_size()),
                                 std::numeric_limits<double>::quiet_NaN());
        for (std::size_t t = 0; t < pairs.size(); ++t) {
            int i = pairs.word(t)[0];
            double r = w[t] / wp[t];
            double& s = seen[static_cast<std::size_t>(i)];
            if (std::isnan(s)) {
                s = r;
            } else if (std::abs(r - s) > 1e-12 * std::max(std::abs(r), std::abs(s))) {
                first_coordinate_only = false;
                break;
            }
        }
    }
    int k_prime = std::max(depth, first_coordinate_only ? 1 : 2);
    return RhoIndependenceResult{entropy_variational(mu, rho, depth),
                                 entropy_variational(mu, rho_prime, k_prime)};
}

VariationalResult pressure_minmax(const CylinderPotential& pot, int depth, int restarts,
                                  std::uint64_t seed) {
    if (depth < 1) throw std::invalid_argument("depth must be at least 1");
    if (restarts < 1) throw std::invalid_argument("restarts must be at least 1");
    TransferOperator op = TransferOperator::build(pot);
    const SubshiftSpec& spec = op.spec();
    if (!is_primitive(spec))
        throw NonPrimitiveError("pressure_minmax requires a primitive transition matrix");
    const int d = spec.alphabet_size();

    // Starting every inner minimization at the eigenfunction makes each
    // evaluated value <= log lambda by monotone descent, so every outer
    // iterate is a certified lower bound on the pressure.
    SpectralData sd = rpf_solve(op);
    InnerObjective obj(spec, op.rho().log_weights(), depth);
    std::vector<double> t_phi(static_cast<std::size_t>(obj.dim()));
    for (int x = 0; x < obj.dim(); ++x)
        t_phi[static_cast<std::size_t>(x)] =
            std::log(sd.phi[static_cast<std::size_t>(obj.words_k().word(static_cast<std::size_t>(x))[0])]);

    struct Row {
        int i;
        int offset;
    };
    std::vector<Row> free_rows;
    int m = 0;
    for (int i = 0; i < d; ++i) {
        int s = static_cast<int>(spec.successors(i).size());
        if (s >= 2) {
            free_rows.push_back(Row{i, m});
            m += s - 1;
        }
    }

    auto build_P = [&](std::span<const double> theta) {
        std::vector<double> P(static_cast<std::size_t>(d) * d, 0.0);
        for (int i = 0; i < d; ++i) {
            const auto& succ = spec.successors(i);
            if (succ.size() == 1) {
                P[static_cast<std::size_t>(i) * d + succ[0]] = 1.0;
            }
        }
        for (const Row& row : free_rows) {
            const auto& succ = spec.successors(row.i);
            const int s = static_cast<int>(succ.size());
            double M = 0.0;  // logit of the first successor is pinned at 0
            for (int t = 1; t < s; ++t)
                M = std::max(M, theta[static_cast<std::size_t>(row.offset + t - 1)]);
            double Z = std::exp(-M);
            for (int t = 1; t < s; ++t)
                Z += std::exp(theta[static_cast<std::size_t>(row.offset + t - 1)] - M);
            P[static_cast<std::size_t>(row.i) * d + succ[0]] = std::exp(-M) / Z;
            for (int t = 1; t < s; ++t)
                P[static_cast<std::size_t>(row.i) * d + succ[static_cast<std::size_t>(t)]] =
                    std::exp(theta[static_cast<std::size_t>(row.offset + t - 1)] - M) / Z;
        }
        return P;
    };

    int total_evals = 0;
    double max_intermediate = -std::numeric_limits<double>::infinity();
    auto eval_G = [&](std::span<const double> theta, NewtonOutcome* detail,
                      std::vector<double>* P_out) {
        std::vector<double> P = build_P(theta);
        std::vector<double> p = stationary_distribution(spec, P);
        obj.set_measure(chain_weights(obj.words_out(), d, p, P),
                        chain_weights(obj.words_k(), d, p, P), 0.0);
        NewtonOutcome nr = newton_minimize(obj, t_phi, 1e-9, 120);
        ++total_evals;
        max_intermediate = std::max(max_intermediate, nr.value);
        double v = nr.value;
        if (detail) *detail = std::move(nr);
        if (P_out) *P_out = std::move(P);
        return v;
    };

    struct Best {
        double value = -std::numeric_limits<double>::infinity();
        std::vector<double> theta;
        int iterations = 0;
        bool converged = false;
    } best;

    for (int j = 0; j < restarts; ++j) {
        std::vector<double> theta0(static_cast<std::size_t>(m), 0.0);
        if (j > 0) {
            SplitRng rng(seed, static_cast<std::uint64_t>(j));
            for (double& v : theta0) v = rng.uniform(-2.0, 2.0);
        }
        double candidate;
        int iters = 0;
        bool conv = true;
        std::vector<double> theta_best = theta0;
        if (m == 0) {
            candidate = eval_G(theta0, nullptr, nullptr);
        } else {
            NelderMeadOutcome nm = nelder_mead(
                [&](std::span<const double> th) { return -eval_G(th, nullptr, nullptr); }, theta0,
                0.5, 300 + 150 * m, 1e-12, 1e-9);
            candidate = -nm.f;
            iters = nm.iterations;
            conv = nm.converged;
            theta_best = std::move(nm.x);
        }
        if (candidate > best.value) {
            best.value = candidate;
            best.theta = std::move(theta_best);
            best.iterations = iters;
            best.converged = conv;
        }
    }

    NewtonOutcome inner_final;
    std::vector<double> P_best;
    double final_value = eval_G(best.theta, &inner_final, &P_best);

    VariationalResult res;
    res.value = final_value;
    res.depth = depth;
    std::vector<double> a(inner_final.t.size());
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = std::exp(inner_final.t[i]);
    res.minimizer = CylinderFunction(spec, depth, std::move(a));
    res.maximizer = MarkovMeasure::from_transition(spec, std::move(P_best));
    res.diagnostics = OptimizerDiagnostics{best.iterations, restarts, inner_final.grad_norm,
                                           best.converged && inner_final.grad_norm < 1e-6,
                                           total_evals};
    res.max_intermediate_value = max_intermediate;
    return res;
}

EquilibriumCheck equilibrium_check(const MarkovMeasure& mu, const CylinderPotential& b) {
    if (mu.spec() != b.spec())
        throw std::invalid_argument("measure and potential live on different subshifts");
    if (b.depth() != 2)
        throw std::invalid_argument("equilibrium_check requires a canonical depth-2 potential");
    double lhs = entropy_oracle(mu) + mu.at_depth(2).integrate(b.log_weights());
    double p = pressure(b);
    return EquilibriumCheck{lhs, p, p - lhs};
}

BowenResult bowen_root(const CylinderFunction& H, double tol) {
    if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
    if (!(H.min_value() > 1.0))
        throw HNotExpandingError("bowen_root requires min H > 1 (got " +
                                 std::to_string(H.min_value()) + ")");

    SubshiftSpec spec = H.spec();
    CylinderFunction H2 = H.lifted_to(std::max(H.depth(), 2));
    if (H.depth() > 2) {
        RecodeResult rr = higher_block_recode(spec, CylinderPotential::from_weights(H));
        spec = rr.recoding.recoded;
        H2 = rr.potential.weights();
    }
    if (!is_primitive(spec))
        throw NonPrimitiveError("bowen_root requires a primitive transition matrix");

    const int d = spec.alphabet_size();
    WordTable pairs(spec, 2);
    std::vector<double> logH(static_cast<std::size_t>(d) * d, kNegInf);
    for (std::size_t t = 0; t < pairs.size(); ++t) {
        auto w = pairs.word(t);
        logH[static_cast<std::size_t>(w[0]) * d + w[1]] = std::log(H2.values()[t]);
    }

    int evals = 0;
    bool last_logspace = false;
    auto pressure_at = [&](double beta) {
        ++evals;
        std::vector<double> vals(pairs.size());
        double vmax = -std::numeric_limits<double>::infinity();
        double vmin = std::numeric_limits<double>::infinity();
        for (std::size_t t = 0; t < pairs.size(); ++t) {
            auto w = pairs.word(t);
            vals[t] = -beta * logH[static_cast<std::size_t>(w[0]) * d + w[1]];
            vmax = std::max(vmax, vals[t]);
            vmin = std::min(vmin, vals[t]);
        }
        if (beta > 50.0 || vmax - vmin > 600.0) {
            last_logspace = true;
            std::vector<double> lw(static_cast<std::size_t>(d) * d, kNegInf);
            for (std::size_t t = 0; t < pairs.size(); ++t) {
                auto w = pairs.word(t);
                lw[static_cast<std::size_t>(w[0]) * d + w[1]] = vals[t];
            }
            return lse_power_pressure(spec, lw);
        }
        last_logspace = false;
        // Shift log-weights so the largest is 0 before exponentiating; the
        // shift re-enters the pressure additively and keeps exp() in range.
        for (double& v : vals) v -= vmax;
        CylinderPotential p = CylinderPotential::from_log_weights(CylinderFunction(spec, 2, std::move(vals)));
        return vmax + std::log(rpf_solve(TransferOperator::build(p)).lambda);
    };

    double p0 = pressure_at(0.0);
    if (p0 <= std::max(tol, 1e-12))
        throw DegenerateSystemError(
            "bowen_root: topological entropy is not positive, so no positive root exists");

    double lo = 0.0, hi = 1.0;
    double ph = pressure_at(hi);
    while (ph >= 0.0) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e12)
            throw NoConvergenceError("bowen_root: failed to bracket the root", std::abs(ph));
        ph = pressure_at(hi);
    }
    double mid = hi, pm = ph;
    for (int it = 0; it < 300; ++it) {
        mid = 0.5 * (lo + hi);
        pm = pressure_at(mid);
        if (std::abs(pm) < tol) return BowenResult{mid, evals, pm, last_logspace};
        if (pm > 0.0)
            lo = mid;
        else
            hi = mid;
    }
    throw NoConvergenceError("bowen_root: bisection did not reach the tolerance", std::abs(pm));
}

} // namespace thermoformal
