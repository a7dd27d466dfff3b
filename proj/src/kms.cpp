#include "thermoformal/kms.hpp"

#include "thermoformal/errors.hpp"
#include "thermoformal/thermo.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace thermoformal {

KmsInstance make_kms_instance(const CylinderPotential& H, double beta) {
    CylinderPotential rho = CylinderPotential::from_H(H.weights(), beta);
    TransferOperator op = TransferOperator::build(rho);
    SpectralData sd = rpf_solve(op);
    TransferOperator op_t = normalize(op, sd);

    const SubshiftSpec& spec = op.spec();
    double dev = 0.0;
    for (int j = 0; j < spec.alphabet_size(); ++j) {
        double col = 0.0;
        for (int i : spec.predecessors(j)) col += op_t.matrix(i, j);
        dev = std::max(dev, std::abs(col - 1.0));
    }
    if (dev > 1e-12)
        throw NotNormalizedError("make_kms_instance: normalized operator deviates from L1 = 1 by " +
                                 std::to_string(dev));

    CylinderFunction index_fn = reciprocal(op_t.rho().weights());
    CylinderFunction lambda_fn = multiply(op.rho().weights(), index_fn);
    return KmsInstance{H,        beta,     std::move(op),       std::move(sd),
                       std::move(op_t),    std::move(index_fn), std::move(lambda_fn)};
}

KmsState KmsState::eigen(TransferOperator op, SpectralData sd) {
    if (sd.phi.spec() != op.spec())
        throw std::invalid_argument("spectral data does not match the operator");
    return KmsState(EigenFamily{std::move(op), std::move(sd)});
}

KmsState KmsState::markov(SubshiftSpec spec, std::vector<double> p, std::vector<double> P) {
    const int d = spec.alphabet_size();
    if (p.size() != static_cast<std::size_t>(d) || P.size() != static_cast<std::size_t>(d) * d)
        throw std::invalid_argument("Markov family has wrong dimensions");
    double tot = 0.0;
    for (double v : p) {
        if (!(v >= 0.0) || !std::isfinite(v))
            throw std::invalid_argument("initial distribution entries must be nonnegative");
        tot += v;
    }
    if (std::abs(tot - 1.0) > 1e-9)
        throw std::invalid_argument("initial distribution does not sum to 1");
    for (int i = 0; i < d; ++i) {
        double row = 0.0;
        for (int j = 0; j < d; ++j) {
            double v = P[static_cast<std::size_t>(i) * d + j];
            if (!(v >= 0.0) || !std::isfinite(v))
                throw std::invalid_argument("transition kernel entries must be nonnegative");
            if (v != 0.0 && !spec.allowed(i, j))
                throw std::invalid_argument("transition kernel is supported outside the transition graph");
            row += v;
        }
        if (std::abs(row - 1.0) > 1e-9)
            throw std::invalid_argument("row " + std::to_string(i) + " of P does not sum to 1");
    }
    return KmsState(MarkovFamily{std::move(spec), std::move(p), std::move(P)});
}

const SubshiftSpec& KmsState::spec() const {
    if (const auto* e = std::get_if<EigenFamily>(&family_)) return e->op.spec();
    return std::get<MarkovFamily>(family_).spec;
}

double KmsState::weight(std::span<const int> word) const {
    if (const auto* e = std::get_if<EigenFamily>(&family_))
        return eigen_measure_cylinder(e->sd, e->op, word);
    const auto& m = std::get<MarkovFamily>(family_);
    m.spec.require_admissible(word);
    const int d = m.spec.alphabet_size();
    double acc = m.p[static_cast<std::size_t>(word[0])];
    for (std::size_t t = 0; t + 1 < word.size(); ++t)
        acc *= m.P[static_cast<std::size_t>(word[t]) * d + word[t + 1]];
    return acc;
}

CylinderMeasure KmsState::at_depth(int depth) const {
    const SubshiftSpec& s = spec();
    WordTable table(s, depth);
    std::vector<double> weights(table.size());
    for (std::size_t i = 0; i < table.size(); ++i) weights[i] = weight(table.word(i));
    return CylinderMeasure(s, depth, std::move(weights));
}

double KmsState::evaluate(const CylinderFunction& a) const {
    if (a.spec() != spec())
        throw std::invalid_argument("function does not live on the state's subshift");
    return at_depth(a.depth()).integrate(a);
}

CylinderFunction lambda_n(const KmsInstance& inst, int n) {
    if (n < 0) throw std::invalid_argument("n must be nonnegative");
    const SubshiftSpec& spec = inst.op.spec();
    if (n == 0) return CylinderFunction::constant(spec, 1, 1.0);
    CylinderFunction prod = inst.lambda_fn;
    for (int i = 1; i < n; ++i) prod = multiply(prod, alpha_lift_n(inst.lambda_fn, i));
    return prod;
}

CylinderFunction lambda_n_closed(const KmsInstance& inst, int n) {
    if (n < 0) throw std::invalid_argument("n must be nonnegative");
    const SubshiftSpec& spec = inst.op.spec();
    if (n == 0) return CylinderFunction::constant(spec, 1, 1.0);
    WordTable table(spec, n + 1);
    const double ln = std::pow(inst.spectral.lambda, n);
    std::vector<double> vals(table.size());
    for (std::size_t t = 0; t < table.size(); ++t) {
        auto w = table.word(t);
        vals[t] = ln * inst.spectral.phi[static_cast<std::size_t>(w[static_cast<std::size_t>(n)])] /
                  inst.spectral.phi[static_cast<std::size_t>(w[0])];
    }
    return CylinderFunction(spec, n + 1, std::move(vals));
}

double crossed_product_residual(const KmsInstance& inst, const KmsState& state,
                                const CylinderFunction& a) {
    if (a.spec() != inst.op.spec() || state.spec() != inst.op.spec())
        throw std::invalid_argument("instance, state, and function must share one subshift");
    CylinderFunction transported = apply(inst.op_tilde, multiply(inst.lambda_fn, a));
    return std::abs(state.evaluate(a) - state.evaluate(transported));
}

KmsResidualPair approx_proper_residual(const KmsInstance& inst, const KmsState& state,
                                       const CylinderFunction& a, int n) {
    if (n < 1) throw std::invalid_argument("n must be at least 1");
    const SubshiftSpec& spec = inst.op.spec();
    if (a.spec() != spec || state.spec() != spec)
        throw std::invalid_argument("instance, state, and function must share one subshift");
    const CylinderFunction& k = inst.spectral.phi;

    // Route 1: the literal condition with the closed-form cocycle,
    //   phi(a) vs phi( Lambda^{-[n]} alpha^n( L~^n( Lambda^[n] a ) ) ).
    CylinderFunction lam = lambda_n_closed(inst, n);
    CylinderFunction pushed = alpha_lift_n(apply_n(inst.op_tilde, multiply(lam, a), n), n);
    WordTable table(spec, n + 1);
    const double ln = std::pow(inst.spectral.lambda, n);
    std::vector<double> inv(table.size());
    for (std::size_t t = 0; t < table.size(); ++t) {
        auto w = table.word(t);
        inv[t] = k[static_cast<std::size_t>(w[0])] /
                 (ln * k[static_cast<std::size_t>(w[static_cast<std::size_t>(n)])]);
    }
    CylinderFunction lam_inv(spec, n + 1, std::move(inv));
    double r1 = std::abs(state.evaluate(a) - state.evaluate(multiply(lam_inv, pushed)));

    // Route 2: the simplified form with the unnormalized phi~(x) = phi(k x):
    //   phi~(a') vs phi~(alpha^n L~^n a') for a' = a / k.
    CylinderFunction a_prime = divide(a, k);
    CylinderFunction pushed2 = alpha_lift_n(apply_n(inst.op_tilde, a_prime, n), n);
    double r2 = std::abs(state.evaluate(multiply(k, a_prime)) -
                         state.evaluate(multiply(k, pushed2)));
    return KmsResidualPair{r1, r2};
}

KmsState kms_measure(const CylinderPotential& H, double beta) {
    CylinderPotential rho = CylinderPotential::from_H(H.weights(), beta);
    TransferOperator op = TransferOperator::build(rho);
    SpectralData sd = rpf_solve(op);
    return KmsState::eigen(std::move(op), std::move(sd));
}

KmsState kms_measure(const KmsInstance& inst) {
    return KmsState::eigen(inst.op, inst.spectral);
}

double v_algebra_beta(const CylinderPotential& H, double tol) {
    return bowen_root(H.weights(), tol).beta;
}

TelescopingReport telescoping_convergence_check(const KmsInstance& inst, const KmsState& state,
                                                const CylinderFunction& a, int N) {
    if (N < 1) throw std::invalid_argument("N must be at least 1");
    const SubshiftSpec& spec = inst.op.spec();
    if (a.spec() != spec || state.spec() != spec)
        throw std::invalid_argument("instance, state, and function must share one subshift");
    const CylinderFunction& k = inst.spectral.phi;
    const double phi_k = state.evaluate(k);
    auto phi_tilde = [&](const CylinderFunction& f) {
        return state.evaluate(multiply(k, f)) / phi_k;
    };

    const double mean = phi_tilde(a);
    TelescopingReport rep;
    rep.sup_errors.reserve(static_cast<std::size_t>(N) + 1);
    CylinderFunction f = a;
    for (int n = 0; n <= N; ++n) {
        double sup = 0.0;
        for (double v : f.values()) sup = std::max(sup, std::abs(v - mean));
        rep.sup_errors.push_back(sup);
        if (n < N) f = apply(inst.op_tilde, f);
    }
    rep.bounds.reserve(static_cast<std::size_t>(N));
    for (int n = 0; n < N; ++n)
        rep.bounds.push_back(rep.sup_errors[static_cast<std::size_t>(n)] +
                             rep.sup_errors[static_cast<std::size_t>(n) + 1]);

    rep.fixed_point_residual = std::abs(phi_tilde(apply(inst.op_tilde, a)) - mean);
    rep.gap = spectral_gap(inst.op_tilde);

    int n1 = -1;
    for (int n = 0; n <= N; ++n)
        if (rep.sup_errors[static_cast<std::size_t>(n)] > 1e-12) n1 = n;
    int n0 = std::min(3, n1 > 0 ? n1 - 1 : 0);
    if (n1 > n0) {
        rep.empirical_rate = std::pow(rep.sup_errors[static_cast<std::size_t>(n1)] /
                                          rep.sup_errors[static_cast<std::size_t>(n0)],
                                      1.0 / (n1 - n0));
    }
    rep.concluded = rep.bounds.back() < 1e-9 && rep.fixed_point_residual < 1e-9;
    return rep;
}

} // namespace thermoformal
