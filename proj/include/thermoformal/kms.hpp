#pragma once

#include "thermoformal/cylinder.hpp"
#include "thermoformal/spectral.hpp"
#include "thermoformal/transfer.hpp"

#include <span>
#include <variant>
#include <vector>

namespace thermoformal {

/// Everything derived from a generator H and inverse temperature beta:
/// the weight rho = H^{-beta}, its spectral data (lambda, eigenfunction k,
/// eigen-measure nu), the normalized operator with weight
/// rho_tilde = rho k / (lambda alpha(k)), the index ind(E) = rho_tilde^{-1},
/// and the Radon-Nikodym cocycle seed Lambda = rho * ind(E) = rho / rho_tilde.
struct KmsInstance {
    CylinderPotential H;
    double beta = 1.0;
    TransferOperator op;        // transfer operator of rho (working subshift)
    SpectralData spectral;      // k = spectral.phi, lambda = spectral.lambda
    TransferOperator op_tilde;  // normalized operator, L 1 = 1
    CylinderFunction index_fn;  // depth-2 values of ind(E)
    CylinderFunction lambda_fn; // depth-2 values of Lambda
};

/// Builds the instance; verifies ||L_tilde 1 - 1||_inf <= 1e-12.
KmsInstance make_kms_instance(const CylinderPotential& H, double beta);

/// A measure-level state: a coherent family of cylinder weights at every
/// depth with evaluation phi(a) = sum over words of weight * a. Either the
/// eigen-measure family of a transfer operator or a raw first-order Markov
/// family (p, P) with p not required to be stationary.
class KmsState {
  public:
    static KmsState eigen(TransferOperator op, SpectralData sd);
    static KmsState markov(SubshiftSpec spec, std::vector<double> p, std::vector<double> P);

    const SubshiftSpec& spec() const;
    double weight(std::span<const int> word) const;
    CylinderMeasure at_depth(int depth) const;
    double evaluate(const CylinderFunction& a) const;

  private:
    struct EigenFamily {
        TransferOperator op;
        SpectralData sd;
    };
    struct MarkovFamily {
        SubshiftSpec spec;
        std::vector<double> p;
        std::vector<double> P;
    };
    explicit KmsState(std::variant<EigenFamily, MarkovFamily> family)
        : family_(std::move(family)) {}
    std::variant<EigenFamily, MarkovFamily> family_;
};

/// The cocycle Lambda^[n] = prod_{i<n} alpha^i(Lambda) as an explicit product
/// (depth n+1); n = 0 gives the constant 1.
CylinderFunction lambda_n(const KmsInstance& inst, int n);

/// Closed form of the same cocycle: lambda^n alpha^n(k)/k.
CylinderFunction lambda_n_closed(const KmsInstance& inst, int n);

/// |phi(a) - phi(L_rho_tilde(Lambda a))|; vanishes exactly when the state is
/// the dual fixed point of L_rho, which requires lambda = 1.
double crossed_product_residual(const KmsInstance& inst, const KmsState& state,
                                const CylinderFunction& a);

struct KmsResidualPair {
    double residual = 0.0;             // closed-form cocycle route
    double simplified_residual = 0.0;  // phi~(a') vs phi~(alpha^n L~^n a') route
};

/// Approximately-proper KMS residual at level n (n >= 1); the two routes are
/// algebraically identical and must agree to 1e-12.
KmsResidualPair approx_proper_residual(const KmsInstance& inst, const KmsState& state,
                                       const CylinderFunction& a, int n);

/// The eigen-measure state of the dual operator for rho = H^{-beta}.
KmsState kms_measure(const CylinderPotential& H, double beta);
KmsState kms_measure(const KmsInstance& inst);

/// The unique inverse temperature with P(-beta log H) = 0 (delegates to
/// bowen_root; requires min H > 1).
double v_algebra_beta(const CylinderPotential& H, double tol = 1e-10);

struct TelescopingReport {
    std::vector<double> sup_errors;  // e_n = ||L~^n a - phi~(a)||_inf, n = 0..N
    std::vector<double> bounds;      // e_n + e_{n+1}, n = 0..N-1
    double fixed_point_residual = 0.0;  // |phi~(L~ a) - phi~(a)|
    double gap = 0.0;
    double empirical_rate = 0.0;
    bool concluded = false;
};

/// Telescoping argument: |phi~(L~ a - a)| <= e_{n+1} + e_n for every n; when
/// the bounds decay below 1e-9 the fixed-point identity phi~ o L~ = phi~ is
/// certified and the state is an equilibrium state.
TelescopingReport telescoping_convergence_check(const KmsInstance& inst, const KmsState& state,
                                                const CylinderFunction& a, int N);

} // namespace thermoformal
