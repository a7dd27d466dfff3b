#pragma once

#include "thermoformal/transfer.hpp"

#include <vector>

namespace thermoformal {

// Perron data of a transfer operator:
//   phi solves  L phi = lambda phi   (f -> B^T f on depth-1 functions),
//   nu  solves  B nu  = lambda nu    (dual direction),
// with nu normalized to a probability and phi scaled so that nu(phi) = 1.
struct SpectralData {
    double lambda;
    CylinderFunction phi; // depth 1
    CylinderMeasure nu;   // depth 1
    int iterations;
    double phi_residual; // ||B^T phi - lambda phi||_inf
    double nu_residual;  // ||B nu - lambda nu||_1
};

// Power iteration from the all-ones start vector. Requires a primitive
// transition matrix (NonPrimitiveError otherwise); throws NoConvergenceError
// with the last residual when max_iter is exhausted before the residuals reach
// 1e-10 * lambda.
SpectralData rpf_solve(const TransferOperator& op, double tol = 1e-12, int max_iter = 100000);

// Normalized operator: B~(i, j) = B(i, j) * phi(i) / (lambda * phi(j)), so that
// L~ 1 = 1. Lives in the transfer-operator vocabulary but needs spectral data.
TransferOperator normalize(const TransferOperator& op, const SpectralData& sd);

// Stationary distribution of a row-stochastic matrix supported on the
// transition graph (power iteration on the left action, uniform start).
std::vector<double> stationary_distribution(const SubshiftSpec& spec, const std::vector<double>& P);

// Order-1 Markov measure: initial distribution p and row-stochastic transition
// kernel P supported on the admissible transitions, with p stationary for P.
class MarkovMeasure {
public:
    MarkovMeasure(SubshiftSpec spec, std::vector<double> p, std::vector<double> P);

    static MarkovMeasure from_transition(const SubshiftSpec& spec, std::vector<double> P);

    const SubshiftSpec& spec() const { return spec_; }
    std::span<const double> p() const { return p_; }
    double p(int i) const { return p_[static_cast<std::size_t>(i)]; }
    double P(int i, int j) const { return P_[static_cast<std::size_t>(i) * spec_.alphabet_size() + j]; }
    const std::vector<double>& P_data() const { return P_; }

    double cylinder_weight(std::span<const int> w) const;
    CylinderMeasure at_depth(int depth) const;

private:
    SubshiftSpec spec_;
    std::vector<double> p_;
    std::vector<double> P_;
};

// Gibbs (equilibrium) measure of the potential behind `op`, as the stationary
// Markov chain p_i = u_i v_i / sum_k u_k v_k, P(i, j) = B(i, j) u_j / (lambda u_i)
// with u the right and v the left Perron eigenvector of B.
struct GibbsMeasure {
    MarkovMeasure chain;
    SpectralData spectral;
    TransferOperator op;
};

GibbsMeasure gibbs_measure(const SpectralData& sd, const TransferOperator& op);

// Weight that the eigen-measure family assigns to the cylinder of an admissible
// word w of length n:
//   nu[w] = lambda^-(n-1) * (prod_t B(w_t, w_{t+1})) * u_{w_{n-1}} / sum_k u_k.
double eigen_measure_cylinder(const SpectralData& sd, const TransferOperator& op,
                              std::span<const int> word);

// |lambda_2| / lambda_1 (0 for a 1x1 matrix or when the spectrum is a single
// point). Direct dense eigensolve for d <= 64, deflation + norm-growth estimate
// beyond that.
double spectral_gap(const TransferOperator& op);

// Sup-norm distances ||L^n a - mu(a)||_inf for a normalized operator, plus the
// fitted constant C in e_n <= C * gap^n * e_0.
struct ConvergenceReport {
    std::vector<double> sup_distances; // n = 0 .. steps
    double mean_value;                 // mu(a) under the Gibbs measure
    double gap;
    double rate_constant;
};

ConvergenceReport convergence_report(const TransferOperator& normalized_op,
                                     const CylinderFunction& a, int steps);

} // namespace thermoformal
