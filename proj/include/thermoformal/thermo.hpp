#pragma once

#include "thermoformal/cylinder.hpp"
#include "thermoformal/spectral.hpp"
#include "thermoformal/transfer.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace thermoformal {

/// Topological pressure of the potential: log of the Perron eigenvalue of its
/// transfer operator (the potential is recoded to depth 2 first if needed).
double pressure(const CylinderPotential& pot);

/// Shannon entropy rate of an order-1 Markov measure:
/// h = -sum_{i,j} p_i P(i,j) log P(i,j), with 0 log 0 = 0.
double entropy_oracle(const MarkovMeasure& mu);

struct OptimizerDiagnostics {
    int iterations = 0;
    int restarts = 1;
    double final_grad_norm = 0.0;
    bool converged = false;
    int evaluations = 0;
};

struct VariationalResult {
    double value = 0.0;
    int depth = 1;
    /// Optimal positive cylinder function (inf side), when applicable.
    std::optional<CylinderFunction> minimizer;
    /// Maximizing Markov measure (sup side), when applicable.
    std::optional<MarkovMeasure> maximizer;
    OptimizerDiagnostics diagnostics;
    /// Largest objective value seen across all outer evaluations (min-max only;
    /// equals `value` on the inf side).
    double max_intermediate_value = 0.0;
};

/// Value and gradient of the entropy objective
///   J(t) = sum_y mu[y] log (L_rho e^t)(y) - sum_x mu[x] t(x) - int log rho dmu
/// over log-coordinates t of a positive depth-k cylinder function a = e^t.
struct EntropyObjectiveEval {
    double value = 0.0;
    std::vector<double> gradient;
};

EntropyObjectiveEval entropy_objective(const MarkovMeasure& mu, const CylinderPotential& rho,
                                       int depth, std::span<const double> t);

/// Minimize the entropy objective over strictly positive depth-k cylinder
/// functions. Returns J_k*, which is nonincreasing in k and always >= h(mu).
VariationalResult entropy_variational(const MarkovMeasure& mu, const CylinderPotential& rho,
                                      int depth);

struct RhoIndependenceResult {
    VariationalResult with_rho;
    VariationalResult with_rho_prime;
};

/// Computes J* with rho at depth k and with rho' at the smallest depth k' that
/// makes the competitor classes correspond under a' = a rho / rho'.
RhoIndependenceResult entropy_rho_independence_check(const MarkovMeasure& mu,
                                                     const CylinderPotential& rho,
                                                     const CylinderPotential& rho_prime,
                                                     int depth);

/// Min-max pressure: outer maximization over order-1 Markov measures on the
/// transition support (softmax coordinates, stationary vector recomputed per
/// evaluation), inner infimum over positive depth-k functions of
/// int log(L f / f) dmu. Approaches pressure(pot) from below.
VariationalResult pressure_minmax(const CylinderPotential& pot, int depth, int restarts,
                                  std::uint64_t seed);

struct EquilibriumCheck {
    double lhs = 0.0;     // h(mu) + int log b dmu
    double p_of_b = 0.0;  // pressure(b)
    double gap = 0.0;     // p_of_b - lhs (>= -1e-8 always)
};

EquilibriumCheck equilibrium_check(const MarkovMeasure& mu, const CylinderPotential& b);

struct BowenResult {
    double beta = 0.0;
    int iterations = 0;
    double pressure_at_beta = 0.0;
    bool used_log_space = false;
};

/// Unique root of beta |-> P(-beta log H) for min H > 1. For beta > 50 the
/// weight matrix is assembled in log-space with log-sum-exp reductions.
BowenResult bowen_root(const CylinderFunction& H, double tol = 1e-10);

} // namespace thermoformal
