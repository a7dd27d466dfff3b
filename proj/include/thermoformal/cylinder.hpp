#pragma once

#include "thermoformal/subshift.hpp"

#include <functional>
#include <span>
#include <vector>

namespace thermoformal {

// Real-valued function depending on the first `depth` coordinates of a point,
// stored as one value per admissible word (lexicographic order).
class CylinderFunction {
public:
    CylinderFunction(SubshiftSpec spec, int depth, std::vector<double> values);

    static CylinderFunction constant(const SubshiftSpec& spec, int depth, double v);
    static CylinderFunction indicator(const SubshiftSpec& spec, std::span<const int> word);

    const SubshiftSpec& spec() const { return spec_; }
    int depth() const { return table_.depth(); }
    std::size_t size() const { return values_.size(); }
    const WordTable& table() const { return table_; }
    std::span<const int> word(std::size_t i) const { return table_.word(i); }
    std::span<const double> values() const { return values_; }
    std::vector<double>& mutable_values() { return values_; }
    double operator[](std::size_t i) const { return values_[i]; }

    // Value on (the cylinder of) an admissible word of length >= depth; only the
    // first `depth` symbols matter. Throws InadmissibleWordError otherwise.
    double value(std::span<const int> w) const;

    // Same function viewed at a deeper depth (value depends on the old prefix).
    CylinderFunction lifted_to(int new_depth) const;

    double min_value() const;
    double max_value() const;
    double sup_norm() const;

    CylinderFunction map(const std::function<double(double)>& f) const;

private:
    SubshiftSpec spec_;
    WordTable table_;
    std::vector<double> values_;
};

// Pointwise operations; operands are lifted to the larger depth first.
CylinderFunction multiply(const CylinderFunction& a, const CylinderFunction& b);
CylinderFunction divide(const CylinderFunction& a, const CylinderFunction& b);
CylinderFunction add(const CylinderFunction& a, const CylinderFunction& b);
CylinderFunction subtract(const CylinderFunction& a, const CylinderFunction& b);
CylinderFunction scale(const CylinderFunction& a, double c);
CylinderFunction map_log(const CylinderFunction& a);
CylinderFunction map_exp(const CylinderFunction& a);
CylinderFunction map_pow(const CylinderFunction& a, double e);
CylinderFunction reciprocal(const CylinderFunction& a);
double sup_distance(const CylinderFunction& a, const CylinderFunction& b);

// Indicators of all admissible words of depth 1..max_depth (spans the cylinder
// algebra up to that depth). Ordered by depth, then lexicographically.
std::vector<CylinderFunction> cylinder_basis(const SubshiftSpec& spec, int max_depth);

// Strictly positive weight function rho used by the transfer operator.
// Canonical depth is >= 2: depth-1 data is lifted by ignoring the second
// coordinate. Zero weights are not representable here; forbidden transitions
// belong in the SubshiftSpec.
class CylinderPotential {
public:
    // values are the weights rho themselves.
    static CylinderPotential from_weights(CylinderFunction rho);
    // values are A = log rho.
    static CylinderPotential from_log_weights(const CylinderFunction& a);
    // rho = H^(-beta); H must be strictly positive.
    static CylinderPotential from_H(const CylinderFunction& h, double beta);
    // A constant log-weight c, i.e. rho = e^c at depth 2.
    static CylinderPotential constant_log(const SubshiftSpec& spec, double a);

    const CylinderFunction& weights() const { return fn_; }
    CylinderFunction log_weights() const { return map_log(fn_); }
    const SubshiftSpec& spec() const { return fn_.spec(); }
    int depth() const { return fn_.depth(); }

private:
    explicit CylinderPotential(CylinderFunction fn) : fn_(std::move(fn)) {}
    CylinderFunction fn_;
};

} // namespace thermoformal
