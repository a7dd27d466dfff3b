#pragma once

#include "thermoformal/cylinder.hpp"
#include "thermoformal/recode.hpp"
#include "thermoformal/subshift.hpp"

#include <optional>

namespace thermoformal {

// Nonnegative weights on the admissible words of a fixed depth; evaluation of
// cylinder functions of smaller or equal depth marginalizes over trailing
// symbols first (in ascending symbol order, so that dual_apply and integrate
// share their arithmetic exactly).
class CylinderMeasure {
public:
    CylinderMeasure(SubshiftSpec spec, int depth, std::vector<double> weights);

    static CylinderMeasure uniform(const SubshiftSpec& spec, int depth);

    const SubshiftSpec& spec() const { return spec_; }
    int depth() const { return table_.depth(); }
    std::size_t size() const { return weights_.size(); }
    const WordTable& table() const { return table_; }
    std::span<const int> word(std::size_t i) const { return table_.word(i); }
    std::span<const double> weights() const { return weights_; }
    double operator[](std::size_t i) const { return weights_[i]; }
    double weight(std::span<const int> w) const;

    double total() const;

    // Sum over the last symbol; depth decreases by one.
    CylinderMeasure marginalized_last() const;
    CylinderMeasure marginalized_to(int depth) const;

    // Integral of f (depth <= this->depth()) against the measure.
    double integrate(const CylinderFunction& f) const;

private:
    SubshiftSpec spec_;
    WordTable table_;
    std::vector<double> weights_;
};

// Ruelle transfer operator for a depth-2 potential. Deeper potentials are
// brought to depth 2 by higher-block recoding at build time; the operator then
// acts on functions over the recoded subshift (spec()).
//
// Matrix convention: B(i, j) = rho(i, j) when the transition i -> j is allowed,
// 0 otherwise. On depth-1 functions, (L f)(j) = sum_i B(i, j) f(i): preimages
// under the shift prepend a symbol.
class TransferOperator {
public:
    static TransferOperator build(const CylinderPotential& pot);

    const SubshiftSpec& spec() const { return spec_; }
    const CylinderPotential& rho() const { return rho_; }
    double matrix(int i, int j) const {
        return matrix_[static_cast<std::size_t>(i) * spec_.alphabet_size() + j];
    }
    const std::vector<double>& matrix_data() const { return matrix_; }
    const std::optional<Recoding>& recoding() const { return recoding_; }

private:
    TransferOperator(SubshiftSpec spec, CylinderPotential rho, std::optional<Recoding> rec);
    SubshiftSpec spec_;
    CylinderPotential rho_;
    std::vector<double> matrix_;
    std::optional<Recoding> recoding_;
};

// (L f)(x) = sum over preimages z of x of rho(z) f(z). Depth drops by one
// (floor 1).
CylinderFunction apply(const TransferOperator& op, const CylinderFunction& f);
CylinderFunction apply_n(const TransferOperator& op, const CylinderFunction& f, int n);

// alpha(f) = f o T: depth rises by one, value ignores the first coordinate.
CylinderFunction alpha_lift(const CylinderFunction& f);
CylinderFunction alpha_lift_n(const CylinderFunction& f, int n);

// Dual action on cylinder weights: (L* nu)(f) = nu(L f) for every f of the
// same depth. On depth-1 weights this is nu -> B nu.
CylinderMeasure dual_apply(const TransferOperator& op, const CylinderMeasure& nu);

} // namespace thermoformal
