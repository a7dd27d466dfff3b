#include "thermoformal/transfer.hpp"

#include "thermoformal/errors.hpp"

#include <cmath>
#include <stdexcept>

namespace thermoformal {

CylinderMeasure::CylinderMeasure(SubshiftSpec spec, int depth, std::vector<double> weights)
    : spec_(std::move(spec)), table_(spec_, depth), weights_(std::move(weights)) {
    if (weights_.size() != table_.size())
        throw std::invalid_argument("weight count does not match the number of admissible words");
    for (double w : weights_)
        if (!(w >= 0.0) || !std::isfinite(w))
            throw std::invalid_argument("cylinder weights must be nonnegative and finite");
}

CylinderMeasure CylinderMeasure::uniform(const SubshiftSpec& spec, int depth) {
    WordTable table(spec, depth);
    return CylinderMeasure(spec, depth,
                           std::vector<double>(table.size(), 1.0 / static_cast<double>(table.size())));
}

double CylinderMeasure::weight(std::span<const int> w) const {
    std::size_t i = table_.find(w);
    if (i == WordTable::npos)
        throw InadmissibleWordError("word " + format_word(w) + " is not admissible");
    return weights_[i];
}

double CylinderMeasure::total() const {
    double s = 0.0;
    for (double w : weights_) s += w;
    return s;
}

CylinderMeasure CylinderMeasure::marginalized_last() const {
    if (depth() < 2)
        throw std::invalid_argument("cannot marginalize a depth-1 measure further");
    WordTable target(spec_, depth() - 1);
    std::vector<double> out(target.size(), 0.0);
    std::vector<int> ext(static_cast<std::size_t>(depth()));
    for (std::size_t i = 0; i < target.size(); ++i) {
        auto w = target.word(i);
        for (std::size_t t = 0; t < w.size(); ++t) ext[t] = w[t];
        double s = 0.0;
        for (int j : spec_.successors(w.back())) {
            ext.back() = j;
            s += weights_[table_.find(ext)];
        }
        out[i] = s;
    }
    return CylinderMeasure(spec_, depth() - 1, std::move(out));
}

CylinderMeasure CylinderMeasure::marginalized_to(int target_depth) const {
    if (target_depth > depth())
        throw std::invalid_argument("cannot marginalize to a larger depth");
    CylinderMeasure m = *this;
    while (m.depth() > target_depth) m = m.marginalized_last();
    return m;
}

double CylinderMeasure::integrate(const CylinderFunction& f) const {
    if (f.spec() != spec_)
        throw std::invalid_argument("function and measure live on different subshifts");
    if (f.depth() > depth())
        throw std::invalid_argument("function depth exceeds measure depth");
    if (f.depth() == depth()) {
        double s = 0.0;
        for (std::size_t i = 0; i < weights_.size(); ++i) s += weights_[i] * f[i];
        return s;
    }
    return marginalized_to(f.depth()).integrate(f);
}

TransferOperator::TransferOperator(SubshiftSpec spec, CylinderPotential rho, std::optional<Recoding> rec)
    : spec_(std::move(spec)), rho_(std::move(rho)), recoding_(std::move(rec)) {
    const int d = spec_.alphabet_size();
    matrix_.assign(static_cast<std::size_t>(d) * d, 0.0);
    Word pair(2);
    for (int i = 0; i < d; ++i)
        for (int j : spec_.successors(i)) {
            pair[0] = i;
            pair[1] = j;
            matrix_[static_cast<std::size_t>(i) * d + j] = rho_.weights().value(pair);
        }
}

TransferOperator TransferOperator::build(const CylinderPotential& pot) {
    if (pot.depth() == 2)
        return TransferOperator(pot.spec(), pot, std::nullopt);
    RecodeResult rec = higher_block_recode(pot.spec(), pot);
    SubshiftSpec recoded = rec.recoding.recoded;
    return TransferOperator(std::move(recoded), std::move(rec.potential), std::move(rec.recoding));
}

CylinderFunction apply(const TransferOperator& op, const CylinderFunction& f) {
    if (f.spec() != op.spec())
        throw std::invalid_argument("function does not live on the operator's subshift");
    const SubshiftSpec& spec = op.spec();
    const int k = f.depth();
    const int out_depth = std::max(k - 1, 1);
    WordTable target(spec, out_depth);
    std::vector<double> out(target.size(), 0.0);

    if (k == 1) {
        // (L f)(j) = sum_i B(i, j) f(i), ascending i.
        for (std::size_t jj = 0; jj < target.size(); ++jj) {
            int j = target.word(jj)[0];
            double s = 0.0;
            for (int i : spec.predecessors(j)) s += op.matrix(i, j) * f[i];
            out[jj] = s;
        }
    } else {
        // (L f)(y) = sum over predecessors a of y_0 of B(a, y_0) f(a, y_0, ..., y_{k-2}).
        std::vector<int> z(static_cast<std::size_t>(k));
        for (std::size_t yy = 0; yy < target.size(); ++yy) {
            auto y = target.word(yy);
            for (int t = 0; t + 1 < k; ++t) z[static_cast<std::size_t>(t) + 1] = y[t];
            double s = 0.0;
            for (int a : spec.predecessors(y[0])) {
                z[0] = a;
                s += op.matrix(a, y[0]) * f.value(z);
            }
            out[yy] = s;
        }
    }
    return CylinderFunction(spec, out_depth, std::move(out));
}

CylinderFunction apply_n(const TransferOperator& op, const CylinderFunction& f, int n) {
    CylinderFunction g = f;
    for (int i = 0; i < n; ++i) g = apply(op, g);
    return g;
}

CylinderFunction alpha_lift(const CylinderFunction& f) {
    const SubshiftSpec& spec = f.spec();
    WordTable target(spec, f.depth() + 1);
    std::vector<double> out(target.size());
    for (std::size_t i = 0; i < target.size(); ++i) {
        auto w = target.word(i);
        out[i] = f.value(w.subspan(1));
    }
    return CylinderFunction(spec, f.depth() + 1, std::move(out));
}

CylinderFunction alpha_lift_n(const CylinderFunction& f, int n) {
    CylinderFunction g = f;
    for (int i = 0; i < n; ++i) g = alpha_lift(g);
    return g;
}

CylinderMeasure dual_apply(const TransferOperator& op, const CylinderMeasure& nu) {
    if (nu.spec() != op.spec())
        throw std::invalid_argument("measure does not live on the operator's subshift");
    const SubshiftSpec& spec = op.spec();
    const int d = spec.alphabet_size();
    const int n = nu.depth();

    if (n == 1) {
        std::vector<double> out(static_cast<std::size_t>(d), 0.0);
        for (int i = 0; i < d; ++i) {
            double s = 0.0;
            for (int j : spec.successors(i)) s += op.matrix(i, j) * nu[static_cast<std::size_t>(j)];
            out[static_cast<std::size_t>(i)] = s;
        }
        return CylinderMeasure(spec, 1, std::move(out));
    }

    // (L* nu)[z] = B(z_0, z_1) * sum_j nu[z_1 ... z_{n-1} j]; the inner sum is
    // the last-symbol marginal of nu evaluated at the shifted word.
    CylinderMeasure marg = nu.marginalized_last();
    WordTable target(spec, n);
    std::vector<double> out(target.size());
    for (std::size_t i = 0; i < target.size(); ++i) {
        auto z = target.word(i);
        out[i] = op.matrix(z[0], z[1]) * marg.weight(z.subspan(1));
    }
    return CylinderMeasure(spec, n, std::move(out));
}

} // namespace thermoformal
