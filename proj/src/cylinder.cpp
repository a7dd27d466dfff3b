#include "thermoformal/cylinder.hpp"

#include "thermoformal/errors.hpp"

#include <cmath>
#include <stdexcept>

namespace thermoformal {

CylinderFunction::CylinderFunction(SubshiftSpec spec, int depth, std::vector<double> values)
    : spec_(std::move(spec)), table_(spec_, depth), values_(std::move(values)) {
    if (values_.size() != table_.size())
        throw std::invalid_argument("value count does not match the number of admissible words");
}

CylinderFunction CylinderFunction::constant(const SubshiftSpec& spec, int depth, double v) {
    WordTable table(spec, depth);
    return CylinderFunction(spec, depth, std::vector<double>(table.size(), v));
}

CylinderFunction CylinderFunction::indicator(const SubshiftSpec& spec, std::span<const int> word) {
    spec.require_admissible(word);
    CylinderFunction f = constant(spec, static_cast<int>(word.size()), 0.0);
    std::size_t i = f.table_.find(word);
    f.values_[i] = 1.0;
    return f;
}

double CylinderFunction::value(std::span<const int> w) const {
    if (static_cast<int>(w.size()) < depth())
        throw InadmissibleWordError("word shorter than cylinder depth");
    spec_.require_admissible(w);
    std::size_t i = table_.find(w.subspan(0, static_cast<std::size_t>(depth())));
    if (i == WordTable::npos)
        throw InadmissibleWordError("word " + format_word(w) + " is not admissible");
    return values_[i];
}

CylinderFunction CylinderFunction::lifted_to(int new_depth) const {
    if (new_depth == depth()) return *this;
    if (new_depth < depth())
        throw std::invalid_argument("cannot lift a cylinder function to a smaller depth");
    WordTable target(spec_, new_depth);
    std::vector<double> vals(target.size());
    for (std::size_t i = 0; i < target.size(); ++i) {
        auto w = target.word(i);
        std::size_t j = table_.find(w.subspan(0, static_cast<std::size_t>(depth())));
        vals[i] = values_[j];
    }
    return CylinderFunction(spec_, new_depth, std::move(vals));
}

double CylinderFunction::min_value() const {
    double m = values_.empty() ? 0.0 : values_[0];
    for (double v : values_)
        if (v < m) m = v;
    return m;
}

double CylinderFunction::max_value() const {
    double m = values_.empty() ? 0.0 : values_[0];
    for (double v : values_)
        if (v > m) m = v;
    return m;
}

double CylinderFunction::sup_norm() const {
    double m = 0.0;
    for (double v : values_)
        if (std::abs(v) > m) m = std::abs(v);
    return m;
}

CylinderFunction CylinderFunction::map(const std::function<double(double)>& f) const {
    std::vector<double> vals(values_.size());
    for (std::size_t i = 0; i < values_.size(); ++i) vals[i] = f(values_[i]);
    return CylinderFunction(spec_, depth(), std::move(vals));
}

namespace {

void require_same_spec(const CylinderFunction& a, const CylinderFunction& b) {
    if (a.spec() != b.spec())
        throw std::invalid_argument("cylinder functions live on different subshifts");
}

template <typename Op>
CylinderFunction zip(const CylinderFunction& a, const CylinderFunction& b, Op op) {
    require_same_spec(a, b);
    int depth = std::max(a.depth(), b.depth());
    CylinderFunction la = a.lifted_to(depth);
    CylinderFunction lb = b.lifted_to(depth);
    std::vector<double> vals(la.size());
    for (std::size_t i = 0; i < la.size(); ++i) vals[i] = op(la[i], lb[i]);
    return CylinderFunction(a.spec(), depth, std::move(vals));
}

} // namespace

CylinderFunction multiply(const CylinderFunction& a, const CylinderFunction& b) {
    return zip(a, b, [](double x, double y) { return x * y; });
}

CylinderFunction divide(const CylinderFunction& a, const CylinderFunction& b) {
    return zip(a, b, [](double x, double y) { return x / y; });
}

CylinderFunction add(const CylinderFunction& a, const CylinderFunction& b) {
    return zip(a, b, [](double x, double y) { return x + y; });
}

CylinderFunction subtract(const CylinderFunction& a, const CylinderFunction& b) {
    return zip(a, b, [](double x, double y) { return x - y; });
}

CylinderFunction scale(const CylinderFunction& a, double c) {
    return a.map([c](double x) { return c * x; });
}

CylinderFunction map_log(const CylinderFunction& a) {
    return a.map([](double x) { return std::log(x); });
}

CylinderFunction map_exp(const CylinderFunction& a) {
    return a.map([](double x) { return std::exp(x); });
}

CylinderFunction map_pow(const CylinderFunction& a, double e) {
    return a.map([e](double x) { return std::pow(x, e); });
}

CylinderFunction reciprocal(const CylinderFunction& a) {
    return a.map([](double x) { return 1.0 / x; });
}

double sup_distance(const CylinderFunction& a, const CylinderFunction& b) {
    return subtract(a, b).sup_norm();
}

std::vector<CylinderFunction> cylinder_basis(const SubshiftSpec& spec, int max_depth) {
    std::vector<CylinderFunction> basis;
    for (int depth = 1; depth <= max_depth; ++depth) {
        for (const auto& w : admissible_words(spec, depth))
            basis.push_back(CylinderFunction::indicator(spec, w));
    }
    return basis;
}

CylinderPotential CylinderPotential::from_weights(CylinderFunction rho) {
    for (double v : rho.values()) {
        if (!(v > 0.0) || !std::isfinite(v))
            throw std::invalid_argument(
                "potential weights must be strictly positive and finite; "
                "express forbidden transitions through the transition matrix");
    }
    if (rho.depth() < 2) rho = rho.lifted_to(2);
    return CylinderPotential(std::move(rho));
}

CylinderPotential CylinderPotential::from_log_weights(const CylinderFunction& a) {
    return from_weights(map_exp(a));
}

CylinderPotential CylinderPotential::from_H(const CylinderFunction& h, double beta) {
    for (double v : h.values())
        if (!(v > 0.0) || !std::isfinite(v))
            throw std::invalid_argument("H must be strictly positive and finite");
    return from_weights(map_pow(h, -beta));
}

CylinderPotential CylinderPotential::constant_log(const SubshiftSpec& spec, double a) {
    return from_weights(CylinderFunction::constant(spec, 2, std::exp(a)));
}

} // namespace thermoformal
