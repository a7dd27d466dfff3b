#pragma once

#include <stdexcept>
#include <string>

namespace thermoformal {

// Base class for all domain errors thrown by the library. `code()` is a stable
// machine-readable identifier (the CLI surfaces it in error envelopes).
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& what)
        : std::runtime_error(what), code_(std::move(code)) {}
    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

struct NonPrimitiveError : Error {
    explicit NonPrimitiveError(const std::string& what = "transition matrix is not primitive")
        : Error("non_primitive", what) {}
};

struct NoConvergenceError : Error {
    NoConvergenceError(const std::string& what, double residual)
        : Error("no_convergence", what), last_residual(residual) {}
    double last_residual;
};

struct InadmissibleWordError : Error {
    explicit InadmissibleWordError(const std::string& what = "word is not admissible")
        : Error("inadmissible_word", what) {}
};

struct HNotExpandingError : Error {
    explicit HNotExpandingError(const std::string& what = "H must satisfy min H > 1")
        : Error("h_not_expanding", what) {}
};

struct DegenerateSystemError : Error {
    explicit DegenerateSystemError(const std::string& what = "system is degenerate")
        : Error("degenerate_system", what) {}
};

struct NotNormalizedError : Error {
    explicit NotNormalizedError(const std::string& what = "operator is not normalized")
        : Error("not_normalized", what) {}
};

struct OptimizerError : Error {
    OptimizerError(const std::string& what, double grad_norm, int iterations)
        : Error("optimizer_failure", what), final_grad_norm(grad_norm), iterations(iterations) {}
    double final_grad_norm;
    int iterations;
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& what) : Error("config", what) {}
};

} // namespace thermoformal
