#pragma once

#include <cstdint>
#include <random>

namespace thermoformal {

// Deterministic RNG wrapper. std::mt19937_64's output sequence is fixed by the
// standard, and the uniform transforms below avoid the implementation-defined
// std::uniform_*_distribution, so streams are reproducible across platforms.
class SplitRng {
public:
    explicit SplitRng(std::uint64_t seed, std::uint64_t stream = 0)
        : gen_(seed ^ (0x9e3779b97f4a7c15ULL * (stream + 1))) {}

    std::uint64_t next() { return gen_(); }

    // Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n). Modulo bias is negligible for small n.
    int uniform_int(int n) { return static_cast<int>(next() % static_cast<std::uint64_t>(n)); }

private:
    std::mt19937_64 gen_;
};

} // namespace thermoformal
