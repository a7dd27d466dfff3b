#pragma once

#include "thermoformal/cylinder.hpp"
#include "thermoformal/subshift.hpp"

#include "json.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace thermoformal::cli {

/// A parsed and validated model file: subshift, potential, optional generator
/// data (from_H), optional seed and tolerance overrides, plus the canonical
/// JSON form used for digesting.
struct ModelConfig {
    SubshiftSpec spec;
    CylinderPotential potential;
    std::optional<CylinderFunction> H;  // set iff the potential kind is from_H
    double H_beta = 1.0;
    std::optional<std::uint64_t> seed;
    std::map<std::string, double> tolerances;
    nlohmann::json canonical;

    static ModelConfig from_json(const nlohmann::json& j);
    static ModelConfig load(const std::string& path);

  private:
    ModelConfig(SubshiftSpec s, CylinderPotential p)
        : spec(std::move(s)), potential(std::move(p)) {}
};

/// Canonical JSON dump: sorted object keys, inline arrays, doubles printed
/// with %.17g (lossless round-trip at 17 significant digits).
std::string dump_json(const nlohmann::json& j);

std::uint64_t fnv1a64(std::string_view s);

/// Full command-line entry point (argument parsing, dispatch, rendering).
/// Returns the process exit code: 0 success, 2 config error, 3 numerical
/// failure.
int run_main(int argc, char** argv);

} // namespace thermoformal::cli
