#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "fundtrack/pipeline.hpp"

namespace fundtrack {

std::string to_string(ProblemMode mode);
ProblemMode problem_mode_from_string(const std::string& s);

// Loads a flat `key = value` strategy file. `schema_version = 1` is
// mandatory; unknown keys are rejected so typos cannot silently fall back to
// defaults. The mode comes from the file's `mode` key or `mode_override`
// (they must agree when both are given) and selects the default set the
// remaining keys override. Throws ParseError or std::invalid_argument.
StrategyConfig load_strategy_config(
    const std::filesystem::path& path,
    std::optional<ProblemMode> mode_override = std::nullopt);

// Same contract, parsing from an in-memory string (`origin` labels errors).
StrategyConfig strategy_config_from_text(
    const std::string& text, const std::string& origin,
    std::optional<ProblemMode> mode_override = std::nullopt);

}  // namespace fundtrack
