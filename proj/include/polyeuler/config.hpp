#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "polyeuler/model.hpp"

namespace polyeuler {

struct LoadedProblem {
  SdeProblem problem;
  /// Non-fatal findings, e.g. the declared monotonicity constant failing a
  /// sampled spot check.
  std::vector<std::string> warnings;
};

/// Loads a scalar problem from a flat key = value file ("#" comments).
///
/// Keys: name, horizon, monotonicity, moment_order, drift (polynomial
/// coefficients, constant term first), sigma (constant or "intercept slope"),
/// initial ("point v" | "normal scale"), growth_scale + growth_exponent,
/// sigma_lipschitz (defaults to the sigma slope), jacobian_scale.
/// Unknown or duplicate keys, missing required entries, and malformed values
/// all throw ConfigError naming the offending line.
LoadedProblem load_problem_config(const std::filesystem::path& path);

/// Same grammar from an in-memory string; `origin` names it in errors.
LoadedProblem parse_problem_config(const std::string& text,
                                   const std::string& origin = "<string>");

}  // namespace polyeuler
