#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lcklab/types.hpp"

namespace lcklab {

struct ShellConfig {
  enum class Type { Sphere, Ellipsoid, Lyapunov };
  Type type = Type::Sphere;
  std::optional<MatC> P;   // ellipsoid only
};

struct SamplingConfig {
  std::size_t count = 200;
  double t_min = -1.0;
  double t_max = 1.0;
  std::uint64_t seed = 0;
  /// Sample budget for the expensive pointwise checks (power identity,
  /// LCK identity, pullback, ...); the first min(count, subsample) points.
  std::size_t subsample = 100;
};

struct RunConfig {
  int n = 0;
  MatC A;
  ShellConfig shell;
  std::optional<double> lambda;      // nullopt means "auto"
  double lambda_lo = 1e-1;           // find_min_lambda bracket
  double lambda_hi = 1e3;
  SamplingConfig sampling;
  ToleranceProfile tolerances;
  std::vector<std::string> checks;   // empty: every known check
  bool slow = false;
};

/// Names accepted in RunConfig::checks, in pipeline order. An empty list
/// runs all of them; lee_parallel is reported inapplicable unless slow.
const std::vector<std::string>& known_checks();

/// Parse from JSON text. Throws LckError(InvalidConfig).
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

/// Canonical JSON value of a config (used for the report echo).
std::string config_to_json(const RunConfig& cfg);

std::string_view to_string(ShellConfig::Type t);

}  // namespace lcklab
