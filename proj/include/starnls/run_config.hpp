#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "starnls/field.hpp"
#include "starnls/params.hpp"
#include "starnls/propagator.hpp"
#include "starnls/stability.hpp"

namespace starnls {

/// Parameters of one CLI run. Loaded from TOML with the tables [model],
/// [grid], [propagation] and [task]; command-line flags override file values.
struct RunConfig {
  ModelParams model{};
  Grid grid{40.0, 0.01};

  double dt = 0.005;
  double horizon = 20.0;
  double tolerance = 1e-12;
  int max_iterations = 100;
  double wall_threshold = 1e-8;
  int sample_every = 10;

  std::optional<double> mass;
  std::optional<double> omega;
  double eps = 1e-2;
  double radius = 1e-2;
  int samples = 1000;
  std::uint64_t seed = 1;
  bool complex_perturbation = true;
  std::string output;

  PropagatorConfig propagator() const;
  StabilityConfig stability() const;
  /// Throws DomainError naming the first violated precondition.
  void validate() const;
};

/// Reads a TOML file on top of `base`. Unknown keys are rejected. Throws
/// DomainError on parse or type errors.
RunConfig load_run_config(const std::string& path, RunConfig base = {});
RunConfig parse_run_config(const std::string& toml_text, const std::string& source = "<string>",
                           RunConfig base = {});

/// JSON manifest of the configuration plus the command name, for reproducing a run.
std::string run_manifest_json(const RunConfig& cfg, const std::string& command);

}  // namespace starnls
