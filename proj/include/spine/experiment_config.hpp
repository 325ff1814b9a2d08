#pragma once

#include <optional>
#include <string>

#include "spine/mpc_loop.hpp"
#include "spine/spine_config.hpp"
#include "spine/trajgen.hpp"

namespace spine {

struct TrajectorySettings {
  double sweep_angle = 0.3;  // rad
  double duration = 10.0;    // s
};

struct RunSettings {
  int steps = 10000;
  std::string output_dir = "out";
  double solver_tol = 1e-8;
  int solver_max_iter = 100;
  int failure_limit = 50;
  bool disturbance_enabled = false;
};

// Everything one experiment needs: the plant, both controller configs (the
// [run] section selects which one runs), the reference trajectory shape, the
// disturbance model and run housekeeping.
struct ExperimentConfig {
  SpineConfig spine;
  ControllerSetup controller;
  TrajectorySettings trajectory;
  DisturbanceSpec disturbance;
  RunSettings run;

  void validate() const;
};

// Built-in defaults for each controller scenario (planar reference tracking,
// spatial smoothing control).
ExperimentConfig default_experiment(ControllerKind kind);

ExperimentConfig load_experiment_config(const std::string& path);
ExperimentConfig parse_experiment_config(const std::string& text, const std::string& source);
std::string write_experiment_config(const ExperimentConfig& config);

// Command-line overrides; unset optionals leave the file values in place.
struct ExperimentOverrides {
  std::optional<ControllerKind> controller;
  std::optional<std::string> output_dir;
  std::optional<std::uint64_t> seed;
  std::optional<bool> disturbance;
  std::optional<int> steps;
};

void apply_overrides(ExperimentConfig& config, const ExperimentOverrides& overrides);

}  // namespace spine
