#pragma once

#include <iosfwd>
#include <string>

#include "spine/experiment_config.hpp"
#include "spine/mpc_loop.hpp"

namespace spine {

// Exit codes shared by the CLI: 0 success, 1 validation/config error,
// 2 aborted run (partial outputs written).
enum ExitCode { exit_ok = 0, exit_config_error = 1, exit_aborted = 2 };

struct ExperimentResult {
  int exit_code = exit_ok;
  SimulationLog log;
  TrackingMetrics metrics;
  std::string log_path;
  std::string metrics_path;
  std::string trajectory_path;
  std::string xz_path;
};

// Runs one experiment end to end: builds the bend trajectory, attaches the
// inverse-kinematics input reference when the controller needs one, runs the
// closed loop, and writes log.csv / metrics.txt / trajectory_ref.csv /
// xz_paths.csv into the output directory. Config errors surface as
// exceptions; an aborted run returns exit_aborted with partial outputs.
ExperimentResult run_experiment(const ExperimentConfig& config, std::ostream* diagnostics);

// Reference trajectory for a config, with u_ref attached when `with_inputs`.
ReferenceTrajectory build_reference(const ExperimentConfig& config, bool with_inputs);

void write_metrics_file(const ExperimentConfig& config, const SimulationLog& log,
                        const TrackingMetrics& metrics, double wall_seconds,
                        const std::string& path);

}  // namespace spine
