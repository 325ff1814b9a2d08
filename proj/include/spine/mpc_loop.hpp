#pragma once

#include <optional>
#include <string>
#include <vector>

#include "spine/cftoc.hpp"
#include "spine/spine_config.hpp"
#include "spine/trajgen.hpp"
#include "spine/types.hpp"

namespace spine {

enum class ControllerKind { smoothing, reference };

const char* to_string(ControllerKind k);

struct ControllerSetup {
  ControllerKind kind = ControllerKind::reference;
  SmoothingControllerConfig smoothing;
  ReferenceControllerConfig reference;

  int horizon() const {
    return kind == ControllerKind::smoothing ? smoothing.horizon : reference.horizon;
  }
  double u_min() const {
    return kind == ControllerKind::smoothing ? smoothing.u_min : reference.u_min;
  }
  double u_max() const {
    return kind == ControllerKind::smoothing ? smoothing.u_max : reference.u_max;
  }
};

// One closed-loop step. `state` is the plant state the controller saw at
// this step (so it lines up with `ref_state` and the error columns);
// `input` is the input applied to move to the next step.
struct LogRow {
  int step = 0;
  double time = 0.0;
  QpStatus qp_status = QpStatus::max_iterations;
  bool qp_ok = false;  // false rows held the previous input
  int qp_iterations = 0;
  double qp_objective = 0.0;
  double qp_max_violation = 0.0;  // max inequality violation at the QP solution
  double lin_residual = 0.0;      // || A xi + B u_prev + c - f(xi, u_prev) ||_inf
  double model_mismatch = 0.0;    // || plant step - affine prediction ||_inf
  double wall_ms = 0.0;
  Vec input;
  Vec state;
  Vec ref_state;
  Vec ref_input;  // empty when the controller has no input reference
  std::vector<double> position_errors;  // per vertebra, m
  std::vector<double> angle_errors;     // per vertebra, rad
};

struct SimulationLog {
  ControllerKind controller = ControllerKind::reference;
  Dimension dimension = Dimension::planar2d;
  int num_vertebrae = 1;
  double dt = 0.0;
  double u_min = 0.0, u_max = 0.0;
  double collision_margin = 0.0;  // w7 (spatial) or h/2 (planar z floor)
  bool has_ref_inputs = false;
  std::vector<LogRow> rows;
  Vec final_state;
  int qp_failures = 0;
  bool aborted = false;
  std::string abort_reason;
};

struct RunOptions {
  int steps = 0;
  std::optional<Vec> initial_state;  // defaults to the first reference state
  std::optional<Vec> initial_input;  // u_{-1} for the first linearization; defaults to 0
  int consecutive_failure_limit = 50;
  QpSolverOptions solver{1e-8, 100};
  double fd_delta = 1e-6;
};

// Receding-horizon execution: linearize about (xi_t, u_{t-1}), build the
// selected CFTOC, solve, apply the first input to the nonlinear plant, add
// the disturbance, log. QP failures hold the previous input; too many
// consecutive failures abort with a partial log.
SimulationLog run_closed_loop(const SpineConfig& config, const ControllerSetup& setup,
                              const ReferenceTrajectory& traj, const DisturbanceSpec& disturbance,
                              const RunOptions& options);

struct TrackingMetrics {
  std::vector<double> max_position_error;
  std::vector<double> mean_position_error;
  std::vector<double> final_position_error;
  double transient_threshold = 0.0;  // m
  int transient_steps = -1;          // -1: error never settled below the threshold
  int input_bound_violations = 0;
  int collision_violations = 0;
  double reference_amplitude = 0.0;  // max reference excursion from its start, m
};

// Summary statistics over a log. The transient threshold defaults to 10% of
// the reference position amplitude; pass an absolute override if needed.
TrackingMetrics tracking_metrics(const SimulationLog& log,
                                 std::optional<double> threshold = std::nullopt);

// log.csv with a fixed column order (see docs/output_files.md). Per-row wall
// time is intentionally not written: logs of identical seeded runs must be
// byte-identical.
void write_log_csv(const SimulationLog& log, const std::string& path);

// Per-vertebra X-Z paths of plant and reference, for replotting.
void write_xz_paths_csv(const SimulationLog& log, const std::string& path);

}  // namespace spine
