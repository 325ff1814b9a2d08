#include "spine/harness.hpp"

#include <chrono>
#include <filesystem>
#include <ostream>
#include <sstream>

#include "spine/csv.hpp"
#include "spine/inverse_kinematics.hpp"

namespace spine {

ReferenceTrajectory build_reference(const ExperimentConfig& config, bool with_inputs) {
  std::optional<double> margin;
  if (config.controller.kind == ControllerKind::smoothing)
    margin = config.controller.smoothing.w7;
  else
    margin = config.controller.reference.vertebra_height / 2.0;

  ReferenceTrajectory traj = generate_bend(config.spine, config.trajectory.sweep_angle,
                                           config.trajectory.duration, margin);
  if (with_inputs) {
    IkOptions ik;
    ik.max_rest_length = config.controller.kind == ControllerKind::smoothing
                             ? config.controller.smoothing.u_max
                             : config.controller.reference.u_max;
    traj.inputs.reserve(traj.states.size());
    for (size_t k = 0; k < traj.states.size(); ++k) {
      // Reference states repeat once the ramp ends; reuse the previous IK
      // solution for identical poses.
      if (k > 0 && traj.states[k] == traj.states[k - 1]) {
        traj.inputs.push_back(traj.inputs.back());
        continue;
      }
      Vec pose = traj.states[k];
      // The input reference is pseudo-static: zero the velocities.
      const int ps = config.spine.pose_size();
      const int bs = config.spine.state_block_size();
      for (int v = 0; v < config.spine.num_moving_vertebrae; ++v)
        pose.segment(v * bs + ps, ps).setZero();
      traj.inputs.push_back(ik_rest_lengths(config.spine, pose, ik));
    }
  }
  return traj;
}

void write_metrics_file(const ExperimentConfig& config, const SimulationLog& log,
                        const TrackingMetrics& metrics, double wall_seconds,
                        const std::string& path) {
  std::ostringstream out;
  out << "controller=" << to_string(config.controller.kind) << "\n";
  out << "steps=" << log.rows.size() << "\n";
  out << "dt=" << csv_number(config.spine.dt) << "\n";
  out << "sweep_angle=" << csv_number(config.trajectory.sweep_angle) << "\n";
  out << "duration=" << csv_number(config.trajectory.duration) << "\n";
  if (config.controller.kind == ControllerKind::reference) {
    const auto& rc = config.controller.reference;
    out << "N=" << rc.horizon << "\n";
    out << "u_min=" << csv_number(rc.u_min) << "\n";
    out << "u_max=" << csv_number(rc.u_max) << "\n";
    out << "h=" << csv_number(rc.vertebra_height) << "\n";
    auto diag = [](const Vec& d) {
      if (d.size() == 0) return std::string("default");
      bool uniform = true;
      for (int i = 1; i < d.size(); ++i) uniform &= d[i] == d[0];
      if (uniform) return csv_number(d[0]);
      std::string s;
      for (int i = 0; i < d.size(); ++i) s += (i ? ";" : "") + csv_number(d[i]);
      return s;
    };
    out << "Q=" << diag(rc.q_diag) << "\n";
    out << "P=" << diag(rc.p_diag) << "\n";
    out << "R=" << diag(rc.r_diag) << "\n";
  } else {
    const auto& sc = config.controller.smoothing;
    out << "N=" << sc.horizon << "\n";
    out << "u_min=" << csv_number(sc.u_min) << "\n";
    out << "u_max=" << csv_number(sc.u_max) << "\n";
    const double w[11] = {sc.w1, sc.w2, sc.w3, sc.w4, sc.w5, sc.w6,
                          sc.w7, sc.w8, sc.w9, sc.w10, sc.w11};
    for (int i = 0; i < 11; ++i) out << "w" << (i + 1) << "=" << csv_number(w[i]) << "\n";
  }
  out << "disturbance_enabled=" << (config.run.disturbance_enabled ? 1 : 0) << "\n";
  out << "seed=" << config.disturbance.seed << "\n";
  for (size_t v = 0; v < metrics.max_position_error.size(); ++v) {
    out << "max_pos_err_" << (v + 1) << "=" << csv_number(metrics.max_position_error[v]) << "\n";
    out << "mean_pos_err_" << (v + 1) << "=" << csv_number(metrics.mean_position_error[v])
        << "\n";
    out << "final_pos_err_" << (v + 1) << "=" << csv_number(metrics.final_position_error[v])
        << "\n";
  }
  out << "reference_amplitude=" << csv_number(metrics.reference_amplitude) << "\n";
  out << "transient_threshold=" << csv_number(metrics.transient_threshold) << "\n";
  out << "transient_steps=" << metrics.transient_steps << "\n";
  out << "input_bound_violations=" << metrics.input_bound_violations << "\n";
  out << "collision_violations=" << metrics.collision_violations << "\n";
  out << "qp_failures=" << log.qp_failures << "\n";
  out << "aborted=" << (log.aborted ? 1 : 0) << "\n";
  out << "wall_seconds=" << csv_number(wall_seconds) << "\n";
  atomic_write_file(path, out.str());
}

ExperimentResult run_experiment(const ExperimentConfig& config, std::ostream* diagnostics) {
  config.validate();
  const auto t0 = std::chrono::steady_clock::now();

  const bool needs_inputs = config.controller.kind == ControllerKind::reference;
  const ReferenceTrajectory traj = build_reference(config, needs_inputs);

  RunOptions options;
  options.steps = config.run.steps;
  options.solver = {config.run.solver_tol, config.run.solver_max_iter};
  options.consecutive_failure_limit = config.run.failure_limit;

  DisturbanceSpec disturbance = config.disturbance;
  if (!config.run.disturbance_enabled) disturbance = DisturbanceSpec{};

  SimulationLog log =
      run_closed_loop(config.spine, config.controller, traj, disturbance, options);
  const TrackingMetrics metrics = tracking_metrics(log);

  const double wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  namespace fs = std::filesystem;
  const fs::path dir(config.run.output_dir);
  fs::create_directories(dir);

  ExperimentResult result;
  result.log_path = (dir / "log.csv").string();
  result.metrics_path = (dir / "metrics.txt").string();
  result.trajectory_path = (dir / "trajectory_ref.csv").string();
  result.xz_path = (dir / "xz_paths.csv").string();

  write_log_csv(log, result.log_path);
  write_trajectory_csv(traj, result.trajectory_path);
  write_xz_paths_csv(log, result.xz_path);
  write_metrics_file(config, log, metrics, wall_seconds, result.metrics_path);

  if (diagnostics) {
    *diagnostics << "controller=" << to_string(config.controller.kind)
                 << " steps=" << log.rows.size() << " qp_failures=" << log.qp_failures
                 << (log.aborted ? " ABORTED" : "") << "\n";
    if (log.aborted) *diagnostics << "abort reason: " << log.abort_reason << "\n";
  }

  result.exit_code = log.aborted ? exit_aborted : exit_ok;
  result.log = std::move(log);
  result.metrics = metrics;
  return result;
}

}  // namespace spine
