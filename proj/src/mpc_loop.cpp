#include "spine/mpc_loop.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include "spine/csv.hpp"
#include "spine/linearization.hpp"
#include "spine/spine_model.hpp"

namespace spine {

const char* to_string(ControllerKind k) {
  return k == ControllerKind::smoothing ? "smoothing" : "reference";
}

namespace {

double max_inequality_violation(const QpProblem& qp, const Vec& z) {
  if (qp.num_ineq() == 0) return 0.0;
  return std::max(0.0, (qp.a_ineq * z - qp.b_ineq).maxCoeff());
}

void fill_errors(const SpineConfig& config, const Vec& xi, const Vec& ref, LogRow& row) {
  const int wd = config.workspace_dim();
  const int ps = config.pose_size();
  const int bs = config.state_block_size();
  for (int v = 0; v < config.num_moving_vertebrae; ++v) {
    const int base = v * bs;
    row.position_errors.push_back((xi.segment(base, wd) - ref.segment(base, wd)).norm());
    row.angle_errors.push_back(
        (xi.segment(base + wd, ps - wd) - ref.segment(base + wd, ps - wd)).norm());
  }
}

}  // namespace

SimulationLog run_closed_loop(const SpineConfig& config, const ControllerSetup& setup,
                              const ReferenceTrajectory& traj, const DisturbanceSpec& disturbance,
                              const RunOptions& options) {
  config.validate();
  if (traj.size() == 0) throw std::invalid_argument("run_closed_loop: empty trajectory");
  if (setup.kind == ControllerKind::reference && !traj.has_inputs())
    throw std::invalid_argument(
        "run_closed_loop: the reference controller needs an input reference trajectory");

  const int n = config.state_size();
  const int m = config.input_size();
  const int horizon = setup.horizon();

  SimulationLog log;
  log.controller = setup.kind;
  log.dimension = config.dimension;
  log.num_vertebrae = config.num_moving_vertebrae;
  log.dt = config.dt;
  log.u_min = setup.u_min();
  log.u_max = setup.u_max();
  log.collision_margin = setup.kind == ControllerKind::smoothing
                             ? setup.smoothing.w7
                             : setup.reference.vertebra_height / 2.0;
  log.has_ref_inputs = traj.has_inputs();
  log.rows.reserve(options.steps);

  Vec xi = options.initial_state.value_or(traj.state_at(0));
  Vec u_prev = options.initial_input.value_or(Vec::Zero(m));
  if (xi.size() != n || u_prev.size() != m)
    throw std::invalid_argument("run_closed_loop: initial state/input dimension mismatch");

  std::optional<Vec> warm_start;
  int consecutive_failures = 0;

  for (int t = 0; t < options.steps; ++t) {
    const auto wall_start = std::chrono::steady_clock::now();

    const AffineModel model = linearize(config, xi, u_prev, options.fd_delta);

    std::vector<Vec> ref_window;
    ref_window.reserve(horizon + 1);
    for (int k = 0; k <= horizon; ++k) ref_window.push_back(traj.state_at(t + k));

    CftocProblem problem;
    if (setup.kind == ControllerKind::smoothing) {
      problem = build_smoothing_cftoc(model, xi, u_prev, ref_window, setup.smoothing);
    } else {
      std::vector<Vec> u_window;
      u_window.reserve(horizon);
      for (int k = 0; k < horizon; ++k) u_window.push_back(traj.input_at(t + k));
      problem = build_reference_cftoc(model, xi, ref_window, u_window, setup.reference);
    }

    LogRow row;
    row.step = t;
    row.time = t * config.dt;
    row.state = xi;
    row.ref_state = ref_window.front();
    if (traj.has_inputs()) row.ref_input = traj.input_at(t);
    row.lin_residual =
        (model.predict(xi, u_prev) - step(config, xi, u_prev)).cwiseAbs().maxCoeff();
    fill_errors(config, xi, row.ref_state, row);

    Vec u_applied;
    if (problem.trivially_infeasible) {
      row.qp_status = QpStatus::infeasible;
      row.qp_ok = false;
    } else {
      if (warm_start && warm_start->size() != problem.num_vars()) warm_start.reset();
      const QpSolution sol = solve(problem.qp, options.solver, warm_start);
      row.qp_status = sol.status;
      row.qp_iterations = sol.iterations;
      row.qp_ok = sol.status == QpStatus::optimal;
      if (row.qp_ok) {
        const HorizonSolution plan = problem.to_horizon_solution(sol);
        row.qp_objective = plan.objective;
        row.qp_max_violation = max_inequality_violation(problem.qp, sol.z);
        u_applied = extract_first_input(plan);
        warm_start = sol.z;
      }
    }

    if (!row.qp_ok) {
      ++log.qp_failures;
      ++consecutive_failures;
      u_applied = u_prev;  // recovery: hold the last input
      warm_start.reset();
    } else {
      consecutive_failures = 0;
    }
    row.input = u_applied;

    const Vec predicted = model.predict(xi, u_applied);
    Vec next = step(config, xi, u_applied);
    row.model_mismatch = (next - predicted).cwiseAbs().maxCoeff();
    next = apply_disturbance(config, next, disturbance, t);

    row.wall_ms = std::chrono::duration<double, std::milli>(
                      std::chrono::steady_clock::now() - wall_start)
                      .count();
    log.rows.push_back(std::move(row));

    xi = next;
    u_prev = u_applied;

    if (consecutive_failures > options.consecutive_failure_limit) {
      log.aborted = true;
      log.abort_reason = "QP failed " + std::to_string(consecutive_failures) +
                         " consecutive times at step " + std::to_string(t);
      break;
    }
  }
  log.final_state = xi;
  return log;
}

TrackingMetrics tracking_metrics(const SimulationLog& log, std::optional<double> threshold) {
  TrackingMetrics metrics;
  const int b = log.num_vertebrae;
  metrics.max_position_error.assign(b, 0.0);
  metrics.mean_position_error.assign(b, 0.0);
  metrics.final_position_error.assign(b, 0.0);
  if (log.rows.empty()) {
    metrics.transient_threshold = threshold.value_or(0.0);
    metrics.transient_steps = 0;
    return metrics;
  }

  const int wd = log.dimension == Dimension::planar2d ? 2 : 3;
  const int bs = log.dimension == Dimension::planar2d ? 6 : 12;

  for (const LogRow& row : log.rows) {
    for (int v = 0; v < b; ++v) {
      const double e = row.position_errors[v];
      metrics.max_position_error[v] = std::max(metrics.max_position_error[v], e);
      metrics.mean_position_error[v] += e / static_cast<double>(log.rows.size());
    }
    // Applied inputs must respect the box; plant states must respect the
    // collision bounds.
    const double tol = 1e-9;
    if (row.input.size() > 0 &&
        (row.input.minCoeff() < log.u_min - tol || row.input.maxCoeff() > log.u_max + tol))
      ++metrics.input_bound_violations;
    if (log.dimension == Dimension::planar2d) {
      if (row.state[1] < log.collision_margin - tol) ++metrics.collision_violations;
    } else {
      for (int v = 0; v + 1 < b; ++v) {
        const double gap = row.state[(v + 1) * bs + 2] - row.state[v * bs + 2];
        if (gap < log.collision_margin - tol) ++metrics.collision_violations;
      }
    }
  }
  for (int v = 0; v < b; ++v)
    metrics.final_position_error[v] = log.rows.back().position_errors[v];

  // Reference excursion from its starting pose, used for the default
  // transient threshold.
  const Vec& ref0 = log.rows.front().ref_state;
  for (const LogRow& row : log.rows) {
    for (int v = 0; v < b; ++v) {
      const double d =
          (row.ref_state.segment(v * bs, wd) - ref0.segment(v * bs, wd)).norm();
      metrics.reference_amplitude = std::max(metrics.reference_amplitude, d);
    }
  }
  metrics.transient_threshold = threshold.value_or(0.1 * metrics.reference_amplitude);

  metrics.transient_steps = -1;
  for (int t = static_cast<int>(log.rows.size()) - 1; t >= 0; --t) {
    double worst = 0.0;
    for (int v = 0; v < b; ++v) worst = std::max(worst, log.rows[t].position_errors[v]);
    if (worst > metrics.transient_threshold) {
      if (t + 1 < static_cast<int>(log.rows.size())) metrics.transient_steps = t + 1;
      break;
    }
    if (t == 0) metrics.transient_steps = 0;  // never above the threshold
  }
  return metrics;
}

void write_log_csv(const SimulationLog& log, const std::string& path) {
  std::ostringstream out;
  const int n = log.rows.empty() ? 0 : static_cast<int>(log.rows.front().state.size());
  const int m = log.rows.empty() ? 0 : static_cast<int>(log.rows.front().input.size());
  const int b = log.num_vertebrae;

  out << "step,time,qp_status,qp_iterations,qp_objective,qp_max_violation,lin_residual,"
         "model_mismatch";
  for (int v = 1; v <= b; ++v) out << ",err_pos_" << v;
  for (int v = 1; v <= b; ++v) out << ",err_ang_" << v;
  for (int i = 0; i < m; ++i) out << ",u" << i;
  for (int i = 0; i < n; ++i) out << ",xi" << i;
  for (int i = 0; i < n; ++i) out << ",ref" << i;
  if (log.has_ref_inputs)
    for (int i = 0; i < m; ++i) out << ",uref" << i;
  out << "\n";

  for (const LogRow& row : log.rows) {
    out << row.step << "," << csv_number(row.time) << "," << to_string(row.qp_status) << ","
        << row.qp_iterations << "," << csv_number(row.qp_objective) << ","
        << csv_number(row.qp_max_violation) << "," << csv_number(row.lin_residual) << ","
        << csv_number(row.model_mismatch);
    for (double e : row.position_errors) out << "," << csv_number(e);
    for (double e : row.angle_errors) out << "," << csv_number(e);
    for (int i = 0; i < m; ++i) out << "," << csv_number(row.input[i]);
    for (int i = 0; i < n; ++i) out << "," << csv_number(row.state[i]);
    for (int i = 0; i < n; ++i) out << "," << csv_number(row.ref_state[i]);
    if (log.has_ref_inputs)
      for (int i = 0; i < m; ++i) out << "," << csv_number(row.ref_input[i]);
    out << "\n";
  }
  atomic_write_file(path, out.str());
}

void write_xz_paths_csv(const SimulationLog& log, const std::string& path) {
  std::ostringstream out;
  const int b = log.num_vertebrae;
  const int bs = log.dimension == Dimension::planar2d ? 6 : 12;
  const int zoff = log.dimension == Dimension::planar2d ? 1 : 2;

  out << "time";
  for (int v = 1; v <= b; ++v) out << ",x_" << v << ",z_" << v;
  for (int v = 1; v <= b; ++v) out << ",ref_x_" << v << ",ref_z_" << v;
  out << "\n";
  for (const LogRow& row : log.rows) {
    out << csv_number(row.time);
    for (int v = 0; v < b; ++v)
      out << "," << csv_number(row.state[v * bs]) << ","
          << csv_number(row.state[v * bs + zoff]);
    for (int v = 0; v < b; ++v)
      out << "," << csv_number(row.ref_state[v * bs]) << ","
          << csv_number(row.ref_state[v * bs + zoff]);
    out << "\n";
  }
  atomic_write_file(path, out.str());
}

}  // namespace spine
