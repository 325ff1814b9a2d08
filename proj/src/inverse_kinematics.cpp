#include "spine/inverse_kinematics.hpp"

#include <cmath>
#include <string>

#include "spine/spine_model.hpp"

namespace spine {

namespace {

inline double cross2(const Vec& r, const Vec& f) { return r[0] * f[1] - r[1] * f[0]; }

}  // namespace

ForceDensityProblem build_force_density_problem(const SpineConfig& config, const Vec& xi_ref,
                                                double min_force_density) {
  const bool planar = config.dimension == Dimension::planar2d;
  const int wd = config.workspace_dim();
  const int rows_per_body = planar ? 3 : 6;  // force balance + moment balance
  const int num_bodies = config.num_moving_vertebrae;
  const int num_cables = config.num_cables();

  const auto poses = body_poses(config, xi_ref);
  const auto cables = cable_endpoints(config, xi_ref);

  ForceDensityProblem problem;
  problem.min_force_density = min_force_density;
  problem.equilibrium = Mat::Zero(rows_per_body * num_bodies, num_cables);
  problem.load = Vec::Zero(rows_per_body * num_bodies);

  // Unit load: cables must carry each vertebra's weight.
  for (int v = 0; v < num_bodies; ++v)
    problem.load[v * rows_per_body + wd - 1] = config.vertebra_mass * config.gravity;

  auto add_cable_force = [&](int body, int cable, const Vec& at, const Vec& toward) {
    if (body == 0) return;  // base is fixed
    const int row = (body - 1) * rows_per_body;
    const Vec direction = toward - at;  // force per unit q
    problem.equilibrium.block(row, cable, wd, 1) += direction;
    const Vec arm = at - poses[body].position;
    if (planar) {
      problem.equilibrium(row + 2, cable) += cross2(arm, direction);
    } else {
      const Eigen::Vector3d moment = Eigen::Vector3d(arm).cross(Eigen::Vector3d(direction));
      problem.equilibrium.block(row + 3, cable, 3, 1) += moment;
    }
  };

  for (size_t i = 0; i < cables.size(); ++i) {
    const auto& c = cables[i];
    if (!(c.length > 0)) throw IkError("degenerate zero-length cable at this pose");
    add_cable_force(c.upper_body, static_cast<int>(i), c.moving, c.anchor);
    add_cable_force(c.lower_body, static_cast<int>(i), c.anchor, c.moving);
  }
  return problem;
}

Vec solve_force_density(const ForceDensityProblem& problem, const QpSolverOptions& options) {
  const int n = static_cast<int>(problem.equilibrium.cols());
  QpProblem qp;
  qp.h = 2.0 * Mat::Identity(n, n);
  qp.f = Vec::Zero(n);
  qp.a_eq = problem.equilibrium;
  qp.b_eq = problem.load;
  qp.a_ineq = -Mat::Identity(n, n);
  qp.b_ineq = Vec::Constant(n, -problem.min_force_density);

  const QpSolution sol = solve(qp, options);
  if (sol.status != QpStatus::optimal)
    throw IkError(std::string("force-density equilibrium is ") + to_string(sol.status) +
                  " at this pose");
  return sol.z;
}

Vec ik_rest_lengths(const SpineConfig& config, const Vec& xi_ref, const IkOptions& options) {
  const auto problem =
      build_force_density_problem(config, xi_ref, options.min_force_density);
  const Vec q = solve_force_density(problem, options.solver);
  const auto cables = cable_endpoints(config, xi_ref);

  Vec rest_lengths(config.input_size());
  for (int i = 0; i < rest_lengths.size(); ++i) {
    const double length = cables[i].length;
    const double tension = q[i] * length;
    const double rho = length - tension / config.cable_stiffness;
    if (!(rho > 0) || rho > options.max_rest_length)
      throw IkError("rest length " + std::to_string(rho) + " for cable " + std::to_string(i) +
                    " is outside (0, " + std::to_string(options.max_rest_length) + "]");
    rest_lengths[i] = rho;
  }
  return rest_lengths;
}

}  // namespace spine
