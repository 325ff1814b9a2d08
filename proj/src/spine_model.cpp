#include "spine/spine_model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace spine {

namespace {

void check_state_dim(const SpineConfig& config, const Vec& xi) {
  if (xi.size() != config.state_size())
    throw std::invalid_argument("state has dimension " + std::to_string(xi.size()) +
                                ", config expects " + std::to_string(config.state_size()));
}

void check_input_dim(const SpineConfig& config, const Vec& u) {
  if (u.size() != config.input_size())
    throw std::invalid_argument("input has dimension " + std::to_string(u.size()) +
                                ", config expects " + std::to_string(config.input_size()));
}

inline double cross2(const Vec& r, const Vec& f) { return r[0] * f[1] - r[1] * f[0]; }

}  // namespace

Mat rotation_matrix(const SpineConfig& config, const Vec& angles) {
  if (config.dimension == Dimension::planar2d) {
    const double c = std::cos(angles[0]), s = std::sin(angles[0]);
    Mat r(2, 2);
    r << c, -s, s, c;
    return r;
  }
  const double cr = std::cos(angles[0]), sr = std::sin(angles[0]);  // roll, about x
  const double cp = std::cos(angles[1]), sp = std::sin(angles[1]);  // pitch, about y
  const double cy = std::cos(angles[2]), sy = std::sin(angles[2]);  // yaw, about z
  Mat rx(3, 3), ry(3, 3), rz(3, 3);
  rx << 1, 0, 0, 0, cr, -sr, 0, sr, cr;
  ry << cp, 0, sp, 0, 1, 0, -sp, 0, cp;
  rz << cy, -sy, 0, sy, cy, 0, 0, 0, 1;
  return rz * ry * rx;
}

std::vector<BodyPose> body_poses(const SpineConfig& config, const Vec& xi) {
  check_state_dim(config, xi);
  const int wd = config.workspace_dim();
  const int ps = config.pose_size();
  const int bs = config.state_block_size();
  const int nang = ps - wd;

  std::vector<BodyPose> poses(config.num_moving_vertebrae + 1);
  poses[0].position = Vec::Zero(wd);
  poses[0].rotation = Mat::Identity(wd, wd);
  poses[0].velocity = Vec::Zero(wd);
  poses[0].angular_rate = Vec::Zero(nang);

  for (int v = 0; v < config.num_moving_vertebrae; ++v) {
    const auto block = xi.segment(v * bs, bs);
    BodyPose& p = poses[v + 1];
    p.position = block.head(wd);
    p.rotation = rotation_matrix(config, block.segment(wd, nang));
    p.velocity = block.segment(ps, wd);
    p.angular_rate = block.segment(ps + wd, nang);
  }
  return poses;
}

std::vector<CableAttachment> cable_endpoints(const SpineConfig& config, const Vec& xi) {
  const auto poses = body_poses(config, xi);
  std::vector<CableAttachment> cables;
  cables.reserve(config.num_cables());
  for (int pair = 0; pair < config.num_moving_vertebrae; ++pair) {
    const BodyPose& lower = poses[pair];
    const BodyPose& upper = poses[pair + 1];
    for (const auto& [lo, hi] : config.cable_routing) {
      CableAttachment c;
      c.lower_body = pair;
      c.upper_body = pair + 1;
      c.anchor = lower.position + lower.rotation * config.node_offsets[lo];
      c.moving = upper.position + upper.rotation * config.node_offsets[hi];
      c.length = (c.anchor - c.moving).norm();
      cables.push_back(std::move(c));
    }
  }
  return cables;
}

double cable_tension(double length, double length_rate, double rest_length,
                     const SpineConfig& config) {
  if (!(length > 0)) throw std::domain_error("cable length must be positive");
  if (rest_length < 0) throw std::domain_error("cable rest length must be nonnegative");
  const double t = config.cable_stiffness * (length - rest_length) +
                   config.cable_damping * length_rate;
  return t > 0 ? t : 0.0;
}

Vec dynamics(const SpineConfig& config, const Vec& xi, const Vec& u) {
  check_state_dim(config, xi);
  check_input_dim(config, u);

  const int wd = config.workspace_dim();
  const int ps = config.pose_size();
  const int bs = config.state_block_size();
  const int nang = ps - wd;
  const bool planar = config.dimension == Dimension::planar2d;
  const int bodies = config.num_moving_vertebrae + 1;

  const auto poses = body_poses(config, xi);

  // World velocity of a body-attached point.
  auto point_velocity = [&](const BodyPose& p, const Vec& world_arm) -> Vec {
    if (planar) {
      Vec v(2);
      v[0] = p.velocity[0] - p.angular_rate[0] * world_arm[1];
      v[1] = p.velocity[1] + p.angular_rate[0] * world_arm[0];
      return v;
    }
    const Eigen::Vector3d omega_world = p.rotation * p.angular_rate;
    return p.velocity + omega_world.cross(Eigen::Vector3d(world_arm)).eval();
  };

  std::vector<Vec> force(bodies, Vec::Zero(wd));
  std::vector<Vec> torque(bodies, Vec::Zero(planar ? 1 : 3));

  int cable_index = 0;
  for (int pair = 0; pair < config.num_moving_vertebrae; ++pair) {
    const BodyPose& lower = poses[pair];
    const BodyPose& upper = poses[pair + 1];
    for (const auto& [lo, hi] : config.cable_routing) {
      const Vec arm_lower = lower.rotation * config.node_offsets[lo];
      const Vec arm_upper = upper.rotation * config.node_offsets[hi];
      const Vec anchor = lower.position + arm_lower;
      const Vec moving = upper.position + arm_upper;
      const Vec span = anchor - moving;
      const double length = span.norm();
      if (!(length > 0)) throw std::domain_error("degenerate cable of zero length");
      const Vec unit = span / length;
      const double length_rate =
          unit.dot(point_velocity(lower, arm_lower) - point_velocity(upper, arm_upper));
      const double tension = cable_tension(length, length_rate, u[cable_index], config);
      ++cable_index;
      if (tension == 0.0) continue;

      const Vec f_upper = tension * unit;  // pulls the upper body toward the anchor
      force[pair + 1] += f_upper;
      force[pair] -= f_upper;
      if (planar) {
        torque[pair + 1][0] += cross2(arm_upper, f_upper);
        torque[pair][0] += cross2(arm_lower, -f_upper);
      } else {
        torque[pair + 1] += Eigen::Vector3d(arm_upper).cross(Eigen::Vector3d(f_upper)).eval();
        torque[pair] += Eigen::Vector3d(arm_lower).cross(Eigen::Vector3d(-f_upper)).eval();
      }
    }
  }

  Vec gravity_acc = Vec::Zero(wd);
  gravity_acc[wd - 1] = -config.gravity;

  Vec deriv(config.state_size());
  for (int v = 0; v < config.num_moving_vertebrae; ++v) {
    const BodyPose& p = poses[v + 1];
    const int base = v * bs;
    deriv.segment(base, wd) = p.velocity;
    deriv.segment(base + wd, nang) = p.angular_rate;
    deriv.segment(base + ps, wd) = force[v + 1] / config.vertebra_mass + gravity_acc;
    if (planar) {
      deriv[base + ps + wd] = torque[v + 1][0] / config.vertebra_inertia[0];
    } else {
      // Torque about the center in the body frame; per-axis principal inertia.
      const Vec torque_body = p.rotation.transpose() * torque[v + 1];
      deriv.segment(base + ps + wd, 3) =
          torque_body.cwiseQuotient(config.vertebra_inertia);
    }
  }
  return deriv;
}

Vec step(const SpineConfig& config, const Vec& xi, const Vec& u) {
  return xi + config.dt * dynamics(config, xi, u);
}

Vec home_state(const SpineConfig& config) {
  Vec xi = Vec::Zero(config.state_size());
  for (int v = 0; v < config.num_moving_vertebrae; ++v)
    xi[config.z_index(v)] = (v + 1) * config.vertebra_height;
  return xi;
}

double mechanical_energy(const SpineConfig& config, const Vec& xi, const Vec& u) {
  check_state_dim(config, xi);
  check_input_dim(config, u);
  const int wd = config.workspace_dim();
  const int ps = config.pose_size();
  const int bs = config.state_block_size();
  const bool planar = config.dimension == Dimension::planar2d;

  double e = 0.0;
  for (int v = 0; v < config.num_moving_vertebrae; ++v) {
    const auto block = xi.segment(v * bs, bs);
    const Vec vel = block.segment(ps, wd);
    const Vec ang = block.segment(ps + wd, ps - wd);
    e += 0.5 * config.vertebra_mass * vel.squaredNorm();
    if (planar) {
      e += 0.5 * config.vertebra_inertia[0] * ang[0] * ang[0];
    } else {
      e += 0.5 * ang.dot(config.vertebra_inertia.cwiseProduct(ang));
    }
    e += config.vertebra_mass * config.gravity * block[wd - 1];
  }
  const auto cables = cable_endpoints(config, xi);
  for (size_t i = 0; i < cables.size(); ++i) {
    const double stretch = cables[i].length - u[static_cast<int>(i)];
    if (stretch > 0) e += 0.5 * config.cable_stiffness * stretch * stretch;
  }
  return e;
}

}  // namespace spine
