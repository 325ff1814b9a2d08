#include "spine/trajgen.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "spine/csv.hpp"

namespace spine {

namespace {

// Arc placement of one vertebra at backbone fraction c of a bend angle beta:
// position on the circle of radius L/beta, tangent rotated by c*beta.
// Series forms take over near beta = 0 where the closed forms cancel.
struct ArcPoint {
  double x, z;        // world position, bend toward -x
  double dx, dz;      // derivatives w.r.t. beta
};

ArcPoint arc_point(double spine_length, double c, double beta) {
  ArcPoint p;
  const double cb = c * beta;
  if (std::abs(beta) < 1e-3) {
    p.x = -spine_length * (c * c * beta / 2.0 - std::pow(c, 4) * std::pow(beta, 3) / 24.0);
    p.dx = -spine_length * (c * c / 2.0 - std::pow(c, 4) * beta * beta / 8.0);
    p.z = spine_length * (c - c * c * c * beta * beta / 6.0);
    p.dz = spine_length * (-std::pow(c, 3) * beta / 3.0 + std::pow(c, 5) * std::pow(beta, 3) / 30.0);
  } else {
    p.x = -spine_length * (1.0 - std::cos(cb)) / beta;
    p.dx = -spine_length * (cb * std::sin(cb) - (1.0 - std::cos(cb))) / (beta * beta);
    p.z = spine_length * std::sin(cb) / beta;
    p.dz = spine_length * (cb * std::cos(cb) - std::sin(cb)) / (beta * beta);
  }
  return p;
}

// splitmix64; fixed algorithm so logs are reproducible across platforms.
std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

class UniformStream {
 public:
  UniformStream(std::uint64_t seed, std::uint64_t stream) : state_(mix64(seed ^ mix64(stream))) {}

  // Uniform in [-1, 1).
  double next() {
    state_ = mix64(state_);
    return static_cast<double>(state_ >> 11) * (2.0 / 9007199254740992.0) - 1.0;
  }

 private:
  std::uint64_t state_;
};

}  // namespace

ReferenceTrajectory generate_bend(const SpineConfig& config, double sweep_angle,
                                  double duration, std::optional<double> collision_margin) {
  if (!(duration > 0)) throw std::invalid_argument("bend duration must be > 0");
  const bool planar = config.dimension == Dimension::planar2d;
  const int b = config.num_moving_vertebrae;
  const double h = config.vertebra_height;
  const double spine_length = b * h;
  const double margin = collision_margin.value_or(planar ? h / 2.0 : 0.1);

  ReferenceTrajectory traj;
  traj.dt = config.dt;
  traj.sweep_angle = sweep_angle;
  traj.duration = duration;

  const int samples = static_cast<int>(std::llround(duration / config.dt)) + 1;
  traj.times.reserve(samples);
  traj.states.reserve(samples);

  const int bs = config.state_block_size();
  const int ps = config.pose_size();
  const int wd = config.workspace_dim();

  for (int k = 0; k < samples; ++k) {
    const double t = k * config.dt;
    const double phase = M_PI * t / duration;
    const double beta = sweep_angle * (1.0 - std::cos(phase)) / 2.0;
    const double beta_rate = sweep_angle * (M_PI / (2.0 * duration)) * std::sin(phase);

    Vec xi = Vec::Zero(config.state_size());
    double prev_z = 0.0;
    for (int v = 0; v < b; ++v) {
      const double c = static_cast<double>(v + 1) / b;
      const ArcPoint p = arc_point(spine_length, c, beta);
      const int base = v * bs;
      if (planar) {
        xi[base + 0] = p.x;
        xi[base + 1] = p.z;
        xi[base + 2] = c * beta;  // CCW lean toward -x
        xi[base + 3] = p.dx * beta_rate;
        xi[base + 4] = p.dz * beta_rate;
        xi[base + 5] = c * beta_rate;
      } else {
        xi[base + 0] = p.x;
        xi[base + 2] = p.z;
        xi[base + 4] = -c * beta;  // pitch about +y tips toward +x, so negate
        xi[base + ps + 0] = p.dx * beta_rate;
        xi[base + ps + 2] = p.dz * beta_rate;
        xi[base + ps + 4] = -c * beta_rate;
      }
      const double z = xi[base + wd - 1];
      if (planar) {
        if (z < h / 2.0)
          throw std::invalid_argument("bend sweep violates the z >= h/2 collision bound");
      } else {
        if (z - prev_z < margin)
          throw std::invalid_argument("bend sweep violates the vertebra spacing bound");
      }
      prev_z = z;
    }
    traj.times.push_back(t);
    traj.states.push_back(std::move(xi));
  }
  return traj;
}

Vec apply_disturbance(const SpineConfig& config, const Vec& xi, const DisturbanceSpec& spec,
                      int step_index) {
  if (xi.size() != config.state_size())
    throw std::invalid_argument("disturbance: state dimension mismatch");
  if (!spec.active()) return xi;
  if (spec.schedule == DisturbanceSchedule::impulse) {
    bool listed = false;
    for (int s : spec.impulse_steps) listed |= (s == step_index);
    if (!listed) return xi;
  }

  UniformStream rng(spec.seed, static_cast<std::uint64_t>(step_index));
  const int bs = config.state_block_size();
  const int ps = config.pose_size();
  const int wd = config.workspace_dim();

  Vec out = xi;
  for (int v = 0; v < config.num_moving_vertebrae; ++v) {
    const int base = v * bs;
    for (int i = 0; i < wd; ++i) out[base + i] += spec.position_magnitude * rng.next();
    for (int i = wd; i < ps; ++i) out[base + i] += spec.angle_magnitude * rng.next();
    for (int i = ps; i < bs; ++i) out[base + i] += spec.velocity_magnitude * rng.next();
  }
  return out;
}

void write_trajectory_csv(const ReferenceTrajectory& traj, const std::string& path) {
  std::ostringstream out;
  const int n = traj.states.empty() ? 0 : static_cast<int>(traj.states.front().size());
  const int m =
      traj.inputs.empty() ? 0 : static_cast<int>(traj.inputs.front().size());
  out << "time";
  for (int i = 0; i < n; ++i) out << ",xi" << i;
  for (int i = 0; i < m; ++i) out << ",u" << i;
  out << "\n";
  for (size_t k = 0; k < traj.states.size(); ++k) {
    out << csv_number(traj.times[k]);
    for (int i = 0; i < n; ++i) out << "," << csv_number(traj.states[k][i]);
    for (int i = 0; i < m; ++i) out << "," << csv_number(traj.inputs[k][i]);
    out << "\n";
  }
  atomic_write_file(path, out.str());
}

ReferenceTrajectory read_trajectory_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trajectory file '" + path + "'");
  std::string header;
  if (!std::getline(in, header)) throw std::runtime_error("empty trajectory file");

  int n = 0, m = 0;
  {
    std::istringstream hs(header);
    std::string col;
    while (std::getline(hs, col, ',')) {
      if (col.rfind("xi", 0) == 0) ++n;
      if (col.rfind("u", 0) == 0 && col != "time") ++m;
    }
  }
  if (n == 0) throw std::runtime_error("trajectory file lacks state columns");

  ReferenceTrajectory traj;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
    if (static_cast<int>(row.size()) != 1 + n + m)
      throw std::runtime_error("trajectory row has wrong column count");
    traj.times.push_back(row[0]);
    traj.states.push_back(Eigen::Map<const Vec>(row.data() + 1, n));
    if (m > 0) traj.inputs.push_back(Eigen::Map<const Vec>(row.data() + 1 + n, m));
  }
  if (traj.times.size() >= 2) traj.dt = traj.times[1] - traj.times[0];
  return traj;
}

}  // namespace spine
