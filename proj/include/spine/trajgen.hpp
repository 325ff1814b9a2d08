#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "spine/spine_config.hpp"
#include "spine/types.hpp"

namespace spine {

// Time-stamped reference states (and optionally reference inputs) sampled at
// the plant timestep. Indexing past the end clamps to the last point, which
// is how the receding horizon handles the end of a finite mission.
struct ReferenceTrajectory {
  double dt = 0.0;
  double sweep_angle = 0.0;
  double duration = 0.0;
  std::vector<double> times;
  std::vector<Vec> states;
  std::vector<Vec> inputs;  // empty when no input reference exists

  int size() const { return static_cast<int>(states.size()); }
  bool has_inputs() const { return !inputs.empty(); }

  const Vec& state_at(int index) const {
    if (states.empty()) throw std::out_of_range("empty trajectory");
    return states[std::min<size_t>(std::max(index, 0), states.size() - 1)];
  }
  const Vec& input_at(int index) const {
    if (inputs.empty()) throw std::out_of_range("trajectory has no input reference");
    return inputs[std::min<size_t>(std::max(index, 0), inputs.size() - 1)];
  }
};

// Counterclockwise constant-curvature bend in the X-Z plane. The bend angle
// follows a cosine ramp from 0 to sweep_angle over `duration`; vertebra i of
// B rotates by the fraction i/B of the instantaneous bend angle and sits on
// the circular arc of backbone length B*h. Velocities are analytic time
// derivatives. Poses violating the collision bounds are rejected.
// `collision_margin` defaults to h/2 above the base (planar) or 0.1 m of
// center spacing (spatial).
ReferenceTrajectory generate_bend(const SpineConfig& config, double sweep_angle,
                                  double duration,
                                  std::optional<double> collision_margin = std::nullopt);

enum class DisturbanceSchedule { every_step, impulse };

// Seeded, reproducible zero-mean uniform state perturbations. Magnitudes act
// per state group; the default disturbs nothing.
struct DisturbanceSpec {
  std::uint64_t seed = 0;
  double position_magnitude = 0.0;  // m
  double angle_magnitude = 0.0;     // rad
  double velocity_magnitude = 0.0;  // m/s or rad/s
  DisturbanceSchedule schedule = DisturbanceSchedule::every_step;
  std::vector<int> impulse_steps;

  bool active() const {
    return position_magnitude > 0 || angle_magnitude > 0 || velocity_magnitude > 0;
  }
};

Vec apply_disturbance(const SpineConfig& config, const Vec& xi, const DisturbanceSpec& spec,
                      int step_index);

void write_trajectory_csv(const ReferenceTrajectory& traj, const std::string& path);
ReferenceTrajectory read_trajectory_csv(const std::string& path);

}  // namespace spine
