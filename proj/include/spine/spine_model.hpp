#pragma once

#include <vector>

#include "spine/spine_config.hpp"
#include "spine/types.hpp"

namespace spine {

// World-frame pose and velocity of one rigid body (base or vertebra).
// `angular_rate` holds the scalar rate in 2-D and the body-frame rate vector
// in 3-D (Euler-angle rates are treated as body angular velocity, which is
// valid for the small rotations this model operates under).
struct BodyPose {
  Vec position;
  Mat rotation;
  Vec velocity;
  Vec angular_rate;
};

// One cable of the structure with both world attachment points resolved.
// `anchor` sits on the lower body of the pair, `moving` on the upper one.
struct CableAttachment {
  int lower_body = 0;
  int upper_body = 0;
  Vec anchor;
  Vec moving;
  double length = 0.0;
};

Mat rotation_matrix(const SpineConfig& config, const Vec& angles);

// Body 0 is the base, fixed at the origin pose; bodies 1..B come from xi.
std::vector<BodyPose> body_poses(const SpineConfig& config, const Vec& xi);

std::vector<CableAttachment> cable_endpoints(const SpineConfig& config, const Vec& xi);

// Spring-damper tension with slack saturation: cables cannot push, so the
// combined elastic + damping force is floored at zero. rest_length == 0 is a
// legal input (fully taut cable).
double cable_tension(double length, double length_rate, double rest_length,
                     const SpineConfig& config);

// Continuous-time state derivative: Newton-Euler per vertebra under cable
// forces and gravity.
Vec dynamics(const SpineConfig& config, const Vec& xi, const Vec& u);

// Forward-Euler step map f(xi, u) = xi + dt * g(xi, u).
Vec step(const SpineConfig& config, const Vec& xi, const Vec& u);

// Home pose: vertebrae stacked above the base with zero rotation/velocity.
Vec home_state(const SpineConfig& config);

// Kinetic + gravitational + elastic energy; used by the dissipation tests.
double mechanical_energy(const SpineConfig& config, const Vec& xi, const Vec& u);

}  // namespace spine
