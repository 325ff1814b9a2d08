#pragma once

#include <functional>

#include "spine/spine_config.hpp"
#include "spine/types.hpp"

namespace spine {

// Discrete-time affine model about an operating point:
//
//   xi_next ~= a * xi + b * u + c,   c = f(xi_op, u_op) - a * xi_op - b * u_op
//
// The offset definition makes the model exact at the operating point by
// construction. `clamped_input_perturbations` counts input coordinates whose
// finite-difference stencil had to be shifted to keep rest lengths
// nonnegative (a warning condition, not an error).
struct AffineModel {
  Mat a;
  Mat b;
  Vec c;
  Vec state_point;
  Vec input_point;
  double dt = 0.0;
  int clamped_input_perturbations = 0;

  Vec predict(const Vec& xi, const Vec& u) const { return a * xi + b * u + c; }
};

// Central-difference affine model of an arbitrary discrete map f(x, u).
// Input perturbations are clamped to keep every sample point >= input_floor
// (pass -inf to disable clamping); state perturbations are unrestricted.
AffineModel finite_difference_affine(
    const std::function<Vec(const Vec&, const Vec&)>& f, const Vec& x, const Vec& u,
    double delta, double input_floor);

// Affine model of the spine step map at (xi, u_prev) with stencil width
// delta. Rest lengths live in [0, inf), so perturbations near zero are
// clamped one-sided.
AffineModel linearize(const SpineConfig& config, const Vec& xi, const Vec& u_prev,
                      double delta = 1e-6);

}  // namespace spine
