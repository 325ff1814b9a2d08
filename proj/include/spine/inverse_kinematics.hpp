#pragma once

#include "spine/qp.hpp"
#include "spine/spine_config.hpp"
#include "spine/types.hpp"

namespace spine {

// Static equilibrium expressed in force densities q_i = T_i / l_i (N/m):
// nodal force and moment balance is linear in q, so finding cable tensions
// that hold a pose reduces to the QP
//
//   min ||q||^2   s.t.   equilibrium * q = load,   q >= min_force_density.
//
// The minimum force density keeps every cable taut in the reference.
struct ForceDensityProblem {
  Mat equilibrium;
  Vec load;
  double min_force_density = 0.5;
};

// Thrown when no taut-cable equilibrium exists at a pose, or when the
// resulting rest lengths leave their valid range.
class IkError : public std::runtime_error {
 public:
  explicit IkError(const std::string& msg) : std::runtime_error(msg) {}
};

struct IkOptions {
  double min_force_density = 0.5;  // N/m
  double max_rest_length = 0.3;    // m, validation bound on the result
  QpSolverOptions solver{1e-10, 200};
};

// Force densities solving the equilibrium QP. Throws IkError when the QP is
// infeasible.
Vec solve_force_density(const ForceDensityProblem& problem,
                        const QpSolverOptions& options = {1e-10, 200});

// Force/moment balance rows for every moving vertebra of the spine at the
// given pose (velocities ignored; the reference is pseudo-static).
ForceDensityProblem build_force_density_problem(const SpineConfig& config, const Vec& xi_ref,
                                                double min_force_density = 0.5);

// Cable rest lengths that hold xi_ref in static equilibrium:
// rho_i = l_i - T_i / k_s with T_i = q_i * l_i from the force-density QP.
// Every returned rest length is validated to lie in (0, max_rest_length].
Vec ik_rest_lengths(const SpineConfig& config, const Vec& xi_ref, const IkOptions& options = {});

}  // namespace spine
