#include "spine/linearization.hpp"

#include <cmath>
#include <stdexcept>

#include "spine/spine_model.hpp"

namespace spine {

AffineModel finite_difference_affine(const std::function<Vec(const Vec&, const Vec&)>& f,
                                     const Vec& x, const Vec& u, double delta,
                                     double input_floor) {
  if (!(delta > 0)) throw std::invalid_argument("finite difference delta must be > 0");

  const Vec f0 = f(x, u);
  const int nx = static_cast<int>(x.size());
  const int nu = static_cast<int>(u.size());
  const int ny = static_cast<int>(f0.size());

  AffineModel m;
  m.a.resize(ny, nx);
  m.b.resize(ny, nu);
  m.state_point = x;
  m.input_point = u;

  Vec xp = x, xm = x;
  for (int j = 0; j < nx; ++j) {
    xp[j] = x[j] + delta;
    xm[j] = x[j] - delta;
    // Evaluate the actual spacing; see NR: the representable perturbation
    // can differ from delta.
    m.a.col(j) = (f(xp, u) - f(xm, u)) / (xp[j] - xm[j]);
    xp[j] = x[j];
    xm[j] = x[j];
  }

  Vec up = u, um = u;
  for (int j = 0; j < nu; ++j) {
    double hi = u[j] + delta;
    double lo = u[j] - delta;
    if (lo < input_floor) {
      // Shift the stencil up to stay in the valid domain.
      lo = input_floor;
      ++m.clamped_input_perturbations;
    }
    up[j] = hi;
    um[j] = lo;
    m.b.col(j) = (f(x, up) - f(x, um)) / (hi - lo);
    up[j] = u[j];
    um[j] = u[j];
  }

  m.c = f0 - m.a * x - m.b * u;
  return m;
}

AffineModel linearize(const SpineConfig& config, const Vec& xi, const Vec& u_prev,
                      double delta) {
  AffineModel m = finite_difference_affine(
      [&config](const Vec& x, const Vec& u) { return step(config, x, u); }, xi, u_prev,
      delta, 0.0);
  m.dt = config.dt;
  return m;
}

}  // namespace spine
