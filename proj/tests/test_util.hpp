#pragma once

#include <Eigen/Dense>
#include <optional>
#include <random>

#include "spine/qp.hpp"

namespace spine::testing {

inline Mat random_spd(std::mt19937_64& rng, int n, double eig_lo = 0.5, double eig_hi = 4.0) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Mat g(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g(i, j) = gauss(rng);
  const Eigen::HouseholderQR<Mat> qr(g);
  const Mat q = qr.householderQ();
  std::uniform_real_distribution<double> eig(eig_lo, eig_hi);
  Vec d(n);
  for (int i = 0; i < n; ++i) d[i] = eig(rng);
  return q * d.asDiagonal() * q.transpose();
}

inline Vec random_vec(std::mt19937_64& rng, int n, double scale = 1.0) {
  std::normal_distribution<double> gauss(0.0, scale);
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = gauss(rng);
  return v;
}

// Brute-force oracle for small QPs: enumerate every active set of the
// inequality constraints, solve the equality-constrained KKT system, keep
// candidates that are primal feasible with nonnegative multipliers, and
// return the best objective. Exact for strictly convex problems; independent
// of the interior-point path.
inline std::optional<double> enumerate_qp_objective(const QpProblem& p, double tol = 1e-7) {
  const int n = p.num_vars();
  const int mi = p.num_ineq();
  const int me = p.num_eq();
  double best = std::numeric_limits<double>::infinity();
  bool found = false;

  for (long mask = 0; mask < (1L << mi); ++mask) {
    std::vector<int> active;
    for (int r = 0; r < mi; ++r)
      if (mask & (1L << r)) active.push_back(r);
    const int ma = static_cast<int>(active.size());

    Mat kkt = Mat::Zero(n + me + ma, n + me + ma);
    Vec rhs(n + me + ma);
    kkt.topLeftCorner(n, n) = p.h;
    rhs.head(n) = -p.f;
    if (me > 0) {
      kkt.block(0, n, n, me) = p.a_eq.transpose();
      kkt.block(n, 0, me, n) = p.a_eq;
      rhs.segment(n, me) = p.b_eq;
    }
    for (int k = 0; k < ma; ++k) {
      kkt.block(0, n + me + k, n, 1) = p.a_ineq.row(active[k]).transpose();
      kkt.block(n + me + k, 0, 1, n) = p.a_ineq.row(active[k]);
      rhs[n + me + k] = p.b_ineq[active[k]];
    }

    Eigen::FullPivLU<Mat> lu(kkt);
    const Vec sol = lu.solve(rhs);
    if ((kkt * sol - rhs).cwiseAbs().maxCoeff() > tol) continue;  // singular active set

    const Vec z = sol.head(n);
    bool valid = true;
    for (int k = 0; k < ma && valid; ++k)
      if (sol[n + me + k] < -tol) valid = false;  // multiplier sign
    if (valid && mi > 0)
      valid = ((p.a_ineq * z - p.b_ineq).maxCoeff() <= tol);
    if (!valid) continue;

    found = true;
    best = std::min(best, p.objective(z));
  }
  return found ? std::optional<double>(best) : std::nullopt;
}

// Projected-gradient oracle for box-constrained strictly convex QPs, run to
// stagnation.
inline double box_qp_objective(const Mat& h, const Vec& f, const Vec& lo, const Vec& hi,
                               int max_iter = 2000000) {
  const double lips = Eigen::SelfAdjointEigenSolver<Mat>(h).eigenvalues().maxCoeff();
  const double step = 1.0 / lips;
  Vec z = lo.cwiseMax(Vec::Zero(f.size())).cwiseMin(hi);
  for (int k = 0; k < max_iter; ++k) {
    const Vec z_next = (z - step * (h * z + f)).cwiseMax(lo).cwiseMin(hi);
    const double move = (z_next - z).cwiseAbs().maxCoeff();
    z = z_next;
    if (move < 1e-14) break;
  }
  return 0.5 * z.dot(h * z) + f.dot(z);
}

}  // namespace spine::testing
