#pragma once

#include <iosfwd>
#include <optional>

#include "spine/types.hpp"

namespace spine {

// Convex quadratic program in standard form:
//
//   min  0.5 z' H z + f' z
//   s.t. a_eq z = b_eq
//        a_ineq z <= b_ineq
//
// H must be symmetric positive semidefinite. Empty (0-row) constraint
// blocks are allowed.
struct QpProblem {
  Mat h;
  Vec f;
  Mat a_ineq;
  Vec b_ineq;
  Mat a_eq;
  Vec b_eq;

  int num_vars() const { return static_cast<int>(f.size()); }
  int num_ineq() const { return static_cast<int>(b_ineq.size()); }
  int num_eq() const { return static_cast<int>(b_eq.size()); }

  double objective(const Vec& z) const { return 0.5 * z.dot(h * z) + f.dot(z); }
};

enum class QpStatus { optimal, infeasible, max_iterations };

const char* to_string(QpStatus s);

struct QpSolution {
  Vec z;           // primal point (best iterate even on failure)
  Vec ineq_duals;  // lambda >= 0
  Vec eq_duals;    // nu
  QpStatus status = QpStatus::max_iterations;
  double kkt_residual = 0.0;  // max of stationarity / feasibility / complementarity
  double objective = 0.0;
  int iterations = 0;
};

struct QpSolverOptions {
  double tol = 1e-8;
  int max_iter = 100;
};

// Dense primal-dual interior point with Mehrotra predictor-corrector steps.
// Throws std::invalid_argument on inconsistent dimensions, an asymmetric H,
// or an H that fails the positive-semidefiniteness check.
QpSolution solve(const QpProblem& problem, const QpSolverOptions& options = {},
                 const std::optional<Vec>& initial_guess = std::nullopt);

// Plain-text dump/load for offline debugging of problem instances.
void dump_problem(const QpProblem& problem, std::ostream& out);
QpProblem load_problem(std::istream& in);

}  // namespace spine
