#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <sstream>

#include "spine/qp.hpp"
#include "test_util.hpp"

using namespace spine;
using namespace spine::testing;

namespace {

QpProblem box_problem(const Mat& h, const Vec& f, const Vec& lo, const Vec& hi) {
  const int n = static_cast<int>(f.size());
  QpProblem p;
  p.h = h;
  p.f = f;
  p.a_ineq = Mat::Zero(2 * n, n);
  p.b_ineq = Vec::Zero(2 * n);
  p.a_ineq.topRows(n).setIdentity();
  p.b_ineq.head(n) = hi;
  p.a_ineq.bottomRows(n) = -Mat::Identity(n, n);
  p.b_ineq.tail(n) = -lo;
  p.a_eq = Mat::Zero(0, n);
  p.b_eq = Vec::Zero(0);
  return p;
}

}  // namespace

TEST_CASE("unconstrained minimum of 0.5||z||^2 - f.z is z = f") {
  QpProblem p;
  p.h = Mat::Identity(3, 3);
  p.f = Vec(3);
  p.f << -1.0, 2.5, -0.25;  // minimizer is -f for the 0.5 z'z + f'z form
  p.a_ineq = Mat::Zero(0, 3);
  p.b_ineq = Vec::Zero(0);
  p.a_eq = Mat::Zero(0, 3);
  p.b_eq = Vec::Zero(0);

  const QpSolution sol = solve(p);
  REQUIRE(sol.status == QpStatus::optimal);
  CHECK((sol.z + p.f).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("hand KKT: min (z1-2)^2 + (z2-2)^2 s.t. z <= 1") {
  QpProblem p;
  p.h = 2.0 * Mat::Identity(2, 2);
  p.f = Vec::Constant(2, -4.0);
  p.a_ineq = Mat::Identity(2, 2);
  p.b_ineq = Vec::Ones(2);
  p.a_eq = Mat::Zero(0, 2);
  p.b_eq = Vec::Zero(0);

  const QpSolution sol = solve(p);
  REQUIRE(sol.status == QpStatus::optimal);
  CHECK(sol.z[0] == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(sol.z[1] == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(sol.ineq_duals[0] == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(sol.ineq_duals[1] == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(sol.kkt_residual <= 1e-8);
}

TEST_CASE("contradictory bounds are reported infeasible") {
  QpProblem p;
  p.h = Mat::Identity(2, 2);
  p.f = Vec::Zero(2);
  p.a_ineq = Mat::Zero(4, 2);
  p.b_ineq = Vec::Zero(4);
  p.a_ineq.topRows(2) = -Mat::Identity(2, 2);  // z >= 1
  p.b_ineq.head(2) = Vec::Constant(2, -1.0);
  p.a_ineq.bottomRows(2).setIdentity();        // z <= 0
  p.b_ineq.tail(2) = Vec::Zero(2);
  p.a_eq = Mat::Zero(0, 2);
  p.b_eq = Vec::Zero(0);

  const QpSolution sol = solve(p);
  CHECK(sol.status == QpStatus::infeasible);
}

TEST_CASE("randomized boxes agree with the projected-gradient oracle") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 49);
    const Mat h = random_spd(rng, n);
    const Vec f = random_vec(rng, n, 2.0);
    Vec lo(n), hi(n);
    for (int i = 0; i < n; ++i) {
      const double a = random_vec(rng, 1, 1.0)[0];
      lo[i] = a - 0.2 - std::abs(random_vec(rng, 1, 1.0)[0]);
      hi[i] = a + 0.2 + std::abs(random_vec(rng, 1, 1.0)[0]);
    }
    const QpProblem p = box_problem(h, f, lo, hi);
    const QpSolution sol = solve(p);
    REQUIRE(sol.status == QpStatus::optimal);
    CHECK(sol.kkt_residual <= 1e-8);
    const double oracle = box_qp_objective(h, f, lo, hi);
    CHECK(sol.objective == doctest::Approx(oracle).epsilon(1e-6).scale(1.0));
    CHECK((p.a_ineq * sol.z - p.b_ineq).maxCoeff() <= 1e-8);
  }
}

TEST_CASE("randomized small instances agree with active-set enumeration") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 5);
    const int mi = 2 + static_cast<int>(rng() % 7);
    const bool with_eq = trial % 3 == 0 && n >= 3;

    QpProblem p;
    p.h = random_spd(rng, n);
    p.f = random_vec(rng, n, 1.5);
    const Vec interior = random_vec(rng, n, 0.5);
    p.a_ineq = Mat(mi, n);
    p.b_ineq = Vec(mi);
    for (int r = 0; r < mi; ++r) {
      const Vec a = random_vec(rng, n, 1.0);
      p.a_ineq.row(r) = a.transpose();
      p.b_ineq[r] = a.dot(interior) + 0.1 + std::abs(random_vec(rng, 1, 1.0)[0]);
    }
    if (with_eq) {
      p.a_eq = random_vec(rng, n, 1.0).transpose();
      p.b_eq = Vec::Constant(1, p.a_eq.row(0).dot(interior));
    } else {
      p.a_eq = Mat::Zero(0, n);
      p.b_eq = Vec::Zero(0);
    }

    const QpSolution sol = solve(p);
    REQUIRE(sol.status == QpStatus::optimal);
    const auto oracle = enumerate_qp_objective(p);
    REQUIRE(oracle.has_value());
    CHECK(sol.objective == doctest::Approx(*oracle).epsilon(1e-6).scale(1.0));
  }
}

TEST_CASE("objective scaling leaves the minimizer unchanged") {
  std::mt19937_64 rng(23);
  const int n = 12;
  const Mat h = random_spd(rng, n);
  const Vec f = random_vec(rng, n);
  const Vec lo = Vec::Constant(n, -0.4), hi = Vec::Constant(n, 0.7);
  const QpProblem p = box_problem(h, f, lo, hi);
  QpProblem scaled = p;
  const double alpha = 37.5;
  scaled.h *= alpha;
  scaled.f *= alpha;

  const QpSolution a = solve(p);
  const QpSolution b = solve(scaled);
  REQUIRE(a.status == QpStatus::optimal);
  REQUIRE(b.status == QpStatus::optimal);
  CHECK((a.z - b.z).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("initial guess is accepted and does not change the answer") {
  std::mt19937_64 rng(5);
  const int n = 8;
  const QpProblem p = box_problem(random_spd(rng, n), random_vec(rng, n),
                                  Vec::Constant(n, -1.0), Vec::Constant(n, 1.0));
  const QpSolution cold = solve(p);
  const QpSolution warm = solve(p, {}, Vec::Constant(n, 0.3));
  REQUIRE(cold.status == QpStatus::optimal);
  REQUIRE(warm.status == QpStatus::optimal);
  CHECK((cold.z - warm.z).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("non-PSD H is rejected") {
  QpProblem p;
  p.h = Mat::Identity(2, 2);
  p.h(1, 1) = -1.0;
  p.f = Vec::Zero(2);
  p.a_ineq = Mat::Zero(0, 2);
  p.b_ineq = Vec::Zero(0);
  p.a_eq = Mat::Zero(0, 2);
  p.b_eq = Vec::Zero(0);
  CHECK_THROWS_AS(solve(p), std::invalid_argument);

  p.h = Mat::Identity(2, 2);
  p.h(0, 1) = 0.5;  // asymmetric
  CHECK_THROWS_AS(solve(p), std::invalid_argument);
}

TEST_CASE("iteration cap reports max_iterations") {
  std::mt19937_64 rng(9);
  const int n = 10;
  const QpProblem p = box_problem(random_spd(rng, n), random_vec(rng, n),
                                  Vec::Constant(n, -1.0), Vec::Constant(n, 1.0));
  const QpSolution sol = solve(p, {1e-12, 1});
  CHECK(sol.status == QpStatus::max_iterations);
}

TEST_CASE("problem dump/load round trip") {
  std::mt19937_64 rng(3);
  const QpProblem p = box_problem(random_spd(rng, 4), random_vec(rng, 4),
                                  Vec::Constant(4, -2.0), Vec::Constant(4, 2.0));
  std::stringstream buffer;
  dump_problem(p, buffer);
  const QpProblem q = load_problem(buffer);
  CHECK((p.h - q.h).cwiseAbs().maxCoeff() == 0.0);
  CHECK((p.f - q.f).cwiseAbs().maxCoeff() == 0.0);
  CHECK((p.a_ineq - q.a_ineq).cwiseAbs().maxCoeff() == 0.0);
  CHECK((p.b_ineq - q.b_ineq).cwiseAbs().maxCoeff() == 0.0);

  const QpSolution a = solve(p);
  const QpSolution b = solve(q);
  CHECK(a.objective == doctest::Approx(b.objective));
}
