#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "spine/inverse_kinematics.hpp"
#include "spine/spine_model.hpp"

using namespace spine;

TEST_CASE("config invariants are enforced") {
  SpineConfig c = planar_default();
  CHECK_NOTHROW(c.validate());
  CHECK(c.cables_per_pair() == 4);
  CHECK(spatial_default().cables_per_pair() == 8);
  CHECK(spatial_default().input_size() == 24);
  CHECK(spatial_default().state_size() == 36);
  CHECK(planar_default().state_size() == 6);

  c.dt = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = planar_default();
  c.cable_routing.pop_back();
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = planar_default();
  for (auto& o : c.node_offsets) o[1] = 0.0;  // collinear along x
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("z indices match the state convention") {
  const SpineConfig c3 = spatial_default();
  // 1-based states 3, 15, 27 are the vertebra z positions.
  CHECK(c3.z_index(0) == 2);
  CHECK(c3.z_index(1) == 14);
  CHECK(c3.z_index(2) == 26);
  const SpineConfig c2 = planar_default();
  CHECK(c2.z_index(0) == 1);  // 1-based state 2
}

TEST_CASE("cable endpoints at the home pose equal the nominal geometry") {
  for (const SpineConfig& c : {planar_default(), spatial_default()}) {
    const Vec xi = home_state(c);
    const auto cables = cable_endpoints(c, xi);
    REQUIRE(static_cast<int>(cables.size()) == c.num_cables());
    int i = 0;
    for (int pair = 0; pair < c.num_moving_vertebrae; ++pair) {
      for (const auto& [lo, hi] : c.cable_routing) {
        Vec anchor = c.node_offsets[lo];
        Vec moving = c.node_offsets[hi];
        anchor[c.workspace_dim() - 1] += pair * c.vertebra_height;
        moving[c.workspace_dim() - 1] += (pair + 1) * c.vertebra_height;
        CHECK((cables[i].anchor - anchor).cwiseAbs().maxCoeff() < 1e-15);
        CHECK((cables[i].moving - moving).cwiseAbs().maxCoeff() < 1e-15);
        ++i;
      }
    }
  }
}

TEST_CASE("pure translation shifts every moving endpoint") {
  const SpineConfig c = spatial_default();
  Vec xi = home_state(c);
  const auto before = cable_endpoints(c, xi);
  for (int v = 0; v < c.num_moving_vertebrae; ++v) xi[v * 12] += 0.1;
  const auto after = cable_endpoints(c, xi);
  for (size_t i = 0; i < before.size(); ++i) {
    CHECK(after[i].moving[0] == doctest::Approx(before[i].moving[0] + 0.1).epsilon(1e-14));
    CHECK(after[i].moving[1] == doctest::Approx(before[i].moving[1]).epsilon(1e-14));
    CHECK(after[i].moving[2] == doctest::Approx(before[i].moving[2]).epsilon(1e-14));
  }
}

TEST_CASE("rotation by pi/2 about the vertebra center matches the hand rotation") {
  const SpineConfig c = planar_default();
  Vec xi = home_state(c);
  xi[2] = M_PI / 2.0;
  const auto cables = cable_endpoints(c, xi);
  int i = 0;
  for (const auto& [lo, hi] : c.cable_routing) {
    // Hand oracle: (x, z) -> (-z, x), then translate to the center.
    const Vec& offset = c.node_offsets[hi];
    Vec expected(2);
    expected << -offset[1], offset[0];
    expected[1] += c.vertebra_height;
    CHECK((cables[i].moving - expected).cwiseAbs().maxCoeff() < 1e-12);
    ++i;
  }
}

TEST_CASE("cable tension: slack saturation and Hooke's law") {
  SpineConfig c = planar_default();
  c.cable_stiffness = 100.0;
  c.cable_damping = 0.0;
  CHECK(cable_tension(0.2, 0.0, 0.2, c) == 0.0);           // zero stretch
  CHECK(cable_tension(0.15, 0.0, 0.2, c) == 0.0);          // slack, never negative
  CHECK(cable_tension(0.25, 0.0, 0.2, c) == doctest::Approx(5.0));  // 100 * 0.05
  CHECK_THROWS_AS(cable_tension(0.0, 0.0, 0.1, c), std::domain_error);
  CHECK_THROWS_AS(cable_tension(0.1, 0.0, -0.01, c), std::domain_error);
  // rest length 0 is legal: fully taut cable
  CHECK(cable_tension(0.1, 0.0, 0.0, c) == doctest::Approx(10.0));
}

TEST_CASE("tension nonnegativity holds over a parameter sweep") {
  const SpineConfig c = planar_default();
  for (double l = 0.01; l < 0.4; l += 0.037)
    for (double rate = -2.0; rate < 2.0; rate += 0.41)
      for (double rho = 0.0; rho < 0.35; rho += 0.03)
        CHECK(cable_tension(l, rate, rho, c) >= 0.0);
}

TEST_CASE("all cables slack leaves only gravity") {
  for (const SpineConfig& c : {planar_default(), spatial_default()}) {
    const Vec xi = home_state(c);
    // Rest lengths far beyond every cable length: all slack.
    const Vec u = Vec::Constant(c.input_size(), 10.0);
    const Vec deriv = dynamics(c, xi, u);
    const int ps = c.pose_size();
    const int wd = c.workspace_dim();
    for (int v = 0; v < c.num_moving_vertebrae; ++v) {
      const int base = v * c.state_block_size();
      const Vec acc = deriv.segment(base + ps, wd);
      CHECK(acc[wd - 1] == doctest::Approx(-c.gravity));
      for (int i = 0; i + 1 < wd; ++i) CHECK(acc[i] == doctest::Approx(0.0));
      const Vec ang_acc = deriv.segment(base + ps + wd, ps - wd);
      CHECK(ang_acc.cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("symmetric pose with symmetric rest lengths: no lateral force, no moment") {
  SpineConfig c = planar_default();
  c.gravity = 0.0;
  const Vec xi = home_state(c);
  Vec u(4);
  u << 0.03, 0.03, 0.12, 0.12;  // verticals equal, saddles equal
  const Vec deriv = dynamics(c, xi, u);
  CHECK(std::abs(deriv[3]) < 1e-10);  // x acceleration
  CHECK(std::abs(deriv[5]) < 1e-10);  // angular acceleration
}

TEST_CASE("planar mirror symmetry negates x and theta accelerations") {
  const SpineConfig c = planar_default();
  Vec xi(6);
  xi << 0.013, 0.162, 0.07, 0.05, -0.02, 0.3;
  Vec u(4);
  u << 0.03, 0.05, 0.11, 0.13;

  // Mirror about the z axis: x, theta, vx, omega flip; left/right cables swap.
  Vec xi_m(6);
  xi_m << -xi[0], xi[1], -xi[2], -xi[3], xi[4], -xi[5];
  Vec u_m(4);
  u_m << u[1], u[0], u[3], u[2];

  const Vec d = dynamics(c, xi, u);
  const Vec d_m = dynamics(c, xi_m, u_m);
  CHECK(d_m[3] == doctest::Approx(-d[3]).epsilon(1e-12));
  CHECK(d_m[5] == doctest::Approx(-d[5]).epsilon(1e-12));
  CHECK(d_m[4] == doctest::Approx(d[4]).epsilon(1e-12));
}

TEST_CASE("equilibrium pose with IK rest lengths is a fixed point of the step map") {
  for (const SpineConfig& c : {planar_default(), spatial_default()}) {
    const Vec xi = home_state(c);
    const Vec u = ik_rest_lengths(c, xi);
    const Vec deriv = dynamics(c, xi, u);
    CHECK(deriv.cwiseAbs().maxCoeff() < 1e-6);
    const Vec next = step(c, xi, u);
    CHECK((next - xi).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("default dt from the paper is honored by the step map") {
  const SpineConfig c = planar_default();
  CHECK(c.dt == 0.001);
  const Vec xi = home_state(c);
  const Vec u = Vec::Constant(4, 0.05);
  const Vec next = step(c, xi, u);
  const Vec deriv = dynamics(c, xi, u);
  CHECK((next - xi - 0.001 * deriv).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("halving dt shows first-order convergence of the Euler step") {
  SpineConfig c = planar_default();
  Vec xi = home_state(c);
  xi[0] += 0.01;
  xi[3] = 0.2;  // some velocity so the state actually moves
  const Vec u = Vec::Constant(4, 0.08);

  std::vector<double> dts = {1e-2, 1e-3, 1e-4};
  std::vector<double> ratios;
  for (double dt : dts) {
    SpineConfig cd = c;
    cd.dt = dt;
    const Vec full = step(cd, xi, u);
    SpineConfig ch = c;
    ch.dt = dt / 2.0;
    const Vec half = step(ch, step(ch, xi, u), u);
    ratios.push_back((half - full).norm() / (full - xi).norm());
  }
  // log-log slope of the ratio against dt should be ~1 (first order).
  const double slope01 = (std::log(ratios[1]) - std::log(ratios[0])) /
                         (std::log(dts[1]) - std::log(dts[0]));
  const double slope12 = (std::log(ratios[2]) - std::log(ratios[1])) /
                         (std::log(dts[2]) - std::log(dts[1]));
  CHECK(slope01 == doctest::Approx(1.0).epsilon(0.2));
  CHECK(slope12 == doctest::Approx(1.0).epsilon(0.2));
}

TEST_CASE("passive motion dissipates energy under damping") {
  SpineConfig c = planar_default();
  c.gravity = 0.0;
  REQUIRE(c.cable_damping > 0.0);

  // Taut-everywhere input: 80% of each home cable length.
  const auto home_cables = cable_endpoints(c, home_state(c));
  Vec u(4);
  for (int i = 0; i < 4; ++i) u[i] = 0.8 * home_cables[i].length;

  // Settle into the zero-gravity equilibrium of this input, then kick.
  Vec xi = home_state(c);
  for (int k = 0; k < 20000; ++k) xi = step(c, xi, u);
  xi[3] = 0.02;
  xi[5] = 0.15;

  const double e0 = mechanical_energy(c, xi, u);
  double prev = e0;
  for (int k = 0; k < 100; ++k) {
    const auto cables = cable_endpoints(c, xi);
    for (size_t i = 0; i < cables.size(); ++i)
      REQUIRE(cables[i].length > u[i]);  // no slack transitions in the window
    xi = step(c, xi, u);
    const double e = mechanical_energy(c, xi, u);
    CHECK(e <= prev + 1e-6 * e0);
    prev = e;
  }
  CHECK(prev < e0);  // strictly dissipated overall
}

TEST_CASE("dimension mismatches are rejected") {
  const SpineConfig c = planar_default();
  CHECK_THROWS_AS(dynamics(c, Vec::Zero(5), Vec::Zero(4)), std::invalid_argument);
  CHECK_THROWS_AS(dynamics(c, home_state(c), Vec::Zero(3)), std::invalid_argument);
  CHECK_THROWS_AS(cable_endpoints(c, Vec::Zero(7)), std::invalid_argument);
  // negative rest length propagates from the tension law
  Vec u = Vec::Constant(4, 0.05);
  u[2] = -0.01;
  CHECK_THROWS_AS(dynamics(c, home_state(c), u), std::domain_error);
}
