#include <algorithm>
#include <array>
#include <functional>
#include <stdexcept>
#include <vector>
#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "relguide/angles.hpp"
#include "relguide/kinematics.hpp"
#include "relguide/relative_frame.hpp"

using namespace relguide;

TEST_CASE("wrap_pi and wrap_two_pi ranges") {
  CHECK(wrap_pi(kPi) == doctest::Approx(kPi));
  CHECK(wrap_pi(-kPi) == doctest::Approx(kPi));
  CHECK(wrap_pi(3 * kPi + 0.1) == doctest::Approx(-kPi + 0.1));
  CHECK(wrap_two_pi(-0.1) == doctest::Approx(kTwoPi - 0.1));
  CHECK(wrap_two_pi(kTwoPi) == doctest::Approx(0.0));
}

TEST_CASE("relative derivatives match differentiated positions") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> pos(-50000, 50000), ang(-kPi, kPi);
  const SpeedPair v{200.0, 240.0};
  for (int i = 0; i < 200; ++i) {
    const PlanarPose leader{pos(rng), pos(rng), ang(rng)};
    const PlanarPose pursuer{pos(rng), pos(rng), ang(rng)};
    const double r_p = 0.01;
    // Move both aircraft by +-h with the closed-form velocity and difference
    // the distance and line-of-sight bearing directly.
    const double h = 1e-3;
    auto at = [&](double t) {
      const double lx = leader.x + v.v_l * std::sin(leader.psi) * t;
      const double ly = leader.y + v.v_l * std::cos(leader.psi) * t;
      const oracle::Pose p = oracle::integrate({pursuer.x, pursuer.y, pursuer.psi}, v.v_p, r_p, t, 4);
      return std::array<double, 3>{std::hypot(lx - p.x, ly - p.y), std::atan2(lx - p.x, ly - p.y),
                                   p.psi};
    };
    const auto plus = at(h), minus = at(-h);
    const PolarRelativeState s = polar_from_poses(leader, pursuer);
    const RelativeRates r = relative_derivatives(s, v, leader.psi, r_p);
    CHECK(r.d_dot == doctest::Approx((plus[0] - minus[0]) / (2 * h)).epsilon(1e-6));
    CHECK(r.theta_dot == doctest::Approx(wrap_pi(plus[1] - minus[1]) / (2 * h)).epsilon(1e-5));
    CHECK(r.psi_dot == doctest::Approx(r_p));
  }
}

TEST_CASE("relative derivatives reject non-positive separation") {
  CHECK_THROWS_AS(relative_derivatives({0.0, 0.0, 0.0}, {200, 240}, 0.0, 0.0), std::domain_error);
}

TEST_CASE("co-track aircraft at equal speed keep range and bearing") {
  const RelativeRates r = relative_derivatives({10000.0, kPi / 2, kPi / 2}, {230, 230}, kPi / 2, 0.0);
  CHECK(r.d_dot == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(r.theta_dot == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("bank to turn rate and radius") {
  CHECK(bank_to_turn_rate(0.0, 230.0) == 0.0);
  // tan(45 deg) = 1.
  CHECK(bank_to_turn_rate(kPi / 4, 230.0) == doctest::Approx(9.81 / 230.0));
  CHECK(bank_to_turn_rate(-kPi / 4, 230.0) == doctest::Approx(-9.81 / 230.0));
  // 230^2 / (9.81 tan 25 deg), tan 25 deg = 0.4663076581549986.
  CHECK(min_turn_radius(230.0, deg2rad(25.0)) == doctest::Approx(52900.0 / (9.81 * 0.4663076581549986)));
  CHECK_THROWS_AS(bank_to_turn_rate(kPi / 2, 230.0), std::domain_error);
  CHECK_THROWS_AS(bank_to_turn_rate(0.1, 0.0), std::domain_error);
}

TEST_CASE("step_pose matches RK4 integration") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ang(-kPi, kPi), rate(-0.03, 0.03), dur(0.01, 300.0);
  for (int i = 0; i < 300; ++i) {
    const PlanarPose p{1000.0, -2000.0, ang(rng)};
    const double r = i % 10 == 0 ? 0.0 : rate(rng);
    const double dt = dur(rng);
    const PlanarPose q = step_pose(p, 240.0, r, dt);
    const oracle::Pose o = oracle::integrate({p.x, p.y, p.psi}, 240.0, r, dt, 2000);
    CHECK(q.x == doctest::Approx(o.x).epsilon(1e-9).scale(1e4));
    CHECK(q.y == doctest::Approx(o.y).epsilon(1e-9).scale(1e4));
    CHECK(wrap_pi(q.psi - o.psi) == doctest::Approx(0.0).epsilon(1e-9));
  }
}

TEST_CASE("step_pose rejects non-positive dt; propagate_pose rewinds") {
  CHECK_THROWS_AS(step_pose({0, 0, 0}, 200.0, 0.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(step_pose({0, 0, 0}, 200.0, 0.0, -1.0), std::invalid_argument);
  const PlanarPose p{5.0, 7.0, 0.3};
  const PlanarPose q = propagate_pose(propagate_pose(p, 240.0, 0.02, 40.0), 240.0, 0.02, -40.0);
  CHECK(q.x == doctest::Approx(p.x).epsilon(1e-9).scale(1.0));
  CHECK(q.y == doctest::Approx(p.y).epsilon(1e-9).scale(1.0));
  CHECK(q.psi == doctest::Approx(p.psi));
}

TEST_CASE("positive bank turns right with heading 90 deg moving east") {
  const PlanarPose p = step_pose({0, 0, kPi / 2}, 200.0, 0.0, 10.0);
  CHECK(p.x == doctest::Approx(2000.0));
  CHECK(p.y == doctest::Approx(0.0).scale(1.0));
  const PlanarPose q = step_pose({0, 0, kPi / 2}, 200.0, bank_to_turn_rate(0.3, 200.0), 5.0);
  CHECK(q.psi > kPi / 2);
  CHECK(q.y < 0.0);  // turning right from east heads south
}

TEST_CASE("relative frame round trip and mirror") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> pos(-80000, 80000), ang(-kPi, kPi);
  for (int i = 0; i < 100; ++i) {
    const PlanarPose leader{pos(rng), pos(rng), ang(rng)};
    const PlanarPose pursuer{pos(rng), pos(rng), ang(rng)};
    const RelativeState rel = relative_state(leader, pursuer);
    const PlanarPose back = pursuer_pose(rel, leader);
    CHECK(back.x == doctest::Approx(pursuer.x).scale(1.0).epsilon(1e-9));
    CHECK(back.y == doctest::Approx(pursuer.y).scale(1.0).epsilon(1e-9));
    CHECK(wrap_pi(back.psi - pursuer.psi) == doctest::Approx(0.0).scale(1.0));
    CHECK(std::hypot(rel.dx, rel.dy) ==
          doctest::Approx(std::hypot(pursuer.x - leader.x, pursuer.y - leader.y)));
    const RelativeState m = mirrored(mirrored(rel));
    CHECK(m.dx == rel.dx);
    CHECK(m.dy == rel.dy);
  }
  // Leader heading east at the origin, pursuer 40 km behind and 40 km north.
  const RelativeState rel = relative_state({0, 0, kPi / 2}, {-40000, 40000, kPi / 2});
  CHECK(rel.dx == doctest::Approx(-40000.0));
  CHECK(rel.dy == doctest::Approx(40000.0));
  CHECK(rel.dpsi == doctest::Approx(0.0).scale(1.0));
}
