#include <algorithm>
#include <array>
#include <functional>
#include <stdexcept>
#include <vector>
#include <cmath>

#include "doctest.h"
#include "relguide/angles.hpp"
#include "relguide/errors.hpp"
#include "relguide/flight_sim.hpp"

using namespace relguide;

namespace {

NetworkParams constant_plan(const ManeuverPlan& plan) {
  NetworkParams p = make_network({3, 4, kOutputs}, 1, plan.r_min);
  std::fill(p.values.begin(), p.values.end(), 0.0);
  p.output.offset = encode_plan(plan);
  p.input_min = {-1e6, -1e6, -4.0};
  p.input_max = {1e6, 1e6, 4.0};
  return p;
}

Scenario cotrack() {
  Scenario s;
  s.leader = {{0, 0, kPi / 2}, 200.0};
  s.pursuer = {{-15000, 0, kPi / 2}, 200.0};
  s.duration_cap = 60.0;
  return s;
}

const double kR = 12591.0;

}  // namespace

TEST_CASE("autopilot: zero error holds, large error saturates") {
  const BankEnvelope env;
  AutopilotMemory mem;
  AircraftState st{{0, 0, 0}, 240.0, 0.0, 0.0};
  AutopilotOutput out = autopilot_step(0.0, st, {}, env, 0.05, mem);
  CHECK(out.bank_command == 0.0);
  CHECK(out.bank == 0.0);
  out = autopilot_step(deg2rad(90.0), st, {}, env, 0.05, mem);
  CHECK(out.bank_command == env.phi_max);
  out = autopilot_step(-deg2rad(90.0), st, {}, env, 0.05, mem);
  CHECK(out.bank_command == env.phi_min);
  // First-order lag: one step moves by (1 - exp(-dt / tau)) of the gap.
  CHECK(out.bank == doctest::Approx(env.phi_min * (1.0 - std::exp(-0.05 / 2.0))));
}

TEST_CASE("autopilot: 30 deg heading step settles within 60 s with under 5 deg overshoot") {
  const BankEnvelope env;
  const AutopilotGains gains;
  AutopilotMemory mem;
  AircraftState st{{0, 0, 0}, 240.0, 0.0, 0.0};
  const double target = deg2rad(30.0);
  double peak = 0.0;
  double settled_at = -1.0;
  for (int i = 1; i <= 3000; ++i) {
    const AutopilotOutput o = autopilot_step(wrap_pi(target - st.pose.psi), st, gains, env, 0.05, mem);
    st.bank = o.bank;
    st.pose = step_pose(st.pose, st.speed, bank_to_turn_rate(st.bank, st.speed), 0.05);
    peak = std::max(peak, st.pose.psi);
    const bool inside = std::abs(st.pose.psi - target) < deg2rad(1.0);
    if (inside && settled_at < 0) settled_at = i * 0.05;
    if (!inside) settled_at = -1.0;
    CHECK(std::abs(st.bank) <= env.phi_max);
  }
  CHECK(settled_at > 0.0);
  CHECK(settled_at < 60.0);
  CHECK(rad2deg(peak - target) < 5.0);
}

TEST_CASE("track hold heading error points back to the track") {
  Directive d;
  d.kind = DirectiveKind::kTrackHold;
  d.track = {0, 0, kPi / 2};
  // Pursuer left of an eastbound track: steer right (positive error).
  CHECK(heading_error(d, {-15000, 3000, kPi / 2}, {}) > 0.0);
  CHECK(heading_error(d, {-15000, -3000, kPi / 2}, {}) < 0.0);
  CHECK(heading_error(d, {-15000, 100000, kPi / 2}, {}) == doctest::Approx(deg2rad(30.0)));
}

TEST_CASE("turn heading error keeps the commanded direction") {
  Directive d;
  d.kind = DirectiveKind::kTurn;
  d.eps = -1;  // right turn of 200 deg from north
  d.target_heading = wrap_pi(deg2rad(200.0));
  CHECK(heading_error(d, {0, 0, 0.0}, {}) > 0.0);
  d.eps = 1;
  d.target_heading = wrap_pi(-deg2rad(200.0));
  CHECK(heading_error(d, {0, 0, 0.0}, {}) < 0.0);
}

TEST_CASE("pursuer starting converged finishes at t = 0 with no sway") {
  const NetworkParams net = constant_plan({{{1, 1.0, 0.0}}, kR});
  const SimTrace t = run_scenario(cotrack(), net, false);
  CHECK(t.metrics.converged);
  CHECK(t.metrics.t_f == 0.0);
  CHECK(t.metrics.sway == 0.0);
  CHECK(t.records.size() == 1);
}

TEST_CASE("straight co-track flight has zero sway and exact speed") {
  Scenario s = cotrack();
  s.pursuer.pose.x = -40000;  // converged only after closing the gap
  s.pursuer.speed = 240.0;
  s.duration_cap = 200.0;
  const NetworkParams net = constant_plan({{{1, 0.0, 20000.0}}, kR});
  const SimTrace t = run_scenario(s, net, false);
  CHECK(t.metrics.sway == 0.0);
  for (std::size_t i = 1; i < t.records.size(); ++i) {
    const auto& a = t.records[i - 1].pursuer.pose;
    const auto& b = t.records[i].pursuer.pose;
    CHECK(std::hypot(b.x - a.x, b.y - a.y) / s.dt == doctest::Approx(240.0));
  }
  CHECK(trace_metrics(t) == t.metrics);
}

TEST_CASE("records are uniform, bank limited, and metrics recompute") {
  Scenario s = cotrack();
  s.pursuer = {{-40000, 30000, kPi / 2}, 240.0};
  s.duration_cap = 300.0;
  s.events.push_back({LeaderEvent::Type::kSetHeading, deg2rad(135.0), 60.0, 0.0});
  const NetworkParams net = constant_plan({{{-1, kPi / 3, 5000.0}}, kR});
  const SimTrace t = run_scenario(s, net, true);
  for (std::size_t i = 0; i < t.records.size(); ++i) {
    CHECK(t.records[i].t == doctest::Approx(i * s.dt));
    CHECK(std::abs(t.records[i].pursuer.bank) <= s.bank.phi_max);
    CHECK(std::abs(t.records[i].leader.bank) <= s.bank.phi_max);
  }
  CHECK(trace_metrics(t) == t.metrics);
  double m = INFINITY;
  for (const auto& r : t.records) m = std::min(m, r.separation);
  CHECK(t.metrics.min_separation == m);
  // The leader actually turned.
  CHECK(t.records.back().leader.pose.psi == doctest::Approx(deg2rad(135.0)).epsilon(1e-2));
}

TEST_CASE("identical runs give identical traces") {
  Scenario s = cotrack();
  s.pursuer = {{-40000, 30000, kPi / 2}, 240.0};
  s.duration_cap = 120.0;
  const NetworkParams net = constant_plan({{{-1, kPi / 3, 5000.0}}, kR});
  const SimTrace a = run_scenario(s, net, false);
  const SimTrace b = run_scenario(s, net, false);
  CHECK(a.records == b.records);
  CHECK(trace_csv(a) == trace_csv(b));
}

TEST_CASE("announced intent gives a ghost track ahead of the turn") {
  Scenario s = cotrack();
  s.pursuer = {{-40000, 30000, kPi / 2}, 240.0};
  s.events.push_back({LeaderEvent::Type::kSetHeading, deg2rad(135.0), 100.0, 0.0});
  const NetworkParams net = constant_plan({{{-1, kPi / 3, 5000.0}}, kR});
  Simulation sim(s, net, true);
  const auto ghost = sim.announced_track();
  REQUIRE(ghost);
  CHECK(ghost->leader.psi == doctest::Approx(deg2rad(135.0)));
  // Unannounced events carry no intent.
  s.events[0].announce_time.reset();
  Simulation plain(s, net, true);
  CHECK_FALSE(plain.announced_track());
}

TEST_CASE("ghost track meets the leader once its turn is flown") {
  Scenario s = cotrack();
  s.pursuer = {{-40000, 30000, kPi / 2}, 240.0};
  s.events.push_back({LeaderEvent::Type::kSetHeading, deg2rad(135.0), 20.0, 0.0});
  const NetworkParams net = constant_plan({{{-1, kPi / 3, 5000.0}}, kR});
  Simulation sim(s, net, true);
  const TrackReference first = *sim.announced_track();
  // 45 deg at R(200 m/s) = 6475 m takes about 40 s; lag adds a few seconds.
  while (sim.time() < 120.0 && sim.announced_track()) sim.step();
  CHECK_FALSE(sim.announced_track());
  // Where the ghost predicted the leader to be now versus where it is.
  const double t = sim.time();
  const PlanarPose predicted = fly_straight(first.leader, 200.0 * t);
  const PlanarPose actual = sim.current().leader.pose;
  CHECK(std::hypot(predicted.x - actual.x, predicted.y - actual.y) < 1500.0);
}

TEST_CASE("scenario JSON round trip and schema errors") {
  Scenario s = cotrack();
  s.name = "rt";
  s.events.push_back({LeaderEvent::Type::kSetHeading, 2.0, 30.0, 10.0});
  s.events.push_back({LeaderEvent::Type::kSetSpeed, 220.0, 40.0, std::nullopt});
  const Scenario back = scenario_from_json(scenario_to_json(s));
  CHECK(scenario_to_json(back) == scenario_to_json(s));
  CHECK(back.events.size() == 2);
  CHECK(*back.events[0].announce_time == 10.0);
  auto schema = [](const std::string& text) {
    try {
      scenario_from_json(text);
    } catch (const Error& e) {
      return e.kind() == ErrorKind::kSchema;
    }
    return false;
  };
  CHECK(schema("[1,2]"));
  CHECK(schema(R"({"leader":{"x_m":0,"y_m":0,"heading_rad":0,"speed_mps":200}})"));
  const std::string base =
      R"("leader":{"x_m":0,"y_m":0,"heading_rad":0,"speed_mps":200},)"
      R"("pursuer":{"x_m":0,"y_m":-20000,"heading_rad":0,"speed_mps":240})";
  CHECK_FALSE(schema("{" + base + "}"));
  CHECK(schema("{" + base +
               R"(,"events":[{"type":"set_heading","value":1,"execute_time_s":50},)"
               R"({"type":"set_heading","value":1,"execute_time_s":10}]})"));
  CHECK(schema("{" + base +
               R"(,"events":[{"type":"set_heading","value":1,"execute_time_s":5,"announce_time_s":9}]})"));
  CHECK(schema("{" + base + R"(,"events":[{"type":"jump","value":1,"execute_time_s":5}]})"));
  CHECK(schema("{" + base + R"(,"dt_s":-1})"));
}

TEST_CASE("metrics line format") {
  SimMetrics m;
  m.converged = true;
  m.t_f = 12.5;
  m.min_separation = 9999.0;
  m.sway = 0.25;
  CHECK(metrics_line(m) == "converged=true t_f=12.50 min_sep=9999.0 sway=0.2500");
}
