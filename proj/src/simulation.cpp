#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "relguide/angles.hpp"
#include "relguide/errors.hpp"
#include "relguide/flight_sim.hpp"

namespace relguide {

namespace {

// A heading event counts as flown once the leader is this close to it.
constexpr double kTurnCompleteTolerance = 0.008726646259971648;  // 0.5 deg

}  // namespace

ConvergenceSpec Scenario::spec() const {
  ConvergenceSpec s;
  s.capture_distance = capture_distance;
  s.min_separation = min_separation;
  s.leader_heading = kTrackHeading;
  s.speeds = SpeedPair{leader.speed, pursuer.speed};
  return s;
}

bool SimRecord::operator==(const SimRecord& o) const {
  auto same = [](const AircraftState& a, const AircraftState& b) {
    return a.pose.x == b.pose.x && a.pose.y == b.pose.y && a.pose.psi == b.pose.psi &&
           a.speed == b.speed && a.bank == b.bank && a.bank_rate == b.bank_rate;
  };
  return t == o.t && same(leader, o.leader) && same(pursuer, o.pursuer) &&
         separation == o.separation && directive == o.directive && bank_command == o.bank_command;
}

bool is_converged(const PlanarPose& leader, const PlanarPose& pursuer, const ConvergenceSpec& spec,
                  const ConvergenceThresholds& thr) {
  const RelativeState rel = relative_state(leader, pursuer);
  const double trail = -rel.dx;
  return std::abs(rel.dy) < thr.cross_track && std::abs(rel.dpsi) < thr.heading &&
         trail >= spec.min_separation && trail <= spec.capture_distance + thr.trailing_margin;
}

Simulation::Simulation(Scenario scenario, const NetworkParams& params, bool intent_mode)
    : scenario_(std::move(scenario)), params_(&params), intent_mode_(intent_mode) {
  validate_scenario(scenario_);
  guidance_every_ = static_cast<std::size_t>(
      std::max(1L, std::lround(scenario_.guidance_period / scenario_.dt)));
  leader_.pose = scenario_.leader.pose;
  leader_.pose.psi = wrap_pi(leader_.pose.psi);
  leader_.speed = scenario_.leader.speed;
  pursuer_.pose = scenario_.pursuer.pose;
  pursuer_.pose.psi = wrap_pi(pursuer_.pose.psi);
  pursuer_.speed = scenario_.pursuer.speed;
  leader_heading_target_ = leader_.pose.psi;
  for (const auto& e : scenario_.events) {
    PendingEvent pe;
    pe.event = e;
    events_.push_back(pe);
  }
  metrics_.min_separation = std::numeric_limits<double>::infinity();
  apply_due_events();
  run_guidance();
  record();
}

double Simulation::time() const { return static_cast<double>(tick_) * scenario_.dt; }

// Operator commands start a new maneuver, so the convergence latch re-arms.
void Simulation::rearm() {
  converged_ = false;
  metrics_.converged = false;
}

void Simulation::set_leader_heading(double heading) {
  leader_heading_target_ = wrap_pi(heading);
  rearm();
}

void Simulation::set_leader_speed(double speed) {
  if (!(speed > 0.0)) throw std::invalid_argument("leader speed must be positive");
  leader_.speed = speed;
  rearm();
}

void Simulation::announce_intent(double heading, double execute_time) {
  LeaderEvent e;
  e.type = LeaderEvent::Type::kSetHeading;
  e.value = wrap_pi(heading);
  e.execute_time = std::max(execute_time, time());
  e.announce_time = time();
  PendingEvent pe;
  pe.event = e;
  const auto pos = std::upper_bound(
      events_.begin(), events_.end(), e.execute_time,
      [](double t, const PendingEvent& p) { return t < p.event.execute_time; });
  events_.insert(pos, pe);
  rearm();
}

void Simulation::apply_due_events() {
  const double t = time();
  for (auto& pe : events_) {
    if (pe.executed || pe.event.execute_time > t + 1e-9) continue;
    pe.executed = true;
    pe.turn_pose = leader_.pose;
    pe.turn_time = t;
    if (pe.event.type == LeaderEvent::Type::kSetHeading) {
      leader_heading_target_ = wrap_pi(pe.event.value);
    } else {
      leader_.speed = pe.event.value;
      pe.completed = true;
    }
  }
}

void Simulation::update_completion() {
  for (auto& pe : events_) {
    if (pe.executed && !pe.completed &&
        std::abs(wrap_pi(leader_.pose.psi - pe.event.value)) < kTurnCompleteTolerance) {
      pe.completed = true;
    }
  }
}

std::optional<TrackReference> Simulation::announced_track() const {
  const double t = time();
  for (const auto& pe : events_) {
    if (pe.completed || pe.event.type != LeaderEvent::Type::kSetHeading) continue;
    if (!pe.event.announce_time || *pe.event.announce_time > t + 1e-9) continue;
    PlanarPose turn = pe.turn_pose;
    double turn_time = pe.turn_time;
    if (!pe.executed) {
      turn_time = pe.event.execute_time;
      turn = fly_straight(leader_.pose, leader_.speed * (turn_time - t));
    }
    const double delta = wrap_pi(pe.event.value - turn.psi);
    const double radius = min_turn_radius(leader_.speed, scenario_.bank.phi_max, scenario_.bank.g);
    const int eps = delta > 0.0 ? -1 : 1;
    PlanarPose end = fly_arc(turn, eps, std::abs(delta), radius);
    end.psi = wrap_pi(pe.event.value);
    const double end_time = turn_time + radius * std::abs(delta) / leader_.speed;
    return TrackReference{fly_straight(end, leader_.speed * (t - end_time)), leader_.speed};
  }
  return std::nullopt;
}

void Simulation::run_guidance() {
  std::optional<TrackReference> intent;
  if (intent_mode_) intent = announced_track();
  guidance_ = guidance_query(*params_, TrackReference{leader_.pose, leader_.speed}, pursuer_.pose,
                             pursuer_.speed, intent, scenario_.spec(), scenario_.guidance);
}

void Simulation::record() {
  current_.t = time();
  current_.leader = leader_;
  current_.pursuer = pursuer_;
  current_.separation =
      std::hypot(leader_.pose.x - pursuer_.pose.x, leader_.pose.y - pursuer_.pose.y);
  current_.directive = guidance_.directive;
  current_.bank_command = pursuer_bank_command_;
  metrics_.min_separation = std::min(metrics_.min_separation, current_.separation);
  if (!converged_ &&
      is_converged(leader_.pose, pursuer_.pose, scenario_.spec(), scenario_.thresholds)) {
    converged_ = true;
    metrics_.converged = true;
    metrics_.t_f = current_.t;
  }
  if (!converged_) metrics_.t_f = current_.t;
}

void Simulation::step() {
  const double dt = scenario_.dt;
  const BankEnvelope& env = scenario_.bank;

  const double leader_err = wrap_pi(leader_heading_target_ - leader_.pose.psi);
  const AutopilotOutput la = autopilot_step(leader_err, leader_, scenario_.gains, env, dt, leader_ap_);
  const double pursuer_err = heading_error(guidance_.directive, pursuer_.pose, scenario_.track_hold);
  const AutopilotOutput pa =
      autopilot_step(pursuer_err, pursuer_, scenario_.gains, env, dt, pursuer_ap_);

  leader_.bank = la.bank;
  leader_.bank_rate = la.bank_rate;
  pursuer_.bank = pa.bank;
  pursuer_.bank_rate = pa.bank_rate;
  pursuer_bank_command_ = pa.bank_command;

  const double psi_before = pursuer_.pose.psi;
  leader_.pose = step_pose(leader_.pose, leader_.speed,
                           bank_to_turn_rate(leader_.bank, leader_.speed, env.g), dt);
  pursuer_.pose = step_pose(pursuer_.pose, pursuer_.speed,
                            bank_to_turn_rate(pursuer_.bank, pursuer_.speed, env.g), dt);
  metrics_.sway += std::abs(wrap_pi(pursuer_.pose.psi - psi_before));

  ++tick_;
  apply_due_events();
  update_completion();
  if (tick_ % guidance_every_ == 0) run_guidance();
  record();
}

SimTrace run_scenario(const Scenario& scn, const NetworkParams& params, bool intent_mode) {
  Simulation sim(scn, params, intent_mode);
  SimTrace trace;
  trace.spec = scn.spec();
  trace.thresholds = scn.thresholds;
  trace.records.push_back(sim.current());
  const auto max_ticks = static_cast<std::size_t>(std::floor(scn.duration_cap / scn.dt + 1e-9));
  while (!sim.converged() && sim.tick() < max_ticks) {
    sim.step();
    trace.records.push_back(sim.current());
  }
  trace.metrics = sim.metrics();
  return trace;
}

SimMetrics trace_metrics(const SimTrace& trace) {
  if (trace.records.empty()) throw std::invalid_argument("trace_metrics: empty trace");
  SimMetrics m;
  m.min_separation = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < trace.records.size(); ++i) {
    const SimRecord& r = trace.records[i];
    m.min_separation = std::min(m.min_separation, r.separation);
    if (i > 0) {
      m.sway += std::abs(wrap_pi(r.pursuer.pose.psi - trace.records[i - 1].pursuer.pose.psi));
    }
    if (!m.converged &&
        is_converged(r.leader.pose, r.pursuer.pose, trace.spec, trace.thresholds)) {
      m.converged = true;
      m.t_f = r.t;
    }
  }
  if (!m.converged) m.t_f = trace.records.back().t;
  return m;
}

std::string trace_csv(const SimTrace& trace) {
  std::string out = "t_s,xl,yl,psil,xp,yp,psip,bank,d,directive\n";
  char buf[512];
  for (const auto& r : trace.records) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%s\n", r.t,
                  r.leader.pose.x, r.leader.pose.y, r.leader.pose.psi, r.pursuer.pose.x,
                  r.pursuer.pose.y, r.pursuer.pose.psi, r.pursuer.bank, r.separation,
                  directive_code(r.directive).c_str());
    out += buf;
  }
  return out;
}

void write_trace_csv(const SimTrace& trace, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw missing_file(path);
  out << trace_csv(trace);
}

std::string metrics_line(const SimMetrics& m) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "converged=%s t_f=%.2f min_sep=%.1f sway=%.4f",
                m.converged ? "true" : "false", m.t_f, m.min_separation, m.sway);
  return buf;
}

}  // namespace relguide
