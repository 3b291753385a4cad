#pragma once

// Two-aircraft closed-loop simulation: kinematic plants, a heading autopilot
// (slow guidance loop feeding a fast first-order bank loop) and network
// re-planning at a fixed guidance period.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "relguide/neural_guidance.hpp"

namespace relguide {

struct AircraftState {
  PlanarPose pose;
  double speed = 0.0;
  double bank = 0.0;
  double bank_rate = 0.0;
};

struct AutopilotGains {
  double kp = 3.0;          // bank (rad) per rad of heading error
  double ki = 0.0;          // bank per rad*s
  double kd = 6.0;          // bank per rad/s of heading rate
  double tau_bank = 2.0;    // inner loop time constant (s)
  double integral_limit = 0.2;
};

struct AutopilotMemory {
  double integral = 0.0;
};

struct AutopilotOutput {
  double bank_command = 0.0;
  double bank = 0.0;
  double bank_rate = 0.0;
};

/// One autopilot update: outer loop maps heading error to a bank command
/// clamped to the envelope; inner loop moves the bank toward it with a
/// first-order lag.
AutopilotOutput autopilot_step(double heading_error, const AircraftState& state,
                               const AutopilotGains& gains, const BankEnvelope& env, double dt,
                               AutopilotMemory& memory);

struct TrackHoldLaw {
  double lookahead = 6000.0;
  double max_intercept = 0.5235987755982988;  // 30 deg
};

/// Heading error that the autopilot should null for a directive.
double heading_error(const Directive& d, const PlanarPose& pose, const TrackHoldLaw& law);

struct AircraftInit {
  PlanarPose pose;
  double speed = 0.0;
};

struct LeaderEvent {
  enum class Type { kSetHeading, kSetSpeed };
  Type type = Type::kSetHeading;
  double value = 0.0;  // rad or m/s
  double execute_time = 0.0;
  std::optional<double> announce_time;
};

struct ConvergenceThresholds {
  double cross_track = 200.0;
  double heading = 0.03490658503988659;  // 2 deg
  double trailing_margin = 2000.0;       // accept trailing up to D + margin
};

struct Scenario {
  std::string name = "scenario";
  AircraftInit leader;
  AircraftInit pursuer;
  BankEnvelope bank;
  double capture_distance = 15000.0;
  double min_separation = 9260.0;
  std::vector<LeaderEvent> events;
  double dt = 0.05;
  double guidance_period = 1.0;
  double duration_cap = 3600.0;
  AutopilotGains gains;
  TrackHoldLaw track_hold;
  GuidanceConfig guidance;
  ConvergenceThresholds thresholds;

  ConvergenceSpec spec() const;
};

/// Throws schema_error on invalid fields.
void validate_scenario(const Scenario& s);
Scenario load_scenario(const std::string& path);
Scenario scenario_from_json(const std::string& text);
std::string scenario_to_json(const Scenario& s);

struct SimRecord {
  double t = 0.0;
  AircraftState leader;
  AircraftState pursuer;
  double separation = 0.0;
  Directive directive;
  double bank_command = 0.0;

  bool operator==(const SimRecord& o) const;
};

struct SimMetrics {
  bool converged = false;
  double t_f = 0.0;  // convergence time, or end time when not converged
  double min_separation = 0.0;
  double sway = 0.0;  // integral of |pursuer heading rate|

  bool operator==(const SimMetrics&) const = default;
};

struct SimTrace {
  std::vector<SimRecord> records;
  SimMetrics metrics;
  ConvergenceSpec spec;
  ConvergenceThresholds thresholds;
};

bool is_converged(const PlanarPose& leader, const PlanarPose& pursuer, const ConvergenceSpec& spec,
                  const ConvergenceThresholds& thr);

class Simulation {
 public:
  Simulation(Scenario scenario, const NetworkParams& params, bool intent_mode);

  /// Advances one plant step of scenario.dt.
  void step();

  std::size_t tick() const { return tick_; }
  double time() const;
  bool converged() const { return converged_; }
  const SimRecord& current() const { return current_; }
  const GuidanceOutput& last_guidance() const { return guidance_; }
  const SimMetrics& metrics() const { return metrics_; }
  const Scenario& scenario() const { return scenario_; }
  bool intent_mode() const { return intent_mode_; }

  void set_leader_heading(double heading);
  void set_leader_speed(double speed);
  /// Announces a heading change executed at `execute_time` (absolute).
  void announce_intent(double heading, double execute_time);
  void set_intent_mode(bool on) { intent_mode_ = on; }

  /// Final track the guidance plans against at this instant, if any.
  std::optional<TrackReference> announced_track() const;

 private:
  struct PendingEvent {
    LeaderEvent event;
    bool executed = false;
    bool completed = false;
    PlanarPose turn_pose;
    double turn_time = 0.0;
  };

  void rearm();
  void apply_due_events();
  void update_completion();
  void run_guidance();
  void record();

  Scenario scenario_;
  const NetworkParams* params_;
  bool intent_mode_;
  std::size_t tick_ = 0;
  std::size_t guidance_every_ = 20;
  AircraftState leader_;
  AircraftState pursuer_;
  double leader_heading_target_ = 0.0;
  AutopilotMemory leader_ap_;
  AutopilotMemory pursuer_ap_;
  double pursuer_bank_command_ = 0.0;
  std::vector<PendingEvent> events_;
  GuidanceOutput guidance_;
  SimRecord current_;
  SimMetrics metrics_;
  bool converged_ = false;
};

SimTrace run_scenario(const Scenario& scn, const NetworkParams& params, bool intent_mode);

/// Recomputes terminal metrics from the raw records.
SimMetrics trace_metrics(const SimTrace& trace);

/// CSV with header t_s,xl,yl,psil,xp,yp,psip,bank,d,directive.
void write_trace_csv(const SimTrace& trace, const std::string& path);
std::string trace_csv(const SimTrace& trace);
std::string metrics_line(const SimMetrics& m);

}  // namespace relguide
