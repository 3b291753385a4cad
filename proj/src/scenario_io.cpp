#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "relguide/errors.hpp"
#include "relguide/flight_sim.hpp"

namespace relguide {

using nlohmann::json;

namespace {

double number(const json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number()) throw schema_error(std::string("scenario: '") + key + "' must be a number");
  return v.get<double>();
}

double required(const json& j, const char* key) {
  if (!j.contains(key)) throw schema_error(std::string("scenario: missing '") + key + "'");
  return number(j, key, 0.0);
}

const json& object(const json& j, const char* key) {
  static const json empty = json::object();
  if (!j.contains(key)) return empty;
  const json& v = j.at(key);
  if (!v.is_object()) throw schema_error(std::string("scenario: '") + key + "' must be an object");
  return v;
}

AircraftInit aircraft(const json& j, const char* key) {
  if (!j.contains(key)) throw schema_error(std::string("scenario: missing '") + key + "'");
  const json& a = object(j, key);
  AircraftInit out;
  out.pose.x = required(a, "x_m");
  out.pose.y = required(a, "y_m");
  out.pose.psi = required(a, "heading_rad");
  out.speed = required(a, "speed_mps");
  return out;
}

json aircraft_json(const AircraftInit& a) {
  return {{"x_m", a.pose.x}, {"y_m", a.pose.y}, {"heading_rad", a.pose.psi},
          {"speed_mps", a.speed}};
}

}  // namespace

void validate_scenario(const Scenario& s) {
  auto finite = [](double v) { return std::isfinite(v); };
  if (!(s.leader.speed > 0.0) || !(s.pursuer.speed > 0.0)) {
    throw schema_error("scenario: speeds must be positive");
  }
  if (!finite(s.leader.pose.x) || !finite(s.leader.pose.y) || !finite(s.leader.pose.psi) ||
      !finite(s.pursuer.pose.x) || !finite(s.pursuer.pose.y) || !finite(s.pursuer.pose.psi)) {
    throw schema_error("scenario: poses must be finite");
  }
  if (!(s.bank.phi_max > 0.0 && s.bank.phi_max < 1.5) || !(s.bank.phi_min < 0.0) ||
      !(s.bank.phi_min > -1.5) || !(s.bank.g > 0.0)) {
    throw schema_error("scenario: bank envelope must straddle zero inside (-1.5, 1.5) rad");
  }
  if (!(s.min_separation > 0.0) || !(s.capture_distance >= s.min_separation)) {
    throw schema_error("scenario: need 0 < min_separation <= capture_distance");
  }
  if (!(s.dt > 0.0) || !(s.guidance_period >= s.dt) || !(s.duration_cap > 0.0)) {
    throw schema_error("scenario: need dt > 0, guidance_period >= dt, duration_cap > 0");
  }
  if (!(s.gains.tau_bank > 0.0)) throw schema_error("scenario: tau_bank must be positive");
  if (!(s.track_hold.lookahead > 0.0)) throw schema_error("scenario: lookahead must be positive");
  double last = -INFINITY;
  for (const auto& e : s.events) {
    if (!finite(e.execute_time) || e.execute_time < last) {
      throw schema_error("scenario: events must be sorted by execute_time");
    }
    last = e.execute_time;
    if (e.announce_time && !(*e.announce_time <= e.execute_time)) {
      throw schema_error("scenario: announce_time must not exceed execute_time");
    }
    if (e.type == LeaderEvent::Type::kSetSpeed && !(e.value > 0.0)) {
      throw schema_error("scenario: set_speed value must be positive");
    }
  }
}

Scenario scenario_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw schema_error(std::string("scenario: ") + e.what());
  }
  if (!j.is_object()) throw schema_error("scenario: top level must be an object");
  Scenario s;
  if (j.contains("name")) {
    if (!j["name"].is_string()) throw schema_error("scenario: 'name' must be a string");
    s.name = j["name"].get<std::string>();
  }
  s.leader = aircraft(j, "leader");
  s.pursuer = aircraft(j, "pursuer");
  const json& bank = object(j, "bank");
  s.bank.phi_min = number(bank, "phi_min_rad", s.bank.phi_min);
  s.bank.phi_max = number(bank, "phi_max_rad", s.bank.phi_max);
  s.bank.g = number(bank, "g_mps2", s.bank.g);
  s.capture_distance = number(j, "capture_distance_m", s.capture_distance);
  s.min_separation = number(j, "min_separation_m", s.min_separation);
  s.dt = number(j, "dt_s", s.dt);
  s.guidance_period = number(j, "guidance_period_s", s.guidance_period);
  s.duration_cap = number(j, "duration_cap_s", s.duration_cap);

  const json& ap = object(j, "autopilot");
  s.gains.kp = number(ap, "kp", s.gains.kp);
  s.gains.ki = number(ap, "ki", s.gains.ki);
  s.gains.kd = number(ap, "kd", s.gains.kd);
  s.gains.tau_bank = number(ap, "tau_bank_s", s.gains.tau_bank);
  s.gains.integral_limit = number(ap, "integral_limit", s.gains.integral_limit);

  const json& th = object(j, "track_hold");
  s.track_hold.lookahead = number(th, "lookahead_m", s.track_hold.lookahead);
  s.track_hold.max_intercept = number(th, "max_intercept_rad", s.track_hold.max_intercept);

  const json& gd = object(j, "guidance");
  s.guidance.capture.cross_track = number(gd, "capture_cross_track_m", s.guidance.capture.cross_track);
  s.guidance.capture.heading = number(gd, "capture_heading_rad", s.guidance.capture.heading);
  s.guidance.min_turn = number(gd, "min_turn_rad", s.guidance.min_turn);
  s.guidance.polyline_step = number(gd, "polyline_step_rad", s.guidance.polyline_step);

  const json& cv = object(j, "thresholds");
  s.thresholds.cross_track = number(cv, "cross_track_m", s.thresholds.cross_track);
  s.thresholds.heading = number(cv, "heading_rad", s.thresholds.heading);
  s.thresholds.trailing_margin = number(cv, "trailing_margin_m", s.thresholds.trailing_margin);

  if (j.contains("events")) {
    if (!j["events"].is_array()) throw schema_error("scenario: 'events' must be an array");
    for (const json& ej : j["events"]) {
      if (!ej.is_object() || !ej.contains("type") || !ej["type"].is_string()) {
        throw schema_error("scenario: each event needs a string 'type'");
      }
      LeaderEvent e;
      const std::string type = ej["type"].get<std::string>();
      if (type == "set_heading") {
        e.type = LeaderEvent::Type::kSetHeading;
      } else if (type == "set_speed") {
        e.type = LeaderEvent::Type::kSetSpeed;
      } else {
        throw schema_error("scenario: unknown event type '" + type + "'");
      }
      e.value = required(ej, "value");
      e.execute_time = required(ej, "execute_time_s");
      if (ej.contains("announce_time_s")) e.announce_time = required(ej, "announce_time_s");
      s.events.push_back(e);
    }
  }
  validate_scenario(s);
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw missing_file(path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return scenario_from_json(buf.str());
}

std::string scenario_to_json(const Scenario& s) {
  json events = json::array();
  for (const auto& e : s.events) {
    json ej = {{"type", e.type == LeaderEvent::Type::kSetHeading ? "set_heading" : "set_speed"},
               {"value", e.value},
               {"execute_time_s", e.execute_time}};
    if (e.announce_time) ej["announce_time_s"] = *e.announce_time;
    events.push_back(ej);
  }
  json j = {
      {"name", s.name},
      {"leader", aircraft_json(s.leader)},
      {"pursuer", aircraft_json(s.pursuer)},
      {"bank", {{"phi_min_rad", s.bank.phi_min}, {"phi_max_rad", s.bank.phi_max}, {"g_mps2", s.bank.g}}},
      {"capture_distance_m", s.capture_distance},
      {"min_separation_m", s.min_separation},
      {"events", events},
      {"dt_s", s.dt},
      {"guidance_period_s", s.guidance_period},
      {"duration_cap_s", s.duration_cap},
      {"autopilot",
       {{"kp", s.gains.kp}, {"ki", s.gains.ki}, {"kd", s.gains.kd},
        {"tau_bank_s", s.gains.tau_bank}, {"integral_limit", s.gains.integral_limit}}},
      {"track_hold",
       {{"lookahead_m", s.track_hold.lookahead}, {"max_intercept_rad", s.track_hold.max_intercept}}},
      {"guidance",
       {{"capture_cross_track_m", s.guidance.capture.cross_track},
        {"capture_heading_rad", s.guidance.capture.heading},
        {"min_turn_rad", s.guidance.min_turn},
        {"polyline_step_rad", s.guidance.polyline_step}}},
      {"thresholds",
       {{"cross_track_m", s.thresholds.cross_track},
        {"heading_rad", s.thresholds.heading},
        {"trailing_margin_m", s.thresholds.trailing_margin}}},
  };
  return j.dump(2);
}

}  // namespace relguide
