#include <algorithm>
#include <cmath>

#include "json.hpp"
#include "relguide/angles.hpp"
#include "relguide/live_bridge.hpp"

namespace relguide {

using nlohmann::json;

std::string command_type(CommandKind k) {
  switch (k) {
    case CommandKind::kSetLeaderHeading: return "set_leader_heading";
    case CommandKind::kSetLeaderSpeed: return "set_leader_speed";
    case CommandKind::kAnnounceIntent: return "announce_intent";
    case CommandKind::kToggleIntentMode: return "toggle_intent_mode";
    case CommandKind::kPause: return "pause";
    case CommandKind::kResume: return "resume";
    case CommandKind::kReset: return "reset";
  }
  return "unknown";
}

bool LiveCommand::same_effect(const LiveCommand& o) const {
  return kind == o.kind && value == o.value && execute_time == o.execute_time && intent == o.intent;
}

std::string error_frame(const std::string& message, const std::string& request_id) {
  json j = {{"type", "error"}, {"version", kProtocolVersion}, {"message", message}};
  if (!request_id.empty()) j["id"] = request_id;
  return j.dump();
}

namespace {

double finite_number(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number()) {
    throw std::invalid_argument(std::string("'") + key + "' must be a number");
  }
  const double v = j.at(key).get<double>();
  if (!std::isfinite(v)) throw std::invalid_argument(std::string("'") + key + "' must be finite");
  return v;
}

}  // namespace

ParsedCommand parse_command(const std::string& text, const std::string& client) {
  ParsedCommand out;
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    out.error = "command is not a JSON object";
    return out;
  }
  if (j.contains("id")) {
    const json& id = j.at("id");
    out.request_id = id.is_string() ? id.get<std::string>() : id.dump();
  }
  if (!j.contains("type") || !j.at("type").is_string()) {
    out.error = "command needs a string 'type'";
    return out;
  }
  const std::string type = j.at("type").get<std::string>();
  LiveCommand cmd;
  cmd.client = client;
  cmd.request_id = out.request_id;
  try {
    if (type == "set_leader_heading") {
      cmd.kind = CommandKind::kSetLeaderHeading;
      cmd.value = wrap_pi(finite_number(j, "value"));
    } else if (type == "set_leader_speed") {
      cmd.kind = CommandKind::kSetLeaderSpeed;
      cmd.value = finite_number(j, "value");
      if (!(cmd.value > 0.0)) throw std::invalid_argument("speed must be positive");
    } else if (type == "announce_intent") {
      cmd.kind = CommandKind::kAnnounceIntent;
      cmd.value = wrap_pi(finite_number(j, "heading"));
      cmd.execute_time = finite_number(j, "execute_time");
    } else if (type == "toggle_intent_mode") {
      cmd.kind = CommandKind::kToggleIntentMode;
      if (j.contains("value")) {
        if (!j.at("value").is_boolean()) throw std::invalid_argument("'value' must be a boolean");
        cmd.intent = j.at("value").get<bool>();
      }
    } else if (type == "pause") {
      cmd.kind = CommandKind::kPause;
    } else if (type == "resume") {
      cmd.kind = CommandKind::kResume;
    } else if (type == "reset") {
      cmd.kind = CommandKind::kReset;
    } else {
      throw std::invalid_argument("unknown command type '" + type + "'");
    }
  } catch (const std::invalid_argument& e) {
    out.error = type + ": " + e.what();
    return out;
  }
  out.command = cmd;
  return out;
}

LiveSession::LiveSession(Scenario scenario, const NetworkParams& params, bool intent_mode,
                         double time_scale)
    : scenario_(std::move(scenario)),
      params_(&params),
      initial_intent_(intent_mode),
      time_scale_(time_scale) {
  if (!(time_scale > 0.0 && time_scale <= kMaxTimeScale)) {
    throw std::invalid_argument("time scale must be in (0, 20]");
  }
  frame_every_ = static_cast<std::size_t>(
      std::max(1L, std::lround(kFramePeriod * time_scale_ / scenario_.dt)));
  sim_ = std::make_unique<Simulation>(scenario_, *params_, initial_intent_);
  records_.push_back(sim_->current());
}

void LiveSession::submit(LiveCommand cmd) {
  std::lock_guard<std::mutex> lock(mutex_);
  queue_.push_back(std::move(cmd));
}

void LiveSession::apply(const LiveCommand& cmd) {
  switch (cmd.kind) {
    case CommandKind::kSetLeaderHeading: sim_->set_leader_heading(cmd.value); break;
    case CommandKind::kSetLeaderSpeed: sim_->set_leader_speed(cmd.value); break;
    case CommandKind::kAnnounceIntent: sim_->announce_intent(cmd.value, cmd.execute_time); break;
    case CommandKind::kToggleIntentMode:
      sim_->set_intent_mode(cmd.intent ? *cmd.intent : !sim_->intent_mode());
      break;
    case CommandKind::kPause: paused_ = true; break;
    case CommandKind::kResume: paused_ = false; break;
    case CommandKind::kReset:
      sim_ = std::make_unique<Simulation>(scenario_, *params_, initial_intent_);
      records_.assign(1, sim_->current());
      paused_ = false;
      break;
  }
}

std::vector<Reply> LiveSession::advance() {
  std::deque<LiveCommand> batch;
  {
    std::lock_guard<std::mutex> lock(mutex_);
    batch.swap(queue_);
  }
  std::vector<Reply> replies;
  std::vector<LiveCommand> applied;
  for (const auto& cmd : batch) {
    const bool duplicate = std::any_of(applied.begin(), applied.end(),
                                       [&](const LiveCommand& a) { return a.same_effect(cmd); });
    if (!duplicate) {
      apply(cmd);
      applied.push_back(cmd);
    }
    json ack = {{"type", "ack"},
                {"version", kProtocolVersion},
                {"command", command_type(cmd.kind)},
                {"tick", sim_->tick()},
                {"t", sim_->time()},
                {"duplicate", duplicate}};
    if (!cmd.request_id.empty()) ack["id"] = cmd.request_id;
    replies.push_back(Reply{cmd.client, ack.dump()});
  }
  if (!paused_) {
    sim_->step();
    records_.push_back(sim_->current());
  }
  return replies;
}

namespace {

json aircraft_json(const AircraftState& a) {
  return {{"x", a.pose.x},         {"y", a.pose.y},       {"heading", a.pose.psi},
          {"speed", a.speed},      {"bank", a.bank},      {"bank_rate", a.bank_rate}};
}

}  // namespace

std::string LiveSession::frame_json() const {
  const SimRecord& r = sim_->current();
  const GuidanceOutput& g = sim_->last_guidance();
  json plan = json::array();
  for (const auto& t : g.plan.triplets) plan.push_back({{"eps", t.eps}, {"theta", t.theta}, {"len", t.len}});
  json poly = json::array();
  for (const auto& v : g.polyline) poly.push_back({v.x, v.y});
  const Directive& d = r.directive;
  json intent = nullptr;
  if (const auto track = sim_->announced_track()) {
    intent = {{"x", track->leader.x}, {"y", track->leader.y}, {"heading", track->leader.psi}};
  }
  const SimMetrics& m = sim_->metrics();
  json j = {
      {"type", "frame"},
      {"version", kProtocolVersion},
      {"tick", sim_->tick()},
      {"t", r.t},
      {"leader", aircraft_json(r.leader)},
      {"pursuer", aircraft_json(r.pursuer)},
      {"separation", r.separation},
      {"directive",
       {{"code", directive_code(d)},
        {"eps", d.eps},
        {"turn_angle", d.turn_angle},
        {"target_heading", d.target_heading},
        {"turn_rate", d.turn_rate}}},
      {"relative", {{"dx", g.relative.dx}, {"dy", g.relative.dy}, {"dpsi", g.relative.dpsi}}},
      {"in_region", g.in_region},
      {"plan", plan},
      {"polyline", poly},
      {"intent_track", intent},
      {"intent_mode", sim_->intent_mode()},
      {"paused", paused_},
      {"converged", sim_->converged()},
      {"metrics",
       {{"t_f", m.t_f}, {"min_separation", m.min_separation}, {"sway", m.sway}}},
  };
  return j.dump();
}

std::string LiveSession::hello_json() const {
  const Scenario& s = scenario_;
  json j = {{"type", "hello"},
            {"version", kProtocolVersion},
            {"scenario", s.name},
            {"dt", s.dt},
            {"frame_period", kFramePeriod},
            {"time_scale", time_scale_},
            {"min_separation", s.min_separation},
            {"capture_distance", s.capture_distance},
            {"phi_max", s.bank.phi_max}};
  return j.dump();
}

}  // namespace relguide
