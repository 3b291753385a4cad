#pragma once

// Real-time service around a Simulation. LiveSession holds the sim-side logic
// (command queue, tick-atomic application, frame snapshots) and has no
// networking, so it can be driven tick by tick. LiveServer puts it behind a
// WebSocket + static HTTP endpoint on one port.

#include <cstddef>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "relguide/flight_sim.hpp"

namespace relguide {

inline constexpr int kProtocolVersion = 1;
inline constexpr double kFramePeriod = 0.2;  // s wall clock, 5 Hz
inline constexpr double kMaxTimeScale = 20.0;

enum class CommandKind {
  kSetLeaderHeading,
  kSetLeaderSpeed,
  kAnnounceIntent,
  kToggleIntentMode,
  kPause,
  kResume,
  kReset,
};

std::string command_type(CommandKind k);

struct LiveCommand {
  CommandKind kind = CommandKind::kPause;
  double value = 0.0;         // heading (rad) or speed (m/s)
  double execute_time = 0.0;  // announce_intent only, absolute sim time
  std::optional<bool> intent; // toggle_intent_mode: explicit state, else flip
  std::string client;
  std::string request_id;

  /// Identity used for per-tick deduplication (ignores client and id).
  bool same_effect(const LiveCommand& o) const;
};

struct ParsedCommand {
  std::optional<LiveCommand> command;
  std::string error;  // set when command is empty
  std::string request_id;
};

/// Parses and validates one text frame. Headings come back wrapped to (-pi, pi].
ParsedCommand parse_command(const std::string& text, const std::string& client);

struct Reply {
  std::string client;
  std::string text;
};

std::string error_frame(const std::string& message, const std::string& request_id);

class LiveSession {
 public:
  LiveSession(Scenario scenario, const NetworkParams& params, bool intent_mode,
              double time_scale = 1.0);

  /// Thread-safe: queues a command for the next tick.
  void submit(LiveCommand cmd);

  /// Applies everything queued since the last call as one batch, then
  /// advances one plant step unless paused. Returns acknowledgements.
  std::vector<Reply> advance();

  /// Plant steps between broadcast frames for the configured time scale.
  std::size_t frame_every() const { return frame_every_; }
  double time_scale() const { return time_scale_; }
  bool paused() const { return paused_; }
  const Simulation& sim() const { return *sim_; }
  /// Records at every plant tick since the last reset.
  const std::vector<SimRecord>& records() const { return records_; }

  std::string frame_json() const;
  std::string hello_json() const;

 private:
  void apply(const LiveCommand& cmd);

  Scenario scenario_;
  const NetworkParams* params_;
  bool initial_intent_;
  double time_scale_;
  std::size_t frame_every_;
  std::unique_ptr<Simulation> sim_;
  std::vector<SimRecord> records_;
  bool paused_ = false;
  std::mutex mutex_;
  std::deque<LiveCommand> queue_;
};

struct ServeOptions {
  std::string address = "0.0.0.0";
  unsigned short port = 8080;  // 0 picks a free port
  double time_scale = 1.0;
  std::string ui_dir;  // static bundle root; a placeholder page when empty
  bool intent_mode = false;
};

/// Owns the network thread and the simulation thread.
class LiveServer {
 public:
  LiveServer(Scenario scenario, const NetworkParams& params, ServeOptions opts);
  ~LiveServer();
  LiveServer(const LiveServer&) = delete;
  LiveServer& operator=(const LiveServer&) = delete;

  /// Binds and starts both threads; returns the bound port.
  unsigned short start();
  void stop();
  /// Blocks until stop() or SIGINT/SIGTERM.
  void wait();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Convenience wrapper for the CLI: start, then wait for a signal.
void serve(const Scenario& scenario, const NetworkParams& params, const ServeOptions& opts);

}  // namespace relguide
