#include <algorithm>
#include <array>
#include <functional>
#include <stdexcept>
#include <vector>
#include <chrono>
#include <cmath>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast.hpp>
#include <boost/beast/websocket.hpp>

#include "doctest.h"
#include "json.hpp"
#include "relguide/angles.hpp"
#include "relguide/live_bridge.hpp"

using namespace relguide;
using nlohmann::json;

namespace {

// A network whose first plan slot turns toward the track in proportion to
// the cross-track offset, so its plan depends on the leader's track.
NetworkParams steering_network() {
  NetworkParams p = make_network({3, 1, kOutputs}, 1, 12591.0);
  std::fill(p.values.begin(), p.values.end(), 0.0);
  p.input = {{0, 0, 0}, {1e4, 1e4, 1.0}};
  p.output.offset = encode_plan({{{1, 0.5, 8000.0}}, 12591.0});
  p.values[p.weight_offset(0) + 1] = 1.0;  // hidden = tanh(dy / 1e4)
  p.values[p.weight_offset(1) + 1] = 0.3;  // theta of slot 0
  p.values[p.weight_offset(1) + 2] = 4000; // len of slot 0
  p.input_min = {-1e6, -1e6, -4.0};
  p.input_max = {1e6, 1e6, 4.0};
  return p;
}

Scenario scenario() {
  Scenario s;
  s.leader = {{0, 0, kPi / 2}, 200.0};
  s.pursuer = {{-40000, 40000, kPi / 2}, 240.0};
  s.duration_cap = 600.0;
  return s;
}

LiveCommand cmd(CommandKind k, double value = 0.0) {
  LiveCommand c;
  c.kind = k;
  c.value = value;
  return c;
}

}  // namespace

TEST_CASE("idle session reproduces the batch trace") {
  const NetworkParams net = steering_network();
  const SimTrace batch = run_scenario(scenario(), net, false);
  LiveSession live(scenario(), net, false, 20.0);
  const std::size_t n = std::min<std::size_t>(batch.records.size(), 2000);
  while (live.records().size() < n) live.advance();
  for (std::size_t i = 0; i < n; ++i) REQUIRE(live.records()[i] == batch.records[i]);
}

TEST_CASE("frame cadence follows the time scale") {
  const NetworkParams net = steering_network();
  CHECK(LiveSession(scenario(), net, false, 1.0).frame_every() == 4);
  CHECK(LiveSession(scenario(), net, false, 20.0).frame_every() == 80);
  CHECK_THROWS_AS(LiveSession(scenario(), net, false, 50.0), std::invalid_argument);
}

TEST_CASE("heading command re-plans within two simulated seconds") {
  const NetworkParams net = steering_network();
  LiveSession live(scenario(), net, false);
  for (int i = 0; i < 100; ++i) live.advance();
  const json before = json::parse(live.frame_json());
  live.submit(cmd(CommandKind::kSetLeaderHeading, deg2rad(135.0)));
  const double t0 = live.sim().time();
  bool changed = false;
  while (live.sim().time() < t0 + 2.0 && !changed) {
    live.advance();
    changed = json::parse(live.frame_json())["polyline"] != before["polyline"];
  }
  CHECK(changed);
}

TEST_CASE("pause then resume leaves no gap in simulated time") {
  const NetworkParams net = steering_network();
  LiveSession live(scenario(), net, false);
  for (int i = 0; i < 10; ++i) live.advance();
  const std::size_t tick = live.sim().tick();
  live.submit(cmd(CommandKind::kPause));
  for (int i = 0; i < 50; ++i) live.advance();
  CHECK(live.paused());
  CHECK(live.sim().tick() == tick);
  live.submit(cmd(CommandKind::kResume));
  live.advance();
  CHECK(live.sim().tick() == tick + 1);
  // Ticks still line up with the batch trace.
  const SimTrace batch = run_scenario(scenario(), net, false);
  CHECK(live.records().back() == batch.records[tick + 1]);
}

TEST_CASE("identical commands in one tick apply once") {
  const NetworkParams net = steering_network();
  LiveSession live(scenario(), net, false);
  LiveCommand a = cmd(CommandKind::kToggleIntentMode);
  a.client = "a";
  LiveCommand b = a;
  b.client = "b";
  live.submit(a);
  live.submit(b);
  const auto replies = live.advance();
  REQUIRE(replies.size() == 2);
  CHECK(live.sim().intent_mode());
  CHECK(json::parse(replies[1].text)["duplicate"] == true);
  CHECK(replies[1].client == "b");
}

TEST_CASE("reset restores the initial state") {
  const NetworkParams net = steering_network();
  LiveSession live(scenario(), net, false);
  const SimRecord first = live.records().front();
  for (int i = 0; i < 30; ++i) live.advance();
  live.submit(cmd(CommandKind::kReset));
  live.advance();
  CHECK(live.sim().tick() == 1);
  CHECK(live.records().size() == 2);
  CHECK(live.records().front() == first);
}

TEST_CASE("scripted command replay is deterministic") {
  const NetworkParams net = steering_network();
  auto run = [&] {
    LiveSession live(scenario(), net, false);
    for (int i = 0; i < 600; ++i) {
      if (i == 100) live.submit(cmd(CommandKind::kSetLeaderHeading, deg2rad(120.0)));
      if (i == 250) live.submit(cmd(CommandKind::kSetLeaderSpeed, 210.0));
      if (i == 300) {
        LiveCommand c = cmd(CommandKind::kAnnounceIntent, deg2rad(60.0));
        c.execute_time = 40.0;
        live.submit(c);
      }
      live.advance();
    }
    return live.records();
  };
  CHECK(run() == run());
}

TEST_CASE("command parsing and validation") {
  ParsedCommand p = parse_command(R"({"type":"set_leader_heading","value":7.0,"id":"q1"})", "c1");
  REQUIRE(p.command);
  CHECK(p.command->value == doctest::Approx(wrap_pi(7.0)));
  CHECK(p.command->client == "c1");
  CHECK(p.command->request_id == "q1");
  CHECK(parse_command(R"({"type":"announce_intent","heading":2.0,"execute_time":30})", "c").command);
  CHECK(parse_command(R"({"type":"toggle_intent_mode","value":true})", "c").command->intent == true);
  for (const char* t : {"pause", "resume", "reset"}) {
    CHECK(parse_command(std::string(R"({"type":")") + t + "\"}", "c").command);
  }
  for (const char* bad : {"nope", "[]", R"({"value":1})", R"({"type":"fly"})",
                          R"({"type":"set_leader_speed","value":-3})",
                          R"({"type":"set_leader_heading"})",
                          R"({"type":"set_leader_heading","value":"east"})",
                          R"({"type":"announce_intent","heading":1})",
                          R"({"type":"toggle_intent_mode","value":3})"}) {
    const ParsedCommand q = parse_command(bad, "c");
    CHECK_FALSE(q.command);
    CHECK_FALSE(q.error.empty());
  }
  const json err = json::parse(error_frame("bad", "q9"));
  CHECK(err["type"] == "error");
  CHECK(err["id"] == "q9");
  CHECK(err["version"] == kProtocolVersion);
}

TEST_CASE("frame carries the documented fields") {
  const NetworkParams net = steering_network();
  LiveSession live(scenario(), net, false);
  live.advance();
  const json f = json::parse(live.frame_json());
  for (const char* key : {"type", "version", "tick", "t", "leader", "pursuer", "separation",
                          "directive", "relative", "in_region", "plan", "polyline", "intent_track",
                          "intent_mode", "paused", "converged", "metrics"}) {
    CHECK_MESSAGE(f.contains(key), key);
  }
  CHECK(f["type"] == "frame");
  const json h = json::parse(live.hello_json());
  CHECK(h["type"] == "hello");
  CHECK(h["frame_period"] == doctest::Approx(0.2));
}

TEST_CASE("websocket client steers the leader and sees a new plan") {
  namespace asio = boost::asio;
  namespace beast = boost::beast;
  namespace websocket = beast::websocket;
  const NetworkParams net = steering_network();
  ServeOptions opts;
  opts.address = "127.0.0.1";
  opts.port = 0;
  opts.time_scale = 5.0;  // one frame per simulated second
  LiveServer server(scenario(), net, opts);
  const unsigned short port = server.start();

  asio::io_context ioc;
  asio::ip::tcp::resolver resolver(ioc);
  websocket::stream<asio::ip::tcp::socket> ws(ioc);
  asio::connect(ws.next_layer(), resolver.resolve("127.0.0.1", std::to_string(port)));
  ws.handshake("127.0.0.1", "/ws");
  auto read = [&] {
    beast::flat_buffer buf;
    ws.read(buf);
    return json::parse(beast::buffers_to_string(buf.data()));
  };
  CHECK(read()["type"] == "hello");
  json frame;
  do frame = read();
  while (frame["type"] != "frame" || frame["t"].get<double>() < 5.0);
  const json before = frame["polyline"];

  ws.write(asio::buffer(std::string("{garbage")));
  bool saw_error = false;
  for (int i = 0; i < 20 && !saw_error; ++i) saw_error = read()["type"] == "error";
  CHECK(saw_error);

  ws.write(asio::buffer(json{{"type", "set_leader_heading"}, {"value", deg2rad(135.0)}, {"id", "h"}}.dump()));
  double applied_at = -1.0;
  bool changed = false;
  for (int i = 0; i < 200 && !changed; ++i) {
    const json m = read();
    if (m["type"] == "ack" && m["id"] == "h") applied_at = m["t"].get<double>();
    if (m["type"] == "frame" && applied_at >= 0.0) {
      if (m["t"].get<double>() > applied_at + 2.0 + 1e-9) break;
      changed = m["polyline"] != before;
    }
  }
  CHECK(applied_at >= 0.0);
  CHECK(changed);
  ws.close(websocket::close_code::normal);
  server.stop();
}

TEST_CASE("http serves a page on the same port") {
  namespace asio = boost::asio;
  namespace beast = boost::beast;
  namespace http = beast::http;
  const NetworkParams net = steering_network();
  ServeOptions opts;
  opts.address = "127.0.0.1";
  opts.port = 0;
  LiveServer server(scenario(), net, opts);
  const unsigned short port = server.start();
  asio::io_context ioc;
  asio::ip::tcp::resolver resolver(ioc);
  beast::tcp_stream stream(ioc);
  stream.connect(resolver.resolve("127.0.0.1", std::to_string(port)));
  http::request<http::string_body> req{http::verb::get, "/", 11};
  req.set(http::field::host, "127.0.0.1");
  http::write(stream, req);
  beast::flat_buffer buf;
  http::response<http::string_body> res;
  http::read(stream, buf, res);
  CHECK(res.result() == http::status::ok);
  CHECK(res.body().find("/ws") != std::string::npos);
  server.stop();
}
