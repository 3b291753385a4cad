#include <atomic>
#include <chrono>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast.hpp>
#include <boost/beast/websocket.hpp>

#include "relguide/live_bridge.hpp"

namespace relguide {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

namespace {

constexpr const char* kPlaceholder =
    "<!doctype html><html><head><title>relguide live</title></head><body>"
    "<p>No UI bundle configured. Connect a WebSocket client to <code>/ws</code>.</p>"
    "</body></html>";

std::string mime_type(const std::string& ext) {
  static const std::map<std::string, std::string> types{
      {".html", "text/html"},        {".htm", "text/html"},   {".js", "application/javascript"},
      {".mjs", "application/javascript"}, {".css", "text/css"}, {".json", "application/json"},
      {".svg", "image/svg+xml"},     {".png", "image/png"},   {".ico", "image/x-icon"},
      {".map", "application/json"},  {".txt", "text/plain"}};
  const auto it = types.find(ext);
  return it == types.end() ? "application/octet-stream" : it->second;
}

class Hub;

class WsSession : public std::enable_shared_from_this<WsSession> {
 public:
  WsSession(tcp::socket socket, Hub& hub, std::string id)
      : ws_(std::move(socket)), hub_(hub), id_(std::move(id)) {}

  template <class Body>
  void run(http::request<Body>&& req);
  void send(std::shared_ptr<const std::string> text);
  const std::string& id() const { return id_; }

 private:
  void on_accept(beast::error_code ec);
  void do_read();
  void on_read(beast::error_code ec, std::size_t);
  void do_write();

  websocket::stream<beast::tcp_stream> ws_;
  Hub& hub_;
  std::string id_;
  beast::flat_buffer buffer_;
  std::deque<std::shared_ptr<const std::string>> outbox_;
};

class Hub {
 public:
  Hub(LiveSession& session, std::string hello) : session_(session), hello_(std::move(hello)) {}

  void join(const std::shared_ptr<WsSession>& s) {
    std::lock_guard<std::mutex> lock(mutex_);
    sessions_[s->id()] = s;
  }
  void leave(const std::string& id) {
    std::lock_guard<std::mutex> lock(mutex_);
    sessions_.erase(id);
  }
  void broadcast(const std::string& text) {
    auto shared = std::make_shared<const std::string>(text);
    std::lock_guard<std::mutex> lock(mutex_);
    for (auto& [id, weak] : sessions_) {
      if (auto s = weak.lock()) s->send(shared);
    }
  }
  void send_to(const std::string& id, const std::string& text) {
    std::lock_guard<std::mutex> lock(mutex_);
    const auto it = sessions_.find(id);
    if (it == sessions_.end()) return;
    if (auto s = it->second.lock()) s->send(std::make_shared<const std::string>(text));
  }
  void on_message(const std::string& client, const std::string& text) {
    ParsedCommand parsed = parse_command(text, client);
    if (!parsed.command) {
      send_to(client, error_frame(parsed.error, parsed.request_id));
      return;
    }
    session_.submit(*parsed.command);
  }
  const std::string& hello() const { return hello_; }
  std::string next_id() { return "c" + std::to_string(++counter_); }

 private:
  LiveSession& session_;
  std::string hello_;
  std::mutex mutex_;
  std::map<std::string, std::weak_ptr<WsSession>> sessions_;
  std::atomic<int> counter_{0};
};

template <class Body>
void WsSession::run(http::request<Body>&& req) {
  ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
  ws_.async_accept(req, beast::bind_front_handler(&WsSession::on_accept, shared_from_this()));
}

void WsSession::on_accept(beast::error_code ec) {
  if (ec) return;
  ws_.text(true);
  hub_.join(shared_from_this());
  send(std::make_shared<const std::string>(hub_.hello()));
  do_read();
}

void WsSession::do_read() {
  ws_.async_read(buffer_, beast::bind_front_handler(&WsSession::on_read, shared_from_this()));
}

void WsSession::on_read(beast::error_code ec, std::size_t) {
  if (ec) {
    hub_.leave(id_);
    return;
  }
  hub_.on_message(id_, beast::buffers_to_string(buffer_.data()));
  buffer_.consume(buffer_.size());
  do_read();
}

void WsSession::send(std::shared_ptr<const std::string> text) {
  asio::post(ws_.get_executor(), [self = shared_from_this(), text] {
    self->outbox_.push_back(text);
    if (self->outbox_.size() == 1) self->do_write();
  });
}

void WsSession::do_write() {
  ws_.async_write(asio::buffer(*outbox_.front()),
                  [self = shared_from_this()](beast::error_code ec, std::size_t) {
                    if (ec) {
                      self->hub_.leave(self->id_);
                      return;
                    }
                    self->outbox_.pop_front();
                    if (!self->outbox_.empty()) self->do_write();
                  });
}

class HttpSession : public std::enable_shared_from_this<HttpSession> {
 public:
  HttpSession(tcp::socket socket, Hub& hub, std::string ui_dir)
      : stream_(std::move(socket)), hub_(hub), ui_dir_(std::move(ui_dir)) {}

  void run() { do_read(); }

 private:
  void do_read() {
    req_ = {};
    stream_.expires_after(std::chrono::seconds(30));
    http::async_read(stream_, buffer_, req_,
                     beast::bind_front_handler(&HttpSession::on_read, shared_from_this()));
  }

  void on_read(beast::error_code ec, std::size_t) {
    if (ec) return;
    if (websocket::is_upgrade(req_)) {
      stream_.expires_never();
      std::make_shared<WsSession>(stream_.release_socket(), hub_, hub_.next_id())
          ->run(std::move(req_));
      return;
    }
    auto res = std::make_shared<http::response<http::string_body>>(respond());
    http::async_write(stream_, *res, [self = shared_from_this(), res](beast::error_code ec2, std::size_t) {
      if (ec2 || res->need_eof()) {
        beast::error_code ignored;
        self->stream_.socket().shutdown(tcp::socket::shutdown_send, ignored);
        return;
      }
      self->do_read();
    });
  }

  http::response<http::string_body> respond() {
    http::response<http::string_body> res{http::status::ok, req_.version()};
    res.set(http::field::server, "relguide");
    res.keep_alive(req_.keep_alive());
    std::string target(req_.target());
    target = target.substr(0, target.find('?'));
    if (req_.method() != http::verb::get && req_.method() != http::verb::head) {
      res.result(http::status::method_not_allowed);
      res.body() = "method not allowed\n";
    } else if (target.find("..") != std::string::npos || target.empty() || target[0] != '/') {
      res.result(http::status::bad_request);
      res.body() = "bad path\n";
    } else if (ui_dir_.empty()) {
      res.set(http::field::content_type, "text/html");
      res.body() = kPlaceholder;
    } else {
      if (target.back() == '/') target += "index.html";
      const std::filesystem::path path = std::filesystem::path(ui_dir_) / target.substr(1);
      std::ifstream in(path, std::ios::binary);
      if (!in) {
        res.result(http::status::not_found);
        res.set(http::field::content_type, "text/plain");
        res.body() = "not found\n";
      } else {
        std::ostringstream buf;
        buf << in.rdbuf();
        res.set(http::field::content_type, mime_type(path.extension().string()));
        res.body() = buf.str();
      }
    }
    res.prepare_payload();
    if (req_.method() == http::verb::head) res.body().clear();
    return res;
  }

  beast::tcp_stream stream_;
  Hub& hub_;
  std::string ui_dir_;
  beast::flat_buffer buffer_;
  http::request<http::string_body> req_;
};

class Listener : public std::enable_shared_from_this<Listener> {
 public:
  Listener(asio::io_context& ioc, tcp::endpoint ep, Hub& hub, std::string ui_dir)
      : ioc_(ioc), acceptor_(ioc), hub_(hub), ui_dir_(std::move(ui_dir)) {
    acceptor_.open(ep.protocol());
    acceptor_.set_option(asio::socket_base::reuse_address(true));
    acceptor_.bind(ep);
    acceptor_.listen(asio::socket_base::max_listen_connections);
  }

  unsigned short port() const { return acceptor_.local_endpoint().port(); }
  void run() { do_accept(); }
  void close() {
    beast::error_code ignored;
    acceptor_.close(ignored);
  }

 private:
  void do_accept() {
    acceptor_.async_accept(asio::make_strand(ioc_), [self = shared_from_this()](
                                                        beast::error_code ec, tcp::socket socket) {
      if (ec) return;
      std::make_shared<HttpSession>(std::move(socket), self->hub_, self->ui_dir_)->run();
      self->do_accept();
    });
  }

  asio::io_context& ioc_;
  tcp::acceptor acceptor_;
  Hub& hub_;
  std::string ui_dir_;
};

}  // namespace

struct LiveServer::Impl {
  Impl(Scenario scn, const NetworkParams& params, ServeOptions o)
      : opts(std::move(o)),
        session(std::move(scn), params, opts.intent_mode, opts.time_scale),
        hub(session, session.hello_json()) {}

  void sim_loop() {
    using clock = std::chrono::steady_clock;
    const auto period = std::chrono::duration_cast<clock::duration>(
        std::chrono::duration<double>(session.sim().scenario().dt / session.time_scale()));
    auto next = clock::now();
    std::size_t iteration = 0;
    hub.broadcast(session.frame_json());
    while (running.load()) {
      next += period;
      std::this_thread::sleep_until(next);
      for (const Reply& r : session.advance()) hub.send_to(r.client, r.text);
      if (++iteration % session.frame_every() == 0) hub.broadcast(session.frame_json());
    }
  }

  ServeOptions opts;
  LiveSession session;
  Hub hub;
  asio::io_context ioc{1};
  std::shared_ptr<Listener> listener;
  std::thread net_thread;
  std::thread sim_thread;
  std::atomic<bool> running{false};
  std::mutex stop_mutex;
  std::condition_variable stopped_cv;
  bool stopped = false;
};

LiveServer::LiveServer(Scenario scenario, const NetworkParams& params, ServeOptions opts)
    : impl_(std::make_unique<Impl>(std::move(scenario), params, std::move(opts))) {}

LiveServer::~LiveServer() { stop(); }

unsigned short LiveServer::start() {
  Impl& m = *impl_;
  const auto address = asio::ip::make_address(m.opts.address);
  m.listener = std::make_shared<Listener>(m.ioc, tcp::endpoint{address, m.opts.port}, m.hub,
                                          m.opts.ui_dir);
  m.listener->run();
  m.running = true;
  m.net_thread = std::thread([&m] { m.ioc.run(); });
  m.sim_thread = std::thread([&m] { m.sim_loop(); });
  return m.listener->port();
}

void LiveServer::stop() {
  Impl& m = *impl_;
  if (m.running.exchange(false)) {
    if (m.sim_thread.joinable()) m.sim_thread.join();
    asio::post(m.ioc, [&m] { m.listener->close(); });
    m.ioc.stop();
    if (m.net_thread.joinable()) m.net_thread.join();
  }
  {
    std::lock_guard<std::mutex> lock(m.stop_mutex);
    m.stopped = true;
  }
  m.stopped_cv.notify_all();
}

void LiveServer::wait() {
  Impl& m = *impl_;
  std::unique_lock<std::mutex> lock(m.stop_mutex);
  m.stopped_cv.wait(lock, [&m] { return m.stopped; });
}

void serve(const Scenario& scenario, const NetworkParams& params, const ServeOptions& opts) {
  LiveServer server(scenario, params, opts);
  server.start();
  asio::io_context signals_ioc;
  asio::signal_set signals(signals_ioc, SIGINT, SIGTERM);
  signals.async_wait([&](const beast::error_code&, int) { server.stop(); });
  signals_ioc.run();
}

}  // namespace relguide
