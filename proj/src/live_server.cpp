// Copyright 2026 The coilsense Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "coilsense/live_server.hpp"

#include <sys/socket.h>

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include "coilsense/errors.hpp"

namespace coilsense::live {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

namespace {

std::string_view mime_type(const std::filesystem::path& p) {
  const auto ext = p.extension().string();
  if (ext == ".html" || ext == ".htm") return "text/html; charset=utf-8";
  if (ext == ".js" || ext == ".mjs") return "text/javascript";
  if (ext == ".css") return "text/css";
  if (ext == ".json") return "application/json";
  if (ext == ".svg") return "image/svg+xml";
  if (ext == ".png") return "image/png";
  if (ext == ".ico") return "image/x-icon";
  if (ext == ".map" || ext == ".txt") return "text/plain; charset=utf-8";
  return "application/octet-stream";
}

http::response<http::string_body> make_response(const http::request<http::string_body>& req,
                                                http::status status, std::string body,
                                                std::string_view type) {
  http::response<http::string_body> res{status, req.version()};
  res.set(http::field::server, "coilsense");
  res.set(http::field::content_type, beast::string_view(type.data(), type.size()));
  res.keep_alive(req.keep_alive());
  res.body() = std::move(body);
  res.prepare_payload();
  return res;
}

/// Maps a request target onto `root`, refusing anything that climbs out of it.
std::optional<std::filesystem::path> static_path(const std::filesystem::path& root,
                                                 std::string_view target) {
  if (root.empty()) {
    return std::nullopt;
  }
  std::string rel(target.substr(0, target.find_first_of("?#")));
  if (rel.empty() || rel.front() != '/') {
    return std::nullopt;
  }
  if (rel.back() == '/') {
    rel += "index.html";
  }
  const std::filesystem::path p = std::filesystem::path(rel.substr(1)).lexically_normal();
  if (p.empty() || *p.begin() == ".." || p.is_absolute()) {
    return std::nullopt;
  }
  auto full = root / p;
  std::error_code ec;
  if (!std::filesystem::is_regular_file(full, ec)) {
    return std::nullopt;
  }
  return full;
}

}  // namespace

struct LiveServer::Impl {
  asio::io_context ioc;
  tcp::acceptor acceptor{ioc};

  static void serve(LiveServer& self, tcp::socket socket);
  static void run_websocket(LiveServer& self, tcp::socket socket,
                            const http::request<http::string_body>& req);
};

LiveServer::LiveServer(RunConfig cfg, std::shared_ptr<const tracker::Tracker> tracker,
                       ServerOptions opts, SessionRegistry::Clock clock)
    : cfg_(cfg),
      opts_(std::move(opts)),
      registry_(std::move(cfg), std::move(tracker), std::move(clock)),
      impl_(std::make_unique<Impl>()) {
  require(opts_.reap_interval > 0.0, Errc::invalid_parameter, "reap_interval must be positive");
}

LiveServer::~LiveServer() { stop(); }

unsigned short LiveServer::start() {
  require(!running_, Errc::invalid_state, "server already running");
  const tcp::endpoint ep(asio::ip::make_address(opts_.host), opts_.port);
  auto& acc = impl_->acceptor;
  acc.open(ep.protocol());
  acc.set_option(asio::socket_base::reuse_address(true));
  acc.bind(ep);
  acc.listen();
  port_ = acc.local_endpoint().port();
  running_ = true;
  acceptor_ = std::thread([this] { accept_loop(); });
  reaper_ = std::thread([this] { reap_loop(); });
  return port_;
}

void LiveServer::accept_loop() {
  while (running_) {
    tcp::socket socket(impl_->ioc);
    beast::error_code ec;
    impl_->acceptor.accept(socket, ec);
    if (ec) {
      if (!running_) {
        break;
      }
      continue;
    }
    std::lock_guard lock(mu_);
    if (!running_) {
      break;
    }
    workers_.remove_if([](Worker& w) {
      if (*w.done) {
        w.thread.join();
        return true;
      }
      return false;
    });
    auto done = std::make_shared<std::atomic<bool>>(false);
    const int fd = socket.native_handle();
    fds_.insert(fd);
    auto shared = std::make_shared<tcp::socket>(std::move(socket));
    workers_.push_back({std::thread([this, shared, done, fd] {
                          Impl::serve(*this, std::move(*shared));
                          {
                            std::lock_guard inner(mu_);
                            fds_.erase(fd);
                          }
                          *done = true;
                        }),
                        done});
  }
}

void LiveServer::reap_loop() {
  std::unique_lock lock(mu_);
  while (running_) {
    // A system-clock deadline: a clock step only shifts one sweep.
    const auto interval = std::chrono::duration_cast<std::chrono::system_clock::duration>(
        std::chrono::duration<double>(opts_.reap_interval));
    cv_.wait_until(lock, std::chrono::system_clock::now() + interval);
    if (!running_) {
      break;
    }
    lock.unlock();
    registry_.purge();
    lock.lock();
  }
}

void LiveServer::Impl::serve(LiveServer& self, tcp::socket socket) {
  beast::flat_buffer buffer;
  beast::error_code ec;
  while (self.running_) {
    http::request<http::string_body> req;
    http::read(socket, buffer, req, ec);
    if (ec) {
      return;
    }
    if (websocket::is_upgrade(req)) {
      if (req.target() == "/ws") {
        run_websocket(self, std::move(socket), req);
        return;
      }
      http::write(socket, make_response(req, http::status::not_found, "not found\n", "text/plain"),
                  ec);
      return;
    }
    http::response<http::string_body> res;
    const auto target = req.target();
    if (req.method() != http::verb::get && req.method() != http::verb::head) {
      res = make_response(req, http::status::method_not_allowed, "method not allowed\n",
                          "text/plain");
    } else if (target == "/healthz") {
      res = make_response(req, http::status::ok, "ok", "text/plain");
    } else if (target == "/api/config") {
      res = make_response(req, http::status::ok, to_json(self.cfg_).dump(), "application/json");
    } else if (const auto file = static_path(self.opts_.static_dir,
                                             std::string_view(target.data(), target.size()))) {
      std::ifstream in(*file, std::ios::binary);
      std::ostringstream body;
      body << in.rdbuf();
      res = make_response(req, http::status::ok, body.str(), mime_type(*file));
    } else {
      res = make_response(req, http::status::not_found, "not found\n", "text/plain");
    }
    if (req.method() == http::verb::head) {
      res.body().clear();
    }
    const bool keep = res.keep_alive();
    http::write(socket, res, ec);
    if (ec || !keep) {
      socket.shutdown(tcp::socket::shutdown_send, ec);
      return;
    }
  }
}

void LiveServer::Impl::run_websocket(LiveServer& self, tcp::socket socket,
                                     const http::request<http::string_body>& req) {
  websocket::stream<tcp::socket> ws(std::move(socket));
  beast::error_code ec;
  ws.accept(req, ec);
  if (ec) {
    return;
  }
  ws.text(true);
  Connection conn(self.registry_);
  beast::flat_buffer buffer;
  while (self.running_) {
    buffer.clear();
    ws.read(buffer, ec);
    if (ec) {
      break;
    }
    const auto text = beast::buffers_to_string(buffer.data());
    for (const auto& reply : conn.on_text(text)) {
      ws.write(asio::buffer(reply), ec);
      if (ec) {
        break;
      }
    }
    if (ec) {
      break;
    }
  }
  conn.close();
  if (ws.is_open()) {
    ws.close(websocket::close_code::normal, ec);
  }
}

void LiveServer::stop() {
  {
    std::lock_guard lock(mu_);
    if (!running_) {
      return;
    }
    running_ = false;
    for (const int fd : fds_) {
      ::shutdown(fd, SHUT_RDWR);
    }
  }
  cv_.notify_all();
  beast::error_code ec;
  // Wakes the blocking accept.
  ::shutdown(impl_->acceptor.native_handle(), SHUT_RDWR);
  if (acceptor_.joinable()) {
    acceptor_.join();
  }
  impl_->acceptor.close(ec);
  if (reaper_.joinable()) {
    reaper_.join();
  }
  std::list<Worker> workers;
  {
    std::lock_guard lock(mu_);
    workers.swap(workers_);
  }
  for (auto& w : workers) {
    w.thread.join();
  }
  cv_.notify_all();
}

void LiveServer::wait() {
  std::unique_lock lock(mu_);
  cv_.wait(lock, [this] { return !running_.load(); });
}

}  // namespace coilsense::live
