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

#ifndef COILSENSE_LIVE_SERVER_HPP
#define COILSENSE_LIVE_SERVER_HPP

#include <atomic>
#include <condition_variable>
#include <filesystem>
#include <list>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <thread>

#include "coilsense/live_session.hpp"

namespace coilsense::live {

struct ServerOptions {
  std::string host = "127.0.0.1";
  /// 0 picks a free port.
  unsigned short port = 8080;
  /// Served under `/`; empty disables static files.
  std::filesystem::path static_dir;
  /// Seconds between expiry sweeps of detached sessions.
  double reap_interval = 1.0;
};

/// HTTP + WebSocket front end: `GET /healthz`, `GET /api/config`, static files, and `/ws`.
/// One thread per connection; each connection owns its session exclusively.
class LiveServer {
 public:
  LiveServer(RunConfig cfg, std::shared_ptr<const tracker::Tracker> tracker, ServerOptions opts,
             SessionRegistry::Clock clock = {});
  ~LiveServer();
  LiveServer(const LiveServer&) = delete;
  LiveServer& operator=(const LiveServer&) = delete;

  /// Binds and starts accepting. Returns the bound port.
  unsigned short start();
  /// Closes the listener and every open connection, then joins all threads.
  void stop();
  /// Blocks until `stop` is called from another thread.
  void wait();

  [[nodiscard]] SessionRegistry& registry() noexcept { return registry_; }
  [[nodiscard]] unsigned short port() const noexcept { return port_; }

 private:
  struct Impl;
  struct Worker {
    std::thread thread;
    std::shared_ptr<std::atomic<bool>> done;
  };

  void accept_loop();
  void reap_loop();

  RunConfig cfg_;
  ServerOptions opts_;
  SessionRegistry registry_;
  std::unique_ptr<Impl> impl_;
  unsigned short port_ = 0;
  std::atomic<bool> running_{false};
  std::thread acceptor_;
  std::thread reaper_;
  std::mutex mu_;
  std::condition_variable cv_;
  std::list<Worker> workers_;
  std::set<int> fds_;
};

}  // namespace coilsense::live

#endif
