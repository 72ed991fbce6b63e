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

#ifndef COILSENSE_LIVE_SESSION_HPP
#define COILSENSE_LIVE_SESSION_HPP

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "coilsense/config.hpp"
#include "coilsense/dsp.hpp"
#include "coilsense/particle_filter.hpp"
#include "coilsense/tracker.hpp"

/**
 * \file
 * \brief Live protocol state, independent of any transport.
 *
 * A connection exchanges JSON text messages `{"type", "seq", "session", "payload"}`. The client
 * opens with `hello`, then streams `pointer` events in pad millimetres; the session turns them
 * into simulated frames on the pad's sample clock, runs one filter step per window and answers
 * with `frame`, `posterior` and, after each release, `gesture` messages. The simulated hand is
 * over the pad from a `down` until the next `up`; `move` events keep the current press state.
 */

namespace coilsense::live {

struct WireMessage {
  std::string type;
  std::uint64_t seq = 0;
  std::string session;
  nlohmann::json payload = nlohmann::json::object();

  friend bool operator==(const WireMessage&, const WireMessage&) = default;
};

nlohmann::json to_json(const WireMessage& msg);
std::string serialize(const WireMessage& msg);
/// Throws `Errc::invalid_input` on malformed JSON, missing fields or an unknown type.
WireMessage parse_message(std::string_view text);

/// Per-connection pipeline state. Not thread-safe by itself; `Connection` serializes access.
class Session {
 public:
  Session(std::string id, RunConfig cfg, std::shared_ptr<const tracker::Tracker> tracker);

  /// Handles one inbound message after `hello`; returns the replies in send order.
  std::vector<WireMessage> handle(const WireMessage& msg);
  /// `hello` reply describing the pad and active parameters. Resets the inbound sequence.
  WireMessage greet(std::uint64_t inbound_seq);
  WireMessage error(std::string_view code, std::string_view message);

  [[nodiscard]] const std::string& id() const noexcept { return id_; }
  [[nodiscard]] const RunConfig& config() const noexcept { return cfg_; }
  [[nodiscard]] const pf::ParticleSet& particles() const noexcept { return particles_; }
  [[nodiscard]] std::size_t buffered_frames() const noexcept { return buffer_.size(); }
  [[nodiscard]] std::uint64_t dropped_frames() const noexcept { return dropped_; }
  [[nodiscard]] std::size_t buffer_capacity() const noexcept;

 private:
  struct Pointer {
    double t = 0.0;
    double x = 0.0;
    double y = 0.0;
    bool down = false;
  };

  WireMessage make(std::string type, nlohmann::json payload);
  nlohmann::json config_payload() const;
  void on_pointer(const nlohmann::json& payload, std::vector<WireMessage>& out);
  void on_param_update(const nlohmann::json& payload, std::vector<WireMessage>& out);
  void emit_frame(double t, const std::optional<sim::HandPos>& hand, std::vector<WireMessage>& out);
  void run_windows(std::vector<WireMessage>& out);
  void finish_stroke(std::vector<WireMessage>& out);

  std::string id_;
  RunConfig cfg_;
  std::shared_ptr<const tracker::Tracker> tracker_;
  sim::FrameSynthesizer synth_;
  std::vector<dsp::HighpassState> filters_;
  pf::ParticleSet particles_;
  std::deque<std::pair<double, std::vector<double>>> buffer_;
  /// Unprocessed frames at the tail of `buffer_`, and frames still to skip before the next window.
  std::size_t pending_ = 0;
  std::size_t skip_ = 0;
  std::uint64_t dropped_ = 0;
  std::optional<Pointer> last_;
  /// Time of the next sample on the pad clock; set by the first pointer event.
  std::optional<double> next_sample_;
  std::uint64_t sample_index_ = 0;
  int window_ = 0;
  tracker::Trajectory stroke_;
  std::uint64_t out_seq_ = 0;
  std::optional<std::uint64_t> in_seq_;
};

/// Owns every session. Session ids are `s1`, `s2`, ... in creation order. Detached sessions are
/// dropped `cfg.live.session_ttl` seconds after their connection closes.
class SessionRegistry {
 public:
  using Clock = std::function<double()>;

  SessionRegistry(RunConfig cfg, std::shared_ptr<const tracker::Tracker> tracker,
                  Clock clock = {});

  /// Reattaches a detached session `resume` when possible, otherwise creates a new one.
  std::shared_ptr<Session> attach(const std::optional<std::string>& resume);
  void detach(const std::string& id);
  /// Removes expired detached sessions; returns how many were removed.
  std::size_t purge();

  [[nodiscard]] std::size_t size() const;
  [[nodiscard]] bool contains(const std::string& id) const;
  [[nodiscard]] const RunConfig& config() const noexcept { return cfg_; }
  [[nodiscard]] double now() const { return clock_(); }

 private:
  struct Entry {
    std::shared_ptr<Session> session;
    std::optional<double> detached_at;
  };

  RunConfig cfg_;
  std::shared_ptr<const tracker::Tracker> tracker_;
  Clock clock_;
  mutable std::mutex mu_;
  std::map<std::string, Entry> sessions_;
  std::uint64_t next_id_ = 1;
};

/// One transport connection: requires `hello` first, then forwards to its session.
class Connection {
 public:
  explicit Connection(SessionRegistry& registry) : registry_(registry) {}
  ~Connection();
  Connection(const Connection&) = delete;
  Connection& operator=(const Connection&) = delete;

  /// Outbound texts in send order. Malformed input yields an `error` message; state is kept.
  std::vector<std::string> on_text(std::string_view text);
  /// Detaches the session so the registry can expire it.
  void close();

  [[nodiscard]] const std::shared_ptr<Session>& session() const noexcept { return session_; }

 private:
  SessionRegistry& registry_;
  std::shared_ptr<Session> session_;
  std::uint64_t pre_hello_seq_ = 0;
};

}  // namespace coilsense::live

#endif
