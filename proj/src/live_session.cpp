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

#include "coilsense/live_session.hpp"

#include <chrono>
#include <cmath>

#include "coilsense/errors.hpp"
#include "coilsense/kernels.hpp"

namespace coilsense::live {

using nlohmann::json;

namespace {

constexpr std::string_view kTypes[] = {"hello", "config",       "pointer", "frame",
                                       "posterior", "gesture", "param_update", "error"};

constexpr std::uint64_t kSynthStream = 0x11FE;

bool known_type(std::string_view t) {
  for (auto k : kTypes) {
    if (k == t) {
      return true;
    }
  }
  return false;
}

double number(const json& payload, const char* key) {
  const auto it = payload.find(key);
  if (it == payload.end() || !it->is_number()) {
    throw Error(Errc::invalid_input, std::string("payload.") + key + " must be a number");
  }
  const double v = it->get<double>();
  if (!std::isfinite(v)) {
    throw Error(Errc::invalid_input, std::string("payload.") + key + " must be finite");
  }
  return v;
}

}  // namespace

json to_json(const WireMessage& msg) {
  return json{{"type", msg.type}, {"seq", msg.seq}, {"session", msg.session},
              {"payload", msg.payload}};
}

std::string serialize(const WireMessage& msg) { return to_json(msg).dump(); }

WireMessage parse_message(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception&) {
    throw Error(Errc::invalid_input, "message is not valid JSON");
  }
  if (!j.is_object()) {
    throw Error(Errc::invalid_input, "message must be a JSON object");
  }
  WireMessage msg;
  const auto type = j.find("type");
  const auto seq = j.find("seq");
  if (type == j.end() || !type->is_string()) {
    throw Error(Errc::invalid_input, "message.type must be a string");
  }
  if (seq == j.end() || !seq->is_number_unsigned()) {
    throw Error(Errc::invalid_input, "message.seq must be a non-negative integer");
  }
  msg.type = type->get<std::string>();
  if (!known_type(msg.type)) {
    throw Error(Errc::invalid_input, "unknown message type '" + msg.type + "'");
  }
  msg.seq = seq->get<std::uint64_t>();
  if (const auto s = j.find("session"); s != j.end() && !s->is_null()) {
    if (!s->is_string()) {
      throw Error(Errc::invalid_input, "message.session must be a string");
    }
    msg.session = s->get<std::string>();
  }
  if (const auto p = j.find("payload"); p != j.end() && !p->is_null()) {
    if (!p->is_object()) {
      throw Error(Errc::invalid_input, "message.payload must be an object");
    }
    msg.payload = *p;
  }
  return msg;
}

Session::Session(std::string id, RunConfig cfg, std::shared_ptr<const tracker::Tracker> tracker)
    : id_(std::move(id)),
      cfg_(std::move(cfg)),
      tracker_(std::move(tracker)),
      synth_(cfg_.pad, cfg_.noise, kernels::stream_seed(cfg_.seed, kSynthStream, 0)),
      filters_(static_cast<std::size_t>(cfg_.pad.coil_count()),
               dsp::HighpassState(dsp::design_highpass(cfg_.tracker.dsp.cutoff,
                                                       cfg_.pad.sample_rate))),
      particles_(pf::ParticleSet::uniform(cfg_.tracker.pf.n_particles, cfg_.pad.coil_count(),
                                          cfg_.seed)) {
  require(tracker_ != nullptr, Errc::invalid_parameter, "session needs a tracker");
}

std::size_t Session::buffer_capacity() const noexcept {
  return 10 * static_cast<std::size_t>(cfg_.tracker.dsp.window_len);
}

WireMessage Session::make(std::string type, json payload) {
  return {std::move(type), ++out_seq_, id_, std::move(payload)};
}

WireMessage Session::error(std::string_view code, std::string_view message) {
  return make("error", {{"code", code}, {"message", message}});
}

json Session::config_payload() const { return coilsense::to_json(cfg_); }

WireMessage Session::greet(std::uint64_t inbound_seq) {
  in_seq_ = inbound_seq;
  return make("hello", {{"session", id_},
                        {"rows", cfg_.pad.rows},
                        {"cols", cfg_.pad.cols},
                        {"pitch", cfg_.pad.pitch},
                        {"config", config_payload()}});
}

std::vector<WireMessage> Session::handle(const WireMessage& msg) {
  std::vector<WireMessage> out;
  if (!msg.session.empty() && msg.session != id_) {
    out.push_back(error("invalid-input", "message addressed to another session"));
    return out;
  }
  if (in_seq_ && msg.seq <= *in_seq_) {
    out.push_back(error("invalid-input", "seq must strictly increase"));
    return out;
  }
  in_seq_ = msg.seq;
  try {
    if (msg.type == "pointer") {
      on_pointer(msg.payload, out);
    } else if (msg.type == "param_update") {
      on_param_update(msg.payload, out);
    } else if (msg.type == "config") {
      out.push_back(make("config", config_payload()));
    } else {
      out.push_back(error("invalid-input", "clients may not send '" + msg.type + "'"));
    }
  } catch (const Error& e) {
    out.push_back(error(to_string(e.code()), e.what()));
  }
  return out;
}

void Session::on_pointer(const json& payload, std::vector<WireMessage>& out) {
  Pointer cur;
  cur.t = number(payload, "t");
  cur.x = number(payload, "x");
  cur.y = number(payload, "y");
  const auto phase = payload.value("phase", std::string("move"));
  if (phase != "down" && phase != "move" && phase != "up") {
    throw Error(Errc::invalid_input, "payload.phase must be down, move or up");
  }
  if (last_ && cur.t < last_->t) {
    throw Error(Errc::invalid_input, "pointer time went backwards");
  }
  const bool was_down = last_ && last_->down;
  // A move keeps the press state; only a pressed pointer places the hand over the pad.
  cur.down = phase == "down" || (phase == "move" && was_down);
  if (cur.down && !was_down) {
    stroke_.points.clear();
  }
  if (!next_sample_) {
    next_sample_ = cur.t;
  }
  const double fs = cfg_.pad.sample_rate;
  const double origin = *next_sample_;
  const auto last_index =
      static_cast<std::uint64_t>(std::floor((cur.t - origin) * fs + 1e-9));
  if (last_index + 1 > sample_index_ + buffer_capacity()) {
    const auto skip = last_index + 1 - buffer_capacity() - sample_index_;
    dropped_ += skip;
    sample_index_ += skip;
  }
  const double z = cfg_.live.pointer_height;
  for (; sample_index_ <= last_index; ++sample_index_) {
    const double s = origin + static_cast<double>(sample_index_) / fs;
    std::optional<sim::HandPos> hand;
    if (s < cur.t - 1e-12) {
      if (was_down) {
        const double span = cur.t - last_->t;
        const double a = span > 0.0 ? std::clamp((s - last_->t) / span, 0.0, 1.0) : 1.0;
        hand = sim::HandPos{last_->x + a * (cur.x - last_->x), last_->y + a * (cur.y - last_->y),
                            z};
      }
    } else if (cur.down || was_down) {
      hand = sim::HandPos{cur.x, cur.y, z};
    }
    emit_frame(s, hand, out);
  }
  last_ = cur;
  if (was_down && !cur.down) {
    finish_stroke(out);
  }
}

void Session::emit_frame(double t, const std::optional<sim::HandPos>& hand,
                         std::vector<WireMessage>& out) {
  auto frame = synth_.next(t, hand);
  if (!frame) {
    return;
  }
  std::vector<double> filtered(frame->currents.size());
  for (std::size_t k = 0; k < filtered.size(); ++k) {
    filtered[k] = filters_[k].step(frame->currents[k] - cfg_.tracker.dsp.baseline);
  }
  out.push_back(make("frame", {{"t", frame->t}, {"i", frame->currents}, {"v", frame->voltages}}));
  buffer_.emplace_back(t, std::move(filtered));
  ++pending_;
  while (buffer_.size() > buffer_capacity()) {
    buffer_.pop_front();
    ++dropped_;
  }
  pending_ = std::min(pending_, buffer_.size());
  run_windows(out);
}

void Session::run_windows(std::vector<WireMessage>& out) {
  const auto& d = cfg_.tracker.dsp;
  const auto len = static_cast<std::size_t>(d.window_len);
  while (pending_ >= len + skip_) {
    pending_ -= skip_;
    skip_ = 0;
    const std::size_t start = buffer_.size() - pending_;
    dsp::WindowSlice slice;
    slice.start_index = start;
    slice.values = dsp::FrameMatrix(len, static_cast<std::size_t>(cfg_.pad.coil_count()));
    for (std::size_t r = 0; r < len; ++r) {
      const auto& row = buffer_[start + r].second;
      for (std::size_t c = 0; c < row.size(); ++c) {
        slice.values(r, c) = row[c];
      }
    }
    const auto z = dsp::window_response(slice);
    const auto e = dsp::extract_eigenvalue(slice, d.bins, d.magnitude_scale);
    auto result = pf::step(std::move(particles_), tracker_->transitions(),
                           tracker_->likelihood(), e.category(), z, cfg_.tracker.pf,
                           cfg_.tracker.backend);
    particles_ = std::move(result.set);
    const int zone = pf::estimate(result.posterior);
    const double t_end = buffer_[start + len - 1].first;
    out.push_back(make("posterior", {{"window", window_},
                                     {"t", t_end},
                                     {"posterior", result.posterior},
                                     {"map", zone},
                                     {"eigenvalue", {{"coil", e.dominant_coil},
                                                     {"bin", e.magnitude_bin}}},
                                     {"resampled", result.resampled},
                                     {"n_particles", particles_.size()}}));
    if (last_ && last_->down) {
      stroke_.points.push_back({window_, zone, std::move(result.posterior)});
    }
    ++window_;
    const auto stride = static_cast<std::size_t>(d.stride);
    const auto consumed = std::min(stride, pending_);
    pending_ -= consumed;
    skip_ = stride - consumed;
  }
}

void Session::finish_stroke(std::vector<WireMessage>& out) {
  tracker::Classification c;
  if (stroke_.points.empty()) {
    c.label = GestureLabel::tap;
    c.confidence = 1.0;
  } else {
    c = tracker_->classify(stroke_);
  }
  if (c.confidence >= cfg_.live.gesture_confidence) {
    json zones = json::array();
    for (const auto& p : stroke_.points) {
      zones.push_back(p.zone);
    }
    out.push_back(make("gesture", {{"label", to_string(c.label)},
                                   {"confidence", c.confidence},
                                   {"windows", stroke_.points.size()},
                                   {"zones", zones}}));
  }
  stroke_.points.clear();
}

void Session::on_param_update(const json& payload, std::vector<WireMessage>& out) {
  RunConfig next = cfg_;
  try {
    for (const auto& [key, value] : payload.items()) {
      if (key == "n_particles") {
        next.tracker.pf.n_particles = value.get<int>();
      } else if (key == "ess_threshold") {
        next.tracker.pf.ess_threshold = value.get<double>();
      } else if (key == "weight_floor") {
        next.tracker.pf.weight_floor = value.get<double>();
      } else if (key == "cutoff") {
        next.tracker.dsp.cutoff = value.get<double>();
      } else if (key == "gesture_confidence") {
        next.live.gesture_confidence = value.get<double>();
      } else {
        throw Error(Errc::invalid_parameter, "parameter '" + key + "' cannot be changed live");
      }
    }
  } catch (const json::exception&) {
    throw Error(Errc::invalid_parameter, "param_update values must be numbers");
  }
  next.validate();
  if (next.tracker.pf.n_particles != cfg_.tracker.pf.n_particles) {
    particles_ = pf::resize(std::move(particles_), next.tracker.pf.n_particles);
  }
  if (next.tracker.dsp.cutoff != cfg_.tracker.dsp.cutoff) {
    const auto coeffs = dsp::design_highpass(next.tracker.dsp.cutoff, next.pad.sample_rate);
    for (auto& f : filters_) {
      f.set_coeffs(coeffs);
    }
  }
  cfg_ = std::move(next);
  out.push_back(make("config", config_payload()));
}

SessionRegistry::SessionRegistry(RunConfig cfg, std::shared_ptr<const tracker::Tracker> tracker,
                                 Clock clock)
    : cfg_(std::move(cfg)), tracker_(std::move(tracker)), clock_(std::move(clock)) {
  cfg_.validate();
  require(tracker_ != nullptr, Errc::invalid_parameter, "registry needs a tracker");
  if (!clock_) {
    clock_ = [] {
      using namespace std::chrono;
      return duration<double>(steady_clock::now().time_since_epoch()).count();
    };
  }
}

std::shared_ptr<Session> SessionRegistry::attach(const std::optional<std::string>& resume) {
  std::lock_guard lock(mu_);
  if (resume) {
    if (auto it = sessions_.find(*resume); it != sessions_.end() && it->second.detached_at) {
      it->second.detached_at.reset();
      return it->second.session;
    }
  }
  auto id = "s" + std::to_string(next_id_++);
  auto session = std::make_shared<Session>(id, cfg_, tracker_);
  sessions_.emplace(id, Entry{session, std::nullopt});
  return session;
}

void SessionRegistry::detach(const std::string& id) {
  std::lock_guard lock(mu_);
  if (auto it = sessions_.find(id); it != sessions_.end()) {
    it->second.detached_at = clock_();
  }
}

std::size_t SessionRegistry::purge() {
  std::lock_guard lock(mu_);
  const double now = clock_();
  return std::erase_if(sessions_, [&](const auto& kv) {
    const auto& at = kv.second.detached_at;
    return at && now - *at >= cfg_.live.session_ttl;
  });
}

std::size_t SessionRegistry::size() const {
  std::lock_guard lock(mu_);
  return sessions_.size();
}

bool SessionRegistry::contains(const std::string& id) const {
  std::lock_guard lock(mu_);
  return sessions_.contains(id);
}

Connection::~Connection() { close(); }

std::vector<std::string> Connection::on_text(std::string_view text) {
  std::vector<WireMessage> replies;
  try {
    const auto msg = parse_message(text);
    if (!session_) {
      if (msg.type != "hello") {
        throw Error(Errc::invalid_input, "the first message must be hello");
      }
      std::optional<std::string> resume;
      if (const auto s = msg.payload.find("session"); s != msg.payload.end() && s->is_string()) {
        resume = s->get<std::string>();
      } else if (!msg.session.empty()) {
        resume = msg.session;
      }
      session_ = registry_.attach(resume);
      replies.push_back(session_->greet(msg.seq));
    } else if (msg.type == "hello") {
      replies.push_back(session_->error("invalid-input", "session already established"));
    } else {
      replies = session_->handle(msg);
    }
  } catch (const Error& e) {
    if (session_) {
      replies.push_back(session_->error(to_string(e.code()), e.what()));
    } else {
      replies.push_back({"error", ++pre_hello_seq_, "",
                         json{{"code", to_string(e.code())}, {"message", e.what()}}});
    }
  }
  std::vector<std::string> texts;
  texts.reserve(replies.size());
  for (const auto& r : replies) {
    texts.push_back(serialize(r));
  }
  return texts;
}

void Connection::close() {
  if (session_) {
    registry_.detach(session_->id());
    session_.reset();
  }
}

}  // namespace coilsense::live
