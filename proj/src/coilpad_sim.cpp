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

#include "coilsense/coilpad_sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "coilsense/errors.hpp"

namespace coilsense::sim {

void CoilPadConfig::validate() const {
  require(rows >= 1 && cols >= 1, Errc::invalid_parameter, "pad needs at least one row and column");
  require(pitch > 0.0, Errc::invalid_parameter, "pitch must be positive");
  require(coil_radius > 0.0, Errc::invalid_parameter, "coil_radius must be positive");
  require(sample_rate > 0.0, Errc::invalid_parameter, "sample_rate must be positive");
  require(amplitude >= 0.0, Errc::invalid_parameter, "amplitude must be non-negative");
  require(falloff_sigma > 0.0, Errc::invalid_parameter, "falloff_sigma must be positive");
}

Vec2 CoilPadConfig::coil_center(int k) const {
  require(k >= 0 && k < coil_count(), Errc::invalid_input, "coil index out of range");
  const int row = k / cols;
  const int col = k % cols;
  return {(col - 0.5 * (cols - 1)) * pitch, (row - 0.5 * (rows - 1)) * pitch};
}

int CoilPadConfig::zone_at(double x, double y) const noexcept {
  const auto cell = [this](double v, int count) {
    const double idx = std::floor(v / pitch + 0.5 * count);
    return static_cast<int>(std::clamp(idx, 0.0, static_cast<double>(count - 1)));
  };
  return cell(y, rows) * cols + cell(x, cols);
}

Vec2 CoilPadConfig::half_extent() const noexcept {
  return {0.5 * (cols - 1) * pitch, 0.5 * (rows - 1) * pitch};
}

void HandPath::validate() const {
  require(!waypoints.empty(), Errc::invalid_input, "hand path is empty");
  for (std::size_t i = 0; i < waypoints.size(); ++i) {
    require(waypoints[i].z >= 0.0, Errc::invalid_input, "hand height must be non-negative");
    if (i > 0) {
      require(waypoints[i].t > waypoints[i - 1].t, Errc::invalid_input,
              "waypoint timestamps must strictly increase");
    }
  }
}

HandPos HandPath::at(double t) const {
  if (t <= waypoints.front().t) {
    const auto& w = waypoints.front();
    return {w.x, w.y, w.z};
  }
  if (t >= waypoints.back().t) {
    const auto& w = waypoints.back();
    return {w.x, w.y, w.z};
  }
  const auto upper = std::upper_bound(waypoints.begin(), waypoints.end(), t,
                                      [](double value, const Waypoint& w) { return value < w.t; });
  const auto& b = *upper;
  const auto& a = *(upper - 1);
  const double s = (t - a.t) / (b.t - a.t);
  return {a.x + s * (b.x - a.x), a.y + s * (b.y - a.y), a.z + s * (b.z - a.z)};
}

void NoiseSpec::validate() const {
  require(gaussian_sigma >= 0.0, Errc::invalid_parameter, "gaussian_sigma must be non-negative");
  require(drift_amplitude >= 0.0, Errc::invalid_parameter, "drift_amplitude must be non-negative");
  require(drift_freq >= 0.0, Errc::invalid_parameter, "drift_freq must be non-negative");
  require(dropout_prob >= 0.0 && dropout_prob <= 1.0, Errc::invalid_parameter,
          "dropout_prob must lie in [0, 1]");
  require(shuffle_window >= 0, Errc::invalid_parameter, "shuffle_window must be non-negative");
}

double perturbation(const HandPos& hand, Vec2 coil_center, double amplitude, double sigma) {
  require(sigma > 0.0, Errc::invalid_parameter, "perturbation sigma must be positive");
  require(amplitude >= 0.0, Errc::invalid_parameter, "perturbation amplitude must be non-negative");
  const double dx = hand.x - coil_center.x;
  const double dy = hand.y - coil_center.y;
  const double r2 = dx * dx + dy * dy + hand.z * hand.z;
  return amplitude * std::exp(-r2 / (2.0 * sigma * sigma));
}

FrameSynthesizer::FrameSynthesizer(const CoilPadConfig& pad, const NoiseSpec& noise,
                                   std::uint64_t seed)
    : pad_(pad), noise_(noise), rng_(seed) {
  pad_.validate();
  noise_.validate();
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  drift_phase_.resize(static_cast<std::size_t>(pad_.coil_count()));
  for (auto& p : drift_phase_) {
    p = phase(rng_);
  }
}

std::optional<SensorFrame> FrameSynthesizer::next(double t, const std::optional<HandPos>& hand) {
  const auto n = static_cast<std::size_t>(pad_.coil_count());
  SensorFrame frame{t, std::vector<double>(n), std::vector<double>(n)};
  std::normal_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  for (std::size_t k = 0; k < n; ++k) {
    const double delta =
        hand ? perturbation(*hand, pad_.coil_center(static_cast<int>(k)), pad_.amplitude,
                            pad_.falloff_sigma)
             : 0.0;
    const double drift = noise_.drift_amplitude *
                         std::sin(2.0 * std::numbers::pi * noise_.drift_freq * t + drift_phase_[k]);
    // Draws happen unconditionally so the stream layout does not depend on the noise levels.
    const double current_noise = unit(rng_) * noise_.gaussian_sigma;
    const double voltage_noise = unit(rng_) * noise_.gaussian_sigma * pad_.voltage_gain;
    frame.currents[k] = pad_.base_current + delta + drift + current_noise;
    frame.voltages[k] = pad_.base_voltage + pad_.voltage_gain * delta + voltage_noise;
  }
  if (uniform(rng_) < noise_.dropout_prob) {
    return std::nullopt;
  }
  return frame;
}

std::size_t frame_count(double duration, double sample_rate) {
  if (duration <= 0.0) {
    return 1;
  }
  // Absorb representation error such as 1.2 * 50 = 60.000000000000007.
  return static_cast<std::size_t>(std::ceil(duration * sample_rate - 1e-9));
}

std::vector<SensorFrame> synthesize_trace(const HandPath& path, const CoilPadConfig& pad,
                                          const NoiseSpec& noise, std::uint64_t seed) {
  require(!path.waypoints.empty(), Errc::invalid_input, "hand path is empty");
  path.validate();
  FrameSynthesizer synth(pad, noise, seed);

  const double start = path.start_time();
  const std::size_t count = frame_count(path.end_time() - start, pad.sample_rate);
  std::vector<SensorFrame> frames;
  frames.reserve(count);
  for (std::size_t n = 0; n < count; ++n) {
    const double t = start + static_cast<double>(n) / pad.sample_rate;
    if (auto frame = synth.next(t, path.at(t))) {
      frames.push_back(std::move(*frame));
    }
  }

  if (noise.shuffle_window > 0) {
    const auto block = static_cast<std::size_t>(noise.shuffle_window) + 1;
    for (std::size_t begin = 0; begin < frames.size(); begin += block) {
      const auto end = std::min(frames.size(), begin + block);
      std::shuffle(frames.begin() + static_cast<std::ptrdiff_t>(begin),
                   frames.begin() + static_cast<std::ptrdiff_t>(end), synth.rng());
    }
  }
  return frames;
}

namespace {

constexpr double kNominalHeight = 10.0;
constexpr double kTapTopHeight = 40.0;
constexpr double kTapBottomHeight = 6.0;

double uniform(std::mt19937_64* rng, double lo, double hi, double canonical) {
  if (rng == nullptr) {
    return canonical;
  }
  return std::uniform_real_distribution<double>(lo, hi)(*rng);
}

HandPath swipe(const CoilPadConfig& pad, std::mt19937_64* rng, double dir_x, double dir_y,
               double duration, double t0) {
  const auto half = pad.half_extent();
  const double span = (dir_x != 0.0 ? half.x : half.y) + 0.5 * pad.pitch;
  const double lateral = uniform(rng, -0.2, 0.2, 0.0) * pad.pitch;
  const double z = uniform(rng, 6.0, 14.0, kNominalHeight);
  constexpr int kPoints = 5;
  HandPath path;
  for (int i = 0; i < kPoints; ++i) {
    const double s = -span + 2.0 * span * i / (kPoints - 1);
    const double wobble = (i == 0 || i == kPoints - 1) ? 0.0 : uniform(rng, -2.0, 2.0, 0.0);
    const double along = s;
    const double across = lateral + wobble;
    const double x = dir_x != 0.0 ? dir_x * along : across;
    const double y = dir_y != 0.0 ? dir_y * along : across;
    path.waypoints.push_back({t0 + duration * i / (kPoints - 1), x, y, z});
  }
  return path;
}

HandPath circle(const CoilPadConfig& pad, std::mt19937_64* rng, double direction, double duration,
                double t0) {
  const auto half = pad.half_extent();
  const double base_radius = std::max(std::min(half.x, half.y), 0.5 * pad.pitch);
  const double radius = base_radius * uniform(rng, 0.9, 1.1, 1.0);
  const double cx = uniform(rng, -4.0, 4.0, 0.0);
  const double cy = uniform(rng, -4.0, 4.0, 0.0);
  const double phase0 = uniform(rng, 0.0, 2.0 * std::numbers::pi, 0.0);
  const double z = uniform(rng, 6.0, 14.0, kNominalHeight);
  constexpr int kSegments = 32;
  HandPath path;
  for (int i = 0; i <= kSegments; ++i) {
    const double angle = phase0 + direction * 2.0 * std::numbers::pi * i / kSegments;
    path.waypoints.push_back({t0 + duration * i / kSegments, cx + radius * std::cos(angle),
                              cy + radius * std::sin(angle), z});
  }
  return path;
}

HandPath tap(const CoilPadConfig& pad, std::mt19937_64* rng, double duration, double t0) {
  Vec2 spot = pad.coil_center(pad.zone_at(0.0, 0.0));
  if (rng != nullptr) {
    std::uniform_int_distribution<int> zone(0, pad.coil_count() - 1);
    spot = pad.coil_center(zone(*rng));
    spot.x += uniform(rng, -4.0, 4.0, 0.0);
    spot.y += uniform(rng, -4.0, 4.0, 0.0);
  }
  const double bottom = uniform(rng, 4.0, 10.0, kTapBottomHeight);
  HandPath path;
  path.waypoints = {
      {t0, spot.x, spot.y, kTapTopHeight},
      {t0 + 0.35 * duration, spot.x, spot.y, bottom},
      {t0 + 0.65 * duration, spot.x, spot.y, bottom},
      {t0 + duration, spot.x, spot.y, kTapTopHeight},
  };
  return path;
}

}  // namespace

HandPath gesture_path(GestureLabel label, const CoilPadConfig& pad, std::mt19937_64* jitter) {
  pad.validate();
  const double speed = uniform(jitter, 0.8, 1.25, 1.0);
  const double t0 = uniform(jitter, 0.0, 0.5, 0.0);
  HandPath path;
  switch (label) {
    case GestureLabel::swipe_left:
      path = swipe(pad, jitter, -1.0, 0.0, 1.0 / speed, t0);
      break;
    case GestureLabel::swipe_right:
      path = swipe(pad, jitter, 1.0, 0.0, 1.0 / speed, t0);
      break;
    case GestureLabel::swipe_up:
      path = swipe(pad, jitter, 0.0, 1.0, 1.0 / speed, t0);
      break;
    case GestureLabel::swipe_down:
      path = swipe(pad, jitter, 0.0, -1.0, 1.0 / speed, t0);
      break;
    case GestureLabel::circle_cw:
      path = circle(pad, jitter, -1.0, 2.0 / speed, t0);
      break;
    case GestureLabel::circle_ccw:
      path = circle(pad, jitter, 1.0, 2.0 / speed, t0);
      break;
    case GestureLabel::tap:
      path = tap(pad, jitter, 1.0 / speed, t0);
      break;
  }
  path.label = label;
  return path;
}

std::vector<LabeledTrace> generate_dataset(std::span<const GestureLabel> gestures, int per_class,
                                           const CoilPadConfig& pad, const NoiseSpec& noise,
                                           std::uint64_t seed) {
  require(per_class >= 1, Errc::invalid_parameter, "per_class must be at least 1");
  pad.validate();
  noise.validate();
  std::mt19937_64 rng(seed);
  std::vector<LabeledTrace> out;
  out.reserve(gestures.size() * static_cast<std::size_t>(per_class));
  for (const auto label : gestures) {
    for (int i = 0; i < per_class; ++i) {
      auto path = gesture_path(label, pad, &rng);
      const std::uint64_t trace_seed = rng();
      auto frames = synthesize_trace(path, pad, noise, trace_seed);
      out.push_back({label, std::move(path), std::move(frames)});
    }
  }
  return out;
}

std::vector<LabeledTrace> generate_dataset(std::span<const std::string_view> gestures,
                                           int per_class, const CoilPadConfig& pad,
                                           const NoiseSpec& noise, std::uint64_t seed) {
  std::vector<GestureLabel> labels;
  labels.reserve(gestures.size());
  for (const auto name : gestures) {
    labels.push_back(parse_gesture(name));
  }
  return generate_dataset(std::span<const GestureLabel>(labels), per_class, pad, noise, seed);
}

}  // namespace coilsense::sim
