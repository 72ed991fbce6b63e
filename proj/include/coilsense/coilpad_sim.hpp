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

#ifndef COILSENSE_COILPAD_SIM_HPP
#define COILSENSE_COILPAD_SIM_HPP

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "coilsense/gesture.hpp"

/**
 * \file
 * \brief Synthetic multi-coil pad: geometry, hand-induced current perturbation and trace synthesis.
 *
 * Coils are laid out on a rows x cols lattice centered on the origin. Coil (and zone) index
 * `k = row * cols + col`; the row index grows along +y and the column index along +x.
 */

namespace coilsense::sim {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

struct HandPos {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;  ///< Height above the pad surface, mm.
};

/// Geometry and electrical parameters of the coil grid. Lengths in mm, currents in A.
struct CoilPadConfig {
  int rows = 3;
  int cols = 3;
  double coil_radius = 20.0;
  double pitch = 40.0;
  double base_current = 0.5;
  double sample_rate = 50.0;
  /// Peak current change when the hand touches a coil's center.
  double amplitude = 0.1;
  /// Spatial falloff of the perturbation.
  double falloff_sigma = 20.0;
  double base_voltage = 5.0;
  /// Volts per ampere of current perturbation on the voltage channel.
  double voltage_gain = 2.0;

  void validate() const;

  [[nodiscard]] int coil_count() const noexcept { return rows * cols; }
  [[nodiscard]] Vec2 coil_center(int k) const;
  /// Zone whose cell contains (x, y); positions off the pad clamp to the nearest edge zone.
  [[nodiscard]] int zone_at(double x, double y) const noexcept;
  /// Half extent of the lattice of coil centers along x and y.
  [[nodiscard]] Vec2 half_extent() const noexcept;
};

struct Waypoint {
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

struct HandPath {
  std::vector<Waypoint> waypoints;
  std::optional<GestureLabel> label;

  void validate() const;
  [[nodiscard]] double start_time() const { return waypoints.front().t; }
  [[nodiscard]] double end_time() const { return waypoints.back().t; }
  /// Linear interpolation between waypoints, clamped to the end points.
  [[nodiscard]] HandPos at(double t) const;
};

struct NoiseSpec {
  double gaussian_sigma = 0.0;
  double drift_amplitude = 0.0;
  double drift_freq = 0.0;
  double dropout_prob = 0.0;
  int shuffle_window = 0;

  void validate() const;

  static NoiseSpec none() { return {}; }
  /// Noise level used by the shipped default configuration.
  static NoiseSpec standard() { return {0.004, 0.01, 0.2, 0.01, 2}; }
};

struct SensorFrame {
  double t = 0.0;
  std::vector<double> currents;
  std::vector<double> voltages;

  friend bool operator==(const SensorFrame&, const SensorFrame&) = default;
};

/// Gaussian-falloff proxy for the current change a hand induces in one coil:
/// `amplitude * exp(-(d^2 + z^2) / (2 sigma^2))`, d being the planar distance to the coil center.
double perturbation(const HandPos& hand, Vec2 coil_center, double amplitude, double sigma);

/// Per-sample frame generator. Holds the seeded stream so traces and live sessions share one
/// noise model. A hand of `std::nullopt` means nothing is above the pad.
class FrameSynthesizer {
 public:
  FrameSynthesizer(const CoilPadConfig& pad, const NoiseSpec& noise, std::uint64_t seed);

  /// Synthesizes the frame at time `t`. Returns nullopt when the frame is dropped.
  std::optional<SensorFrame> next(double t, const std::optional<HandPos>& hand);

  std::mt19937_64& rng() noexcept { return rng_; }

 private:
  CoilPadConfig pad_;
  NoiseSpec noise_;
  std::mt19937_64 rng_;
  std::vector<double> drift_phase_;
};

/// Samples `path` at `pad.sample_rate` from its first timestamp. Frame n sits at
/// `start + n / sample_rate` for n < ceil(duration * sample_rate); a zero-duration path yields a
/// single frame. Dropped frames are omitted, and with `shuffle_window > 0` consecutive blocks of
/// `shuffle_window + 1` frames are emitted in shuffled order.
std::vector<SensorFrame> synthesize_trace(const HandPath& path, const CoilPadConfig& pad,
                                          const NoiseSpec& noise, std::uint64_t seed);

struct LabeledTrace {
  GestureLabel label;
  HandPath path;
  std::vector<SensorFrame> frames;
};

/// Path template for a gesture. With `jitter` unset the canonical (noise-free, centered,
/// nominal-speed) template is returned and `rng` is not touched.
HandPath gesture_path(GestureLabel label, const CoilPadConfig& pad, std::mt19937_64* jitter);

/// `per_class` traces for each label, in label-major order, with randomized start offsets,
/// speeds and spatial jitter.
std::vector<LabeledTrace> generate_dataset(std::span<const GestureLabel> gestures, int per_class,
                                           const CoilPadConfig& pad, const NoiseSpec& noise,
                                           std::uint64_t seed);

/// Overload resolving gesture names first; unknown names raise `Errc::invalid_input`.
std::vector<LabeledTrace> generate_dataset(std::span<const std::string_view> gestures,
                                           int per_class, const CoilPadConfig& pad,
                                           const NoiseSpec& noise, std::uint64_t seed);

/// Number of frames a path of the given duration produces with no dropout.
std::size_t frame_count(double duration, double sample_rate);

}  // namespace coilsense::sim

#endif
