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

#ifndef COILSENSE_DSP_HPP
#define COILSENSE_DSP_HPP

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "coilsense/coilpad_sim.hpp"

namespace coilsense::dsp {

using sim::SensorFrame;

/// First-order recursion `y[n] = b1 x[n] + b2 x[n-1] - a1 y[n-1]`.
struct FilterCoeffs {
  double b1 = 1.0;
  double b2 = 0.0;
  double a1 = 0.0;

  /// Checks |a1| < 1 and the zero-DC constraint b1 + b2 = 0.
  void validate() const;
  /// |H(e^{j 2 pi f / fs})|.
  [[nodiscard]] double magnitude(double freq, double sample_rate) const;
};

struct Sample {
  double t = 0.0;
  double value = 0.0;
};

struct ChannelSeries {
  int coil_index = 0;
  std::vector<Sample> samples;
};

enum class DenoiseMethod { median, moving_average };

DenoiseMethod parse_denoise_method(std::string_view name);
std::string_view to_string(DenoiseMethod method) noexcept;

/// Row-major (frames x coils) matrix of readings.
struct FrameMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  FrameMatrix() = default;
  FrameMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  [[nodiscard]] std::span<const double> row(std::size_t r) const {
    return {data.data() + r * cols, cols};
  }
};

struct WindowSlice {
  std::size_t start_index = 0;
  FrameMatrix values;  ///< (window_len x n_coils)
};

/// The discrete per-window feature: dominant coil and quantized magnitude.
struct Eigenvalue {
  int dominant_coil = 0;
  int magnitude_bin = 0;
  int bins = 1;

  /// Flattened product-space category `dominant_coil * bins + magnitude_bin`.
  [[nodiscard]] int category() const noexcept { return dominant_coil * bins + magnitude_bin; }

  friend bool operator==(const Eigenvalue&, const Eigenvalue&) = default;
};

/// Stable ascending sort by timestamp.
std::vector<SensorFrame> sort_frames(std::vector<SensorFrame> frames);

/// Median or moving-average smoothing with replicate-padded edges. `window` must be odd and >= 1.
ChannelSeries denoise(const ChannelSeries& series, DenoiseMethod method, int window);

/// Bilinear transform of a first-order analog high-pass:
/// c = tan(pi fc / fs), b1 = 1 / (1 + c), b2 = -b1, a1 = (c - 1) / (c + 1).
FilterCoeffs design_highpass(double cutoff, double sample_rate);

/// Runs the recursion with x[-1] = y[-1] = 0.
ChannelSeries apply_highpass(const ChannelSeries& series, const FilterCoeffs& coeffs);

/// Streaming form of `apply_highpass` for live use.
class HighpassState {
 public:
  explicit HighpassState(FilterCoeffs coeffs = {}) : coeffs_(coeffs) {}

  double step(double x) noexcept {
    const double y = coeffs_.b1 * x + coeffs_.b2 * prev_x_ - coeffs_.a1 * prev_y_;
    prev_x_ = x;
    prev_y_ = y;
    return y;
  }
  void set_coeffs(const FilterCoeffs& coeffs) noexcept { coeffs_ = coeffs; }

 private:
  FilterCoeffs coeffs_;
  double prev_x_ = 0.0;
  double prev_y_ = 0.0;
};

/// Fixed-size windows; a trailing partial window is dropped.
std::vector<WindowSlice> segment(const FrameMatrix& trace, int window_len = 5, int stride = 5);

/// Per-coil mean |value| across the window.
std::vector<double> window_measurement(const WindowSlice& window);

/// Per-coil mean of max(value, 0) across the window. The filtered current rises on coils the hand
/// approaches and falls on coils it leaves; only the rise marks where the hand is.
std::vector<double> window_response(const WindowSlice& window);

/// dominant_coil = argmax of mean |value| (lowest index on ties);
/// magnitude_bin = clamp(floor(bins * mean_dominant / magnitude_scale), 0, bins - 1).
Eigenvalue extract_eigenvalue(const WindowSlice& window, int bins, double magnitude_scale);

/// Current channel of each coil as a series.
std::vector<ChannelSeries> current_channels(std::span<const SensorFrame> frames);
FrameMatrix to_matrix(std::span<const ChannelSeries> channels);

struct DspParams {
  /// Calibrated idle current removed from every channel before filtering, A.
  double baseline = 0.5;
  double cutoff = 0.5;
  int window_len = 5;
  int stride = 5;
  int bins = 4;
  double magnitude_scale = 0.1;
  DenoiseMethod denoise_method = DenoiseMethod::median;
  int denoise_window = 3;

  void validate(double sample_rate) const;
};

/// Output of the full preprocessing chain for one trace.
struct WindowFeatures {
  std::vector<Eigenvalue> eigenvalues;
  /// `window_response` of each window; the emission model's input.
  std::vector<std::vector<double>> measurements;
  /// Timestamps of the frames in each window.
  std::vector<std::vector<double>> frame_times;

  [[nodiscard]] std::size_t size() const noexcept { return eigenvalues.size(); }
};

/// sort -> denoise -> baseline removal -> high-pass -> segment -> features.
WindowFeatures preprocess(std::vector<SensorFrame> frames, const DspParams& params,
                          double sample_rate);

}  // namespace coilsense::dsp

#endif
