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

#include "coilsense/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include "coilsense/errors.hpp"
#include "coilsense/kernels.hpp"

namespace coilsense::dsp {

void FilterCoeffs::validate() const {
  require(std::abs(a1) < 1.0, Errc::invalid_parameter, "filter pole must lie inside the unit circle");
  require(std::abs(b1 + b2) <= 1e-12, Errc::invalid_parameter, "high-pass needs b1 + b2 = 0");
}

double FilterCoeffs::magnitude(double freq, double sample_rate) const {
  const double omega = 2.0 * std::numbers::pi * freq / sample_rate;
  const std::complex<double> z1 = std::polar(1.0, -omega);
  return std::abs((b1 + b2 * z1) / (1.0 + a1 * z1));
}

DenoiseMethod parse_denoise_method(std::string_view name) {
  if (name == "median") {
    return DenoiseMethod::median;
  }
  if (name == "moving_average") {
    return DenoiseMethod::moving_average;
  }
  throw Error(Errc::invalid_parameter, "unknown denoise method '" + std::string(name) + "'");
}

std::string_view to_string(DenoiseMethod method) noexcept {
  return method == DenoiseMethod::median ? "median" : "moving_average";
}

std::vector<SensorFrame> sort_frames(std::vector<SensorFrame> frames) {
  std::stable_sort(frames.begin(), frames.end(),
                   [](const SensorFrame& a, const SensorFrame& b) { return a.t < b.t; });
  return frames;
}

ChannelSeries denoise(const ChannelSeries& series, DenoiseMethod method, int window) {
  require(window >= 1 && window % 2 == 1, Errc::invalid_parameter,
          "denoise window must be odd and positive");
  ChannelSeries out = series;
  const auto n = static_cast<std::ptrdiff_t>(series.samples.size());
  if (window == 1 || n == 0) {
    return out;
  }
  const std::ptrdiff_t half = window / 2;
  std::vector<double> buf(static_cast<std::size_t>(window));
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    for (std::ptrdiff_t k = -half; k <= half; ++k) {
      const auto j = std::clamp<std::ptrdiff_t>(i + k, 0, n - 1);
      buf[static_cast<std::size_t>(k + half)] = series.samples[static_cast<std::size_t>(j)].value;
    }
    double value = 0.0;
    if (method == DenoiseMethod::median) {
      const auto mid = buf.begin() + half;
      std::nth_element(buf.begin(), mid, buf.end());
      value = *mid;
    } else {
      for (const double v : buf) {
        value += v;
      }
      value /= static_cast<double>(window);
    }
    out.samples[static_cast<std::size_t>(i)].value = value;
  }
  return out;
}

FilterCoeffs design_highpass(double cutoff, double sample_rate) {
  require(sample_rate > 0.0, Errc::invalid_parameter, "sample_rate must be positive");
  require(cutoff > 0.0 && cutoff < 0.5 * sample_rate, Errc::invalid_parameter,
          "cutoff must lie in (0, sample_rate / 2)");
  const double c = std::tan(std::numbers::pi * cutoff / sample_rate);
  FilterCoeffs coeffs;
  coeffs.b1 = 1.0 / (1.0 + c);
  coeffs.b2 = -coeffs.b1;
  coeffs.a1 = (c - 1.0) / (c + 1.0);
  return coeffs;
}

ChannelSeries apply_highpass(const ChannelSeries& series, const FilterCoeffs& coeffs) {
  ChannelSeries out = series;
  HighpassState state(coeffs);
  for (auto& s : out.samples) {
    s.value = state.step(s.value);
  }
  return out;
}

std::vector<WindowSlice> segment(const FrameMatrix& trace, int window_len, int stride) {
  require(window_len >= 1, Errc::invalid_parameter, "window_len must be at least 1");
  require(stride >= 1, Errc::invalid_parameter, "stride must be at least 1");
  const auto len = static_cast<std::size_t>(window_len);
  std::vector<WindowSlice> windows;
  for (std::size_t start = 0; start + len <= trace.rows; start += static_cast<std::size_t>(stride)) {
    WindowSlice w{start, FrameMatrix(len, trace.cols)};
    std::copy_n(trace.data.begin() + static_cast<std::ptrdiff_t>(start * trace.cols),
                len * trace.cols, w.values.data.begin());
    windows.push_back(std::move(w));
  }
  return windows;
}

std::vector<double> window_measurement(const WindowSlice& window) {
  const auto& m = window.values;
  std::vector<double> mean(m.cols, 0.0);
  for (std::size_t r = 0; r < m.rows; ++r) {
    for (std::size_t c = 0; c < m.cols; ++c) {
      mean[c] += std::abs(m(r, c));
    }
  }
  for (auto& v : mean) {
    v /= static_cast<double>(m.rows);
  }
  return mean;
}

std::vector<double> window_response(const WindowSlice& window) {
  const auto& m = window.values;
  std::vector<double> mean(m.cols, 0.0);
  for (std::size_t r = 0; r < m.rows; ++r) {
    for (std::size_t c = 0; c < m.cols; ++c) {
      mean[c] += std::max(m(r, c), 0.0);
    }
  }
  for (auto& v : mean) {
    v /= static_cast<double>(m.rows);
  }
  return mean;
}

Eigenvalue extract_eigenvalue(const WindowSlice& window, int bins, double magnitude_scale) {
  require(bins >= 1, Errc::invalid_parameter, "bins must be at least 1");
  require(magnitude_scale > 0.0, Errc::invalid_parameter, "magnitude_scale must be positive");
  require(window.values.rows > 0 && window.values.cols > 0, Errc::invalid_input, "empty window");
  const auto mean = window_measurement(window);
  // max_element returns the first maximum, which is the lowest-index tie-break.
  const auto it = std::max_element(mean.begin(), mean.end());
  Eigenvalue ev;
  ev.bins = bins;
  ev.dominant_coil = static_cast<int>(it - mean.begin());
  const double scaled = std::floor(bins * (*it) / magnitude_scale);
  ev.magnitude_bin = static_cast<int>(std::clamp(scaled, 0.0, static_cast<double>(bins - 1)));
  return ev;
}

std::vector<ChannelSeries> current_channels(std::span<const SensorFrame> frames) {
  const std::size_t coils = frames.empty() ? 0 : frames.front().currents.size();
  std::vector<ChannelSeries> channels(coils);
  for (std::size_t k = 0; k < coils; ++k) {
    channels[k].coil_index = static_cast<int>(k);
    channels[k].samples.reserve(frames.size());
  }
  for (const auto& f : frames) {
    require(f.currents.size() == coils, Errc::invalid_input, "frames disagree on coil count");
    for (std::size_t k = 0; k < coils; ++k) {
      channels[k].samples.push_back({f.t, f.currents[k]});
    }
  }
  return channels;
}

FrameMatrix to_matrix(std::span<const ChannelSeries> channels) {
  const std::size_t rows = channels.empty() ? 0 : channels.front().samples.size();
  FrameMatrix m(rows, channels.size());
  for (std::size_t c = 0; c < channels.size(); ++c) {
    for (std::size_t r = 0; r < rows; ++r) {
      m(r, c) = channels[c].samples[r].value;
    }
  }
  return m;
}

void DspParams::validate(double sample_rate) const {
  design_highpass(cutoff, sample_rate);
  require(window_len >= 1, Errc::invalid_parameter, "window_len must be at least 1");
  require(stride >= 1, Errc::invalid_parameter, "stride must be at least 1");
  require(bins >= 1, Errc::invalid_parameter, "bins must be at least 1");
  require(magnitude_scale > 0.0, Errc::invalid_parameter, "magnitude_scale must be positive");
  require(denoise_window >= 1 && denoise_window % 2 == 1, Errc::invalid_parameter,
          "denoise window must be odd and positive");
}

WindowFeatures preprocess(std::vector<SensorFrame> frames, const DspParams& params,
                          double sample_rate) {
  params.validate(sample_rate);
  const auto sorted = sort_frames(std::move(frames));
  auto channels = current_channels(sorted);
  for (auto& ch : channels) {
    ch = denoise(ch, params.denoise_method, params.denoise_window);
  }
  auto matrix = to_matrix(channels);
  for (auto& v : matrix.data) {
    v -= params.baseline;
  }
  kernels::highpass_columns(kernels::Backend::serial, matrix,
                            design_highpass(params.cutoff, sample_rate));

  WindowFeatures features;
  for (const auto& w : segment(matrix, params.window_len, params.stride)) {
    features.eigenvalues.push_back(extract_eigenvalue(w, params.bins, params.magnitude_scale));
    features.measurements.push_back(window_response(w));
    std::vector<double> times;
    times.reserve(w.values.rows);
    for (std::size_t r = 0; r < w.values.rows; ++r) {
      times.push_back(sorted[w.start_index + r].t);
    }
    features.frame_times.push_back(std::move(times));
  }
  return features;
}

}  // namespace coilsense::dsp
