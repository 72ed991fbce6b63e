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

#include "coilsense/kernels.hpp"

#include <algorithm>
#include <random>
#include <vector>

namespace coilsense::kernels {

namespace {

constexpr std::uint64_t splitmix(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::size_t chunk_count(std::size_t n) noexcept { return (n + kChunk - 1) / kChunk; }

int draw_from_row(std::span<const double> cumulative, int zones, int row, double u) {
  const auto begin = cumulative.begin() + static_cast<std::ptrdiff_t>(row) * zones;
  const auto end = begin + zones;
  const auto it = std::upper_bound(begin, end, u);
  return it == end ? zones - 1 : static_cast<int>(it - begin);
}

void predict_chunk(std::span<pf::Particle> particles, std::span<const double> cumulative,
                   int zones, std::uint64_t seed, std::uint64_t epoch, std::size_t chunk) {
  std::mt19937_64 gen(stream_seed(seed, epoch, chunk));
  const std::size_t begin = chunk * kChunk;
  const std::size_t end = std::min(particles.size(), begin + kChunk);
  for (std::size_t i = begin; i < end; ++i) {
    const double u = std::generate_canonical<double, 53>(gen);
    particles[i].state = draw_from_row(cumulative, zones, particles[i].state, u);
  }
}

void histogram_chunk(std::span<const pf::Particle> particles, std::size_t chunk,
                     std::span<double> partial) {
  std::fill(partial.begin(), partial.end(), 0.0);
  const std::size_t begin = chunk * kChunk;
  const std::size_t end = std::min(particles.size(), begin + kChunk);
  for (std::size_t i = begin; i < end; ++i) {
    partial[static_cast<std::size_t>(particles[i].state)] += particles[i].weight;
  }
}

void highpass_column(dsp::FrameMatrix& m, std::size_t col, const dsp::FilterCoeffs& c) {
  double prev_x = 0.0;
  double prev_y = 0.0;
  for (std::size_t r = 0; r < m.rows; ++r) {
    const double x = m(r, col);
    const double y = c.b1 * x + c.b2 * prev_x - c.a1 * prev_y;
    m(r, col) = y;
    prev_x = x;
    prev_y = y;
  }
}

void combine_partials(const std::vector<double>& partials, std::size_t chunks,
                      std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t c = 0; c < chunks; ++c) {
    for (std::size_t z = 0; z < out.size(); ++z) {
      out[z] += partials[c * out.size() + z];
    }
  }
}

}  // namespace

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t epoch, std::uint64_t chunk) noexcept {
  return splitmix(splitmix(splitmix(seed) ^ epoch) ^ (chunk * 0xD1B54A32D192ED03ULL));
}

namespace serial {

void predict_states(std::span<pf::Particle> particles, std::span<const double> cumulative,
                    int zones, std::uint64_t seed, std::uint64_t epoch) {
  const std::size_t chunks = chunk_count(particles.size());
  for (std::size_t c = 0; c < chunks; ++c) {
    predict_chunk(particles, cumulative, zones, seed, epoch, c);
  }
}

void scale_weights(std::span<pf::Particle> particles, std::span<const double> factor) {
  for (auto& p : particles) {
    p.weight *= factor[static_cast<std::size_t>(p.state)];
  }
}

void zone_histogram(std::span<const pf::Particle> particles, std::span<double> out) {
  const std::size_t chunks = chunk_count(particles.size());
  std::vector<double> partials(chunks * out.size());
  for (std::size_t c = 0; c < chunks; ++c) {
    histogram_chunk(particles, c, std::span<double>(partials).subspan(c * out.size(), out.size()));
  }
  combine_partials(partials, chunks, out);
}

void highpass_columns(dsp::FrameMatrix& m, const dsp::FilterCoeffs& coeffs) {
  for (std::size_t col = 0; col < m.cols; ++col) {
    highpass_column(m, col, coeffs);
  }
}

}  // namespace serial

namespace omp {

void predict_states(std::span<pf::Particle> particles, std::span<const double> cumulative,
                    int zones, std::uint64_t seed, std::uint64_t epoch) {
  const auto chunks = static_cast<std::int64_t>(chunk_count(particles.size()));
#pragma omp parallel for schedule(static)
  for (std::int64_t c = 0; c < chunks; ++c) {
    predict_chunk(particles, cumulative, zones, seed, epoch, static_cast<std::size_t>(c));
  }
}

void scale_weights(std::span<pf::Particle> particles, std::span<const double> factor) {
  const auto n = static_cast<std::int64_t>(particles.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    auto& p = particles[static_cast<std::size_t>(i)];
    p.weight *= factor[static_cast<std::size_t>(p.state)];
  }
}

void zone_histogram(std::span<const pf::Particle> particles, std::span<double> out) {
  const std::size_t chunks = chunk_count(particles.size());
  const std::size_t zones = out.size();
  std::vector<double> partials(chunks * zones);
#pragma omp parallel for schedule(static)
  for (std::int64_t c = 0; c < static_cast<std::int64_t>(chunks); ++c) {
    const auto idx = static_cast<std::size_t>(c);
    histogram_chunk(particles, idx, std::span<double>(partials).subspan(idx * zones, zones));
  }
  combine_partials(partials, chunks, out);
}

void highpass_columns(dsp::FrameMatrix& m, const dsp::FilterCoeffs& coeffs) {
  const auto cols = static_cast<std::int64_t>(m.cols);
#pragma omp parallel for schedule(static)
  for (std::int64_t col = 0; col < cols; ++col) {
    highpass_column(m, static_cast<std::size_t>(col), coeffs);
  }
}

}  // namespace omp

void predict_states(Backend backend, std::span<pf::Particle> particles,
                    std::span<const double> cumulative, int zones, std::uint64_t seed,
                    std::uint64_t epoch) {
  if (backend == Backend::parallel) {
    omp::predict_states(particles, cumulative, zones, seed, epoch);
  } else {
    serial::predict_states(particles, cumulative, zones, seed, epoch);
  }
}

void scale_weights(Backend backend, std::span<pf::Particle> particles,
                   std::span<const double> factor) {
  if (backend == Backend::parallel) {
    omp::scale_weights(particles, factor);
  } else {
    serial::scale_weights(particles, factor);
  }
}

void zone_histogram(Backend backend, std::span<const pf::Particle> particles,
                    std::span<double> out) {
  if (backend == Backend::parallel) {
    omp::zone_histogram(particles, out);
  } else {
    serial::zone_histogram(particles, out);
  }
}

void highpass_columns(Backend backend, dsp::FrameMatrix& m, const dsp::FilterCoeffs& coeffs) {
  if (backend == Backend::parallel) {
    omp::highpass_columns(m, coeffs);
  } else {
    serial::highpass_columns(m, coeffs);
  }
}

}  // namespace coilsense::kernels
