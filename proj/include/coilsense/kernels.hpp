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

#ifndef COILSENSE_KERNELS_HPP
#define COILSENSE_KERNELS_HPP

#include <cstddef>
#include <cstdint>
#include <span>

#include "coilsense/dsp.hpp"
#include "coilsense/particle.hpp"

/**
 * \file
 * \brief Data-parallel inner loops, each in a serial reference form and an OpenMP form.
 *
 * Both forms produce bit-identical results. Random draws come from per-chunk generators keyed by
 * (seed, epoch, chunk index) with a fixed chunk size, and reductions accumulate per chunk and
 * combine partials in chunk order, so the thread count never changes an answer.
 */

namespace coilsense::kernels {

enum class Backend { serial, parallel };

/// Particles per random stream / reduction chunk.
inline constexpr std::size_t kChunk = 512;

/// Seed for the generator owning `chunk` at `epoch`.
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t epoch, std::uint64_t chunk) noexcept;

namespace serial {

/// Redraws each particle's state from row `state` of a row-major cumulative table (zones x zones).
void predict_states(std::span<pf::Particle> particles, std::span<const double> cumulative,
                    int zones, std::uint64_t seed, std::uint64_t epoch);
/// weight *= factor[state].
void scale_weights(std::span<pf::Particle> particles, std::span<const double> factor);
/// out[z] = sum of weights of particles in zone z; `out` is overwritten.
void zone_histogram(std::span<const pf::Particle> particles, std::span<double> out);
/// In-place high-pass filtering of every column (coil) of `m`.
void highpass_columns(dsp::FrameMatrix& m, const dsp::FilterCoeffs& coeffs);

}  // namespace serial

namespace omp {

void predict_states(std::span<pf::Particle> particles, std::span<const double> cumulative,
                    int zones, std::uint64_t seed, std::uint64_t epoch);
void scale_weights(std::span<pf::Particle> particles, std::span<const double> factor);
void zone_histogram(std::span<const pf::Particle> particles, std::span<double> out);
void highpass_columns(dsp::FrameMatrix& m, const dsp::FilterCoeffs& coeffs);

}  // namespace omp

void predict_states(Backend backend, std::span<pf::Particle> particles,
                    std::span<const double> cumulative, int zones, std::uint64_t seed,
                    std::uint64_t epoch);
void scale_weights(Backend backend, std::span<pf::Particle> particles,
                   std::span<const double> factor);
void zone_histogram(Backend backend, std::span<const pf::Particle> particles,
                    std::span<double> out);
void highpass_columns(Backend backend, dsp::FrameMatrix& m, const dsp::FilterCoeffs& coeffs);

}  // namespace coilsense::kernels

#endif
