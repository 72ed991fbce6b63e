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

#include <doctest.h>

#include <random>
#include <set>

#include "coilsense/kernels.hpp"
#include "coilsense/particle_filter.hpp"
#include "fixtures.hpp"

using namespace coilsense;
using namespace coilsense::kernels;

namespace {

std::vector<pf::Particle> random_particles(std::size_t n, int zones, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<pf::Particle> out(n);
  for (auto& p : out) {
    p.state = static_cast<int>(rng() % static_cast<std::uint64_t>(zones));
    p.weight = u(rng);
  }
  return out;
}

std::vector<double> cumulative_of(const bn::ZoneMatrix& m) {
  std::vector<double> c(m.data.size());
  for (int i = 0; i < m.zones; ++i) {
    double acc = 0.0;
    for (int j = 0; j < m.zones; ++j) {
      acc += m(i, j);
      c[static_cast<std::size_t>(i * m.zones + j)] = acc;
    }
    c[static_cast<std::size_t>(i * m.zones + m.zones - 1)] = 1.0;
  }
  return c;
}

}  // namespace

TEST_CASE("stream seeds are distinct across epochs and chunks") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t e = 0; e < 20; ++e) {
    for (std::uint64_t c = 0; c < 20; ++c) {
      seen.insert(stream_seed(1, e, c));
    }
  }
  CHECK(seen.size() == 400);
  CHECK(stream_seed(1, 2, 3) == stream_seed(1, 2, 3));
  CHECK(stream_seed(1, 2, 3) != stream_seed(2, 2, 3));
}

TEST_CASE("serial and OpenMP kernels agree bit for bit") {
  for (std::size_t n : {1ul, 511ul, 512ul, 513ul, 5000ul}) {
    CAPTURE(n);
    const auto base = random_particles(n, 9, n);
    const auto cum = cumulative_of(bn::ZoneMatrix::uniform(9));

    auto a = base;
    auto b = base;
    serial::predict_states(a, cum, 9, 42, 3);
    omp::predict_states(b, cum, 9, 42, 3);
    CHECK(a == b);
    CHECK(a != base);

    std::vector<double> factor{0.1, 2.0, 0.3, 4.0, 0.5, 6.0, 0.7, 8.0, 0.9};
    serial::scale_weights(a, factor);
    omp::scale_weights(b, factor);
    CHECK(a == b);

    std::vector<double> ha(9, -1.0);
    std::vector<double> hb(9, -2.0);
    serial::zone_histogram(a, ha);
    omp::zone_histogram(b, hb);
    CHECK(ha == hb);

    double total = 0.0;
    for (const auto& p : a) {
      total += p.weight;
    }
    double hist_total = 0.0;
    for (double h : ha) {
      hist_total += h;
    }
    CHECK(hist_total == doctest::Approx(total).epsilon(1e-12));
  }
}

TEST_CASE("predict_states depends on epoch") {
  const auto base = random_particles(100, 9, 1);
  const auto cum = cumulative_of(bn::ZoneMatrix::uniform(9));
  auto a = base;
  auto b = base;
  predict_states(Backend::serial, a, cum, 9, 42, 0);
  predict_states(Backend::serial, b, cum, 9, 42, 1);
  CHECK(a != b);
}

TEST_CASE("highpass columns agree across backends and with per-channel filtering") {
  dsp::FrameMatrix m(300, 9);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0.0, 1.0);
  for (auto& v : m.data) {
    v = g(rng);
  }
  const auto coeffs = dsp::design_highpass(0.5, 50.0);
  auto a = m;
  auto b = m;
  serial::highpass_columns(a, coeffs);
  omp::highpass_columns(b, coeffs);
  CHECK(a.data == b.data);
  dsp::ChannelSeries ch;
  for (std::size_t r = 0; r < m.rows; ++r) {
    ch.samples.push_back({0.0, m(r, 4)});
  }
  const auto ref = dsp::apply_highpass(ch, coeffs);
  for (std::size_t r = 0; r < m.rows; ++r) {
    CHECK(a(r, 4) == ref.samples[r].value);
  }
}

TEST_CASE("filter steps agree across backends") {
  const pf::TransitionModel model({bn::ZoneMatrix::uniform(9)});
  const pf::LikelihoodModel lik(9, [](int zone, std::span<const double> z) {
    return 1.0 / (1.0 + std::abs(z[0] - zone));
  });
  auto a = pf::ParticleSet::uniform(3000, 9, 8);
  auto b = a;
  for (int t = 0; t < 10; ++t) {
    const std::vector<double> z{static_cast<double>(t % 9)};
    auto ra = pf::step(std::move(a), model, lik, 0, z, {}, Backend::serial);
    auto rb = pf::step(std::move(b), model, lik, 0, z, {}, Backend::parallel);
    CHECK(ra.posterior == rb.posterior);
    CHECK(ra.resampled == rb.resampled);
    a = std::move(ra.set);
    b = std::move(rb.set);
  }
  CHECK(a == b);
}
