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

// Serial reference versus OpenMP kernels. Both forms produce identical results; these timings
// show what the parallel form buys on the current machine.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "coilsense/config.hpp"
#include "coilsense/kernels.hpp"
#include "coilsense/particle_filter.hpp"
#include "coilsense/tracker.hpp"

using namespace coilsense;

namespace {

constexpr int kZones = 9;

kernels::Backend backend_of(const benchmark::State& state) {
  return state.range(1) == 0 ? kernels::Backend::serial : kernels::Backend::parallel;
}

std::vector<pf::Particle> particles(std::int64_t n) {
  std::vector<pf::Particle> p(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = {static_cast<int>(i % kZones), 1.0 / static_cast<double>(n)};
  }
  return p;
}

std::vector<double> cumulative_table() {
  std::mt19937_64 rng(1);
  std::vector<double> c;
  for (int i = 0; i < kZones; ++i) {
    double run = 0.0;
    std::vector<double> row(kZones);
    for (auto& v : row) run += v = std::exponential_distribution<double>(1.0)(rng);
    double acc = 0.0;
    for (double v : row) c.push_back(acc += v / run);
  }
  return c;
}

void BM_PredictStates(benchmark::State& state) {
  auto p = particles(state.range(0));
  const auto cum = cumulative_table();
  std::uint64_t epoch = 0;
  for (auto _ : state) {
    kernels::predict_states(backend_of(state), p, cum, kZones, 7, ++epoch);
    benchmark::DoNotOptimize(p.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_ScaleWeights(benchmark::State& state) {
  auto p = particles(state.range(0));
  const std::vector<double> factor{1.0, 0.99, 1.01, 1.0, 0.98, 1.02, 1.0, 0.97, 1.03};
  for (auto _ : state) {
    kernels::scale_weights(backend_of(state), p, factor);
    benchmark::DoNotOptimize(p.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_ZoneHistogram(benchmark::State& state) {
  const auto p = particles(state.range(0));
  std::vector<double> out(kZones);
  for (auto _ : state) {
    kernels::zone_histogram(backend_of(state), p, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_HighpassColumns(benchmark::State& state) {
  const auto rows = static_cast<std::size_t>(state.range(0));
  dsp::FrameMatrix base(rows, kZones);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> noise(0.5, 0.01);
  for (auto& v : base.data) v = noise(rng);
  const auto coeffs = dsp::design_highpass(0.5, 50.0);
  for (auto _ : state) {
    auto m = base;
    kernels::highpass_columns(backend_of(state), m, coeffs);
    benchmark::DoNotOptimize(m.data.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * kZones);
}

void BM_Evaluate(benchmark::State& state) {
  const RunConfig cfg;
  static const auto data = sim::generate_dataset(kAllGestures, 10, cfg.pad, cfg.noise, 42);
  static const auto net = tracker::train_network(data, cfg.pad, cfg.tracker.dsp, cfg.network);
  auto params = cfg.tracker;
  params.pf.n_particles = static_cast<int>(state.range(0));
  params.backend = backend_of(state);
  for (auto _ : state) {
    benchmark::DoNotOptimize(tracker::evaluate(data, net, cfg.pad, params, 1).accuracy);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(data.size()));
}

void particle_sizes(benchmark::internal::Benchmark* b) {
  for (const std::int64_t n : {1000, 10000, 100000, 1000000}) {
    b->Args({n, 0})->Args({n, 1});
  }
  b->ArgNames({"n", "omp"});
}

}  // namespace

BENCHMARK(BM_PredictStates)->Apply(particle_sizes);
BENCHMARK(BM_ScaleWeights)->Apply(particle_sizes);
BENCHMARK(BM_ZoneHistogram)->Apply(particle_sizes);
BENCHMARK(BM_HighpassColumns)->Args({1000, 0})->Args({1000, 1})->Args({100000, 0})->Args({100000, 1})->ArgNames({"rows", "omp"});
BENCHMARK(BM_Evaluate)->Args({100, 0})->Args({100, 1})->Args({1000, 0})->Args({1000, 1})->ArgNames({"n", "omp"})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
