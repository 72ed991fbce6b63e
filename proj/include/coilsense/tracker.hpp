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

#ifndef COILSENSE_TRACKER_HPP
#define COILSENSE_TRACKER_HPP

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "coilsense/bayesnet.hpp"
#include "coilsense/classifier.hpp"
#include "coilsense/coilpad_sim.hpp"
#include "coilsense/dsp.hpp"
#include "coilsense/kernels.hpp"
#include "coilsense/particle_filter.hpp"

/**
 * \file
 * \brief End-to-end pipeline: preprocessing, eigenvalue extraction, network transitions, particle
 * filtering, trajectory classification, plus training, evaluation and ablation drivers.
 */

namespace coilsense::tracker {

struct NetworkParams {
  double alpha = 1.0;
  int max_parents = 2;

  void validate() const;
};

struct TrackerParams {
  dsp::DspParams dsp;
  pf::ResampleConfig pf;
  double emission_sigma = 0.02;
  /// Lower bound on the window energy used by the emission model; see `signature_likelihood`.
  double emission_floor = 0.03;
  ClassifierParams classifier;
  /// Selects the kernel form; `parallel` also spreads evaluation across traces.
  kernels::Backend backend = kernels::Backend::parallel;

  void validate(const sim::CoilPadConfig& pad) const;
};

/// A trained pipeline bound to one pad and one network. Immutable once built.
class Tracker {
 public:
  Tracker(sim::CoilPadConfig pad, const bn::BayesNet& net, TrackerParams params);

  /// One trajectory entry per window. Throws `Errc::insufficient_data` when the trace does not
  /// fill a single window.
  [[nodiscard]] Trajectory track(std::vector<sim::SensorFrame> frames, std::uint64_t seed) const;
  [[nodiscard]] Trajectory track_features(const dsp::WindowFeatures& features,
                                          std::uint64_t seed) const;
  [[nodiscard]] Classification classify(const Trajectory& traj) const;

  [[nodiscard]] const sim::CoilPadConfig& pad() const noexcept { return pad_; }
  [[nodiscard]] const TrackerParams& params() const noexcept { return params_; }
  [[nodiscard]] const pf::TransitionModel& transitions() const noexcept { return transitions_; }
  [[nodiscard]] const pf::LikelihoodModel& likelihood() const noexcept { return likelihood_; }

 private:
  sim::CoilPadConfig pad_;
  TrackerParams params_;
  pf::TransitionModel transitions_;
  pf::LikelihoodModel likelihood_;
};

/// Convenience wrapper around `Tracker::track`.
Trajectory track(std::vector<sim::SensorFrame> frames, const bn::BayesNet& net,
                 const sim::CoilPadConfig& pad, const TrackerParams& params, std::uint64_t seed);

/// Zone containing the hand's mean planar position over each window's frames.
std::vector<int> ground_truth_zones(const sim::HandPath& path, const dsp::WindowFeatures& features,
                                    const sim::CoilPadConfig& pad);

/// (last_position, eigenvalue, now_position) samples from consecutive windows with ground-truth
/// zones.
std::vector<bn::Assignment> transition_samples(std::span<const sim::LabeledTrace> traces,
                                               const sim::CoilPadConfig& pad,
                                               const dsp::DspParams& dsp);

/// K2 structure search over (last_position, eigenvalue, now_position) then CPT fitting.
bn::BayesNet train_network(std::span<const sim::LabeledTrace> traces,
                           const sim::CoilPadConfig& pad, const dsp::DspParams& dsp,
                           const NetworkParams& net_params);

struct Metrics {
  double accuracy = 0.0;
  double error_rate = 0.0;
  /// Fraction of windows whose MAP zone matches ground truth.
  double zone_accuracy = 0.0;
  /// confusion[truth][predicted].
  std::array<std::array<int, kGestureCount>, kGestureCount> confusion{};
  std::array<double, kGestureCount> per_class{};
  std::size_t total = 0;
  std::vector<GestureLabel> predictions;
};

/// Metrics from paired labels. Throws `Errc::invalid_input` when empty or mismatched.
Metrics score(std::span<const GestureLabel> truth, std::span<const GestureLabel> predicted);

/// Tracks and classifies every trace. Trace i uses particle seed derived from (seed, i), so the
/// result does not depend on scheduling.
Metrics evaluate(std::span<const sim::LabeledTrace> dataset, const bn::BayesNet& net,
                 const sim::CoilPadConfig& pad, const TrackerParams& params, std::uint64_t seed);

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Per-label seeded shuffle; the first `train_fraction` of each label trains.
Split split_dataset(std::span<const sim::LabeledTrace> dataset, double train_fraction,
                    std::uint64_t seed);

std::vector<sim::LabeledTrace> select(std::span<const sim::LabeledTrace> dataset,
                                      std::span<const std::size_t> indices);

/// Axes of an ablation sweep. The grid is their Cartesian product.
struct AblationGrid {
  std::vector<int> n_particles{1000};
  std::vector<double> ess_threshold{0.5};
  std::vector<double> weight_floor{0.0};
  std::vector<double> alpha{1.0};
  std::vector<int> window_len{5};
  std::vector<int> max_parents{2};
  int iterations = 3;
  double train_fraction = 0.7;

  void validate() const;
  [[nodiscard]] std::size_t size() const noexcept;
};

struct AblationPoint {
  int n_particles = 0;
  double ess_threshold = 0.0;
  double weight_floor = 0.0;
  double alpha = 0.0;
  int window_len = 0;
  int max_parents = 0;
  /// Test accuracy of each iteration (fresh seeded split per iteration).
  std::vector<double> accuracy;
  std::vector<double> running_mean;
  /// Running maximum of `accuracy`; non-decreasing.
  std::vector<double> cumulative_best;
  /// K2 score of each iteration's learned structure on its training samples.
  std::vector<double> k2_score;
  /// Mean accuracy over all iterations.
  double final_accuracy = 0.0;
};

struct AblationReport {
  std::vector<AblationPoint> grid;
};

/// Every grid point sees the same seeded splits of the same dataset.
AblationReport ablate(std::span<const sim::LabeledTrace> dataset, const sim::CoilPadConfig& pad,
                      const TrackerParams& base, const AblationGrid& grid, std::uint64_t seed);

/// Histogram-based density and cumulative curves over equal-width bins spanning [min, max]. A
/// constant input occupies the first bin of a unit-width range.
struct DistributionReport {
  double lo = 0.0;
  double hi = 0.0;
  std::vector<double> edges;  ///< bins + 1 entries
  std::vector<std::size_t> counts;
  std::vector<std::size_t> cumulative_counts;
  std::vector<double> frequency;
  std::vector<double> pdf;  ///< frequency / bin width
  std::vector<double> cdf;
};

DistributionReport distribution_report(std::span<const double> values, int bins);

}  // namespace coilsense::tracker

#endif
