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

#ifndef COILSENSE_PARTICLE_FILTER_HPP
#define COILSENSE_PARTICLE_FILTER_HPP

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "coilsense/bayesnet.hpp"
#include "coilsense/coilpad_sim.hpp"
#include "coilsense/kernels.hpp"
#include "coilsense/particle.hpp"

/**
 * \file
 * \brief Sequential Monte Carlo over the discrete zone lattice.
 *
 * One filter step is predict (draw each particle's next zone from the transition row selected by
 * the window's eigenvalue), weight (multiply by the measurement likelihood), normalize, read the
 * posterior, and resample when the effective sample size or the smallest weight falls below its
 * threshold. Operations take and return sets by value.
 */

namespace coilsense::pf {

struct ParticleSet {
  std::vector<Particle> particles;
  std::uint64_t rng_seed = 0;
  /// Counts random operations so successive steps use fresh streams.
  std::uint64_t epoch = 0;

  [[nodiscard]] std::size_t size() const noexcept { return particles.size(); }

  /// `n` particles spread evenly over `zones` with equal weights.
  static ParticleSet uniform(int n, int zones, std::uint64_t seed);

  friend bool operator==(const ParticleSet&, const ParticleSet&) = default;
};

/// Per-eigenvalue transition matrices with their cumulative tables for sampling.
class TransitionModel {
 public:
  TransitionModel() = default;
  explicit TransitionModel(std::vector<bn::ZoneMatrix> by_lambda);

  /// Queries `bn::transition_matrix` once per eigenvalue category.
  static TransitionModel from_network(const bn::BayesNet& net);

  [[nodiscard]] int zones() const noexcept { return zones_; }
  [[nodiscard]] int categories() const noexcept { return static_cast<int>(matrices_.size()); }
  [[nodiscard]] const bn::ZoneMatrix& matrix(int lambda) const;
  [[nodiscard]] std::span<const double> cumulative(int lambda) const;

 private:
  int zones_ = 0;
  std::vector<bn::ZoneMatrix> matrices_;
  std::vector<std::vector<double>> cumulative_;
};

/// Per-window measurement: mean |filtered current| per coil.
using Measurement = std::vector<double>;

/// p(z | zone). Any non-negative function of (zone, measurement).
class LikelihoodModel {
 public:
  using Emission = std::function<double(int zone, std::span<const double> z)>;

  LikelihoodModel(int zones, Emission emission) : zones_(zones), emission_(std::move(emission)) {}

  [[nodiscard]] int zones() const noexcept { return zones_; }
  [[nodiscard]] double emission(int zone, std::span<const double> z) const {
    return emission_(zone, z);
  }
  /// emission(k, z) for every zone k.
  [[nodiscard]] std::vector<double> evaluate(std::span<const double> z) const;

 private:
  int zones_;
  Emission emission_;
};

/// Zone signature: the perturbation pattern a hand centered over zone k leaves across the coils,
/// offset so its smallest entry is 0. Height only scales the pattern.
std::vector<std::vector<double>> zone_signatures(const sim::CoilPadConfig& pad);

/// Product of per-coil Gaussians (std `sigma`) centered at `gain * signature_k`. The measurement
/// has its smallest entry subtracted (removes common-mode drift and filter transients) and
/// `gain` is the non-negative least-squares fit of the signature to it. Windows whose energy
/// |z - min z| falls below `floor` are scored as if scaled up to `floor`: the pattern still
/// localizes a hand whose filtered response has decayed, while strong windows localize sharply.
LikelihoodModel signature_likelihood(const sim::CoilPadConfig& pad, double sigma,
                                     double floor = 0.0);

struct ResampleConfig {
  double ess_threshold = 0.5;
  double weight_floor = 0.0;
  int n_particles = 1000;

  void validate() const;
};

/// Samples each particle's next zone from the transition row for `lambda`; weights untouched.
ParticleSet predict(ParticleSet set, const TransitionModel& model, int lambda,
                    kernels::Backend backend = kernels::Backend::parallel);

/// Multiplies each weight by the emission density. Throws `Errc::degenerate_likelihood` when every
/// weight ends up zero.
ParticleSet weight_update(ParticleSet set, const LikelihoodModel& likelihood,
                          std::span<const double> z,
                          kernels::Backend backend = kernels::Backend::parallel);

/// Throws `Errc::degenerate_weights` when the weights sum to zero.
ParticleSet normalize(ParticleSet set);

/// 1 / sum w^2. Throws `Errc::invalid_state` unless the weights sum to 1 within 1e-9.
double effective_sample_size(const ParticleSet& set);

/// Systematic resampling positions (offset + i) / count for i < count, offset in [0, 1). Returns
/// the selected source index for every output slot.
std::vector<std::size_t> systematic_indices(std::span<const double> weights, std::size_t count,
                                            double offset);

/// Systematic resampling with one uniform offset drawn from the set's stream; weights become 1/N.
ParticleSet resample(ParticleSet set);

/// Resample to a different particle count (live parameter changes).
ParticleSet resize(ParticleSet set, int n);

/// Weight mass per zone.
std::vector<double> zone_histogram(const ParticleSet& set, int zones,
                                   kernels::Backend backend = kernels::Backend::parallel);

struct StepResult {
  ParticleSet set;
  std::vector<double> posterior;
  bool resampled = false;
};

/// predict -> weight -> normalize -> posterior -> resample when ESS < ess_threshold * N or any
/// weight < weight_floor.
StepResult step(ParticleSet set, const TransitionModel& model, const LikelihoodModel& likelihood,
                int lambda, std::span<const double> z, const ResampleConfig& cfg,
                kernels::Backend backend = kernels::Backend::parallel);

/// MAP zone, lowest index on ties.
int estimate(std::span<const double> posterior);

}  // namespace coilsense::pf

#endif
