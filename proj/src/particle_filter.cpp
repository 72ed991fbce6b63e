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

#include "coilsense/particle_filter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "coilsense/errors.hpp"

namespace coilsense::pf {

namespace {

/// Stream id reserved for the resampling offset so it never collides with a predict chunk.
constexpr std::uint64_t kResampleStream = std::numeric_limits<std::uint64_t>::max();

double draw_offset(const ParticleSet& set) {
  std::mt19937_64 gen(kernels::stream_seed(set.rng_seed, set.epoch, kResampleStream));
  return std::generate_canonical<double, 53>(gen);
}

double weight_sum(const ParticleSet& set) {
  double sum = 0.0;
  for (const auto& p : set.particles) {
    sum += p.weight;
  }
  return sum;
}

std::vector<double> weights_of(const ParticleSet& set) {
  std::vector<double> w;
  w.reserve(set.size());
  for (const auto& p : set.particles) {
    w.push_back(p.weight);
  }
  return w;
}

}  // namespace

ParticleSet ParticleSet::uniform(int n, int zones, std::uint64_t seed) {
  require(n >= 1, Errc::invalid_parameter, "particle count must be at least 1");
  require(zones >= 1, Errc::invalid_parameter, "zone count must be at least 1");
  ParticleSet set;
  set.rng_seed = seed;
  set.particles.reserve(static_cast<std::size_t>(n));
  const double w = 1.0 / n;
  for (int i = 0; i < n; ++i) {
    const auto state = static_cast<int>((static_cast<std::int64_t>(i) * zones) / n);
    set.particles.push_back({state, w});
  }
  return set;
}

TransitionModel::TransitionModel(std::vector<bn::ZoneMatrix> by_lambda)
    : matrices_(std::move(by_lambda)) {
  require(!matrices_.empty(), Errc::invalid_input, "transition model needs at least one matrix");
  zones_ = matrices_.front().zones;
  require(zones_ >= 1, Errc::invalid_input, "transition matrix must have zones");
  cumulative_.reserve(matrices_.size());
  for (const auto& m : matrices_) {
    require(m.zones == zones_ && m.data.size() == static_cast<std::size_t>(zones_) * zones_,
            Errc::invalid_input, "transition matrices disagree on zone count");
    std::vector<double> cum(m.data.size());
    for (int i = 0; i < zones_; ++i) {
      double acc = 0.0;
      for (int j = 0; j < zones_; ++j) {
        require(m(i, j) >= 0.0, Errc::invalid_input, "negative transition probability");
        acc += m(i, j);
        cum[static_cast<std::size_t>(i) * zones_ + j] = acc;
      }
      require(std::abs(acc - 1.0) <= 1e-9, Errc::invalid_input,
              "transition row does not sum to 1");
      // Pin the last entry so a draw in [0, 1) always lands inside the row.
      cum[static_cast<std::size_t>(i) * zones_ + zones_ - 1] = 1.0;
    }
    cumulative_.push_back(std::move(cum));
  }
}

TransitionModel TransitionModel::from_network(const bn::BayesNet& net) {
  const int categories =
      net.variables()[static_cast<std::size_t>(net.index_of(bn::kEigenvalue))].cardinality;
  std::vector<bn::ZoneMatrix> matrices;
  matrices.reserve(static_cast<std::size_t>(categories));
  for (int l = 0; l < categories; ++l) {
    matrices.push_back(bn::transition_matrix(net, l));
  }
  return TransitionModel(std::move(matrices));
}

const bn::ZoneMatrix& TransitionModel::matrix(int lambda) const {
  require(lambda >= 0 && lambda < categories(), Errc::invalid_input,
          "eigenvalue category out of range");
  return matrices_[static_cast<std::size_t>(lambda)];
}

std::span<const double> TransitionModel::cumulative(int lambda) const {
  require(lambda >= 0 && lambda < categories(), Errc::invalid_input,
          "eigenvalue category out of range");
  return cumulative_[static_cast<std::size_t>(lambda)];
}

std::vector<double> LikelihoodModel::evaluate(std::span<const double> z) const {
  std::vector<double> out(static_cast<std::size_t>(zones_));
  for (int k = 0; k < zones_; ++k) {
    const double e = emission(k, z);
    require(e >= 0.0 && std::isfinite(e), Errc::invalid_input,
            "emission must be finite and non-negative");
    out[static_cast<std::size_t>(k)] = e;
  }
  return out;
}

std::vector<std::vector<double>> zone_signatures(const sim::CoilPadConfig& pad) {
  pad.validate();
  const int n = pad.coil_count();
  std::vector<std::vector<double>> sigs(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    const auto c = pad.coil_center(k);
    auto& s = sigs[static_cast<std::size_t>(k)];
    for (int i = 0; i < n; ++i) {
      s.push_back(sim::perturbation({c.x, c.y, 0.0}, pad.coil_center(i), 1.0, pad.falloff_sigma));
    }
    const double lo = *std::min_element(s.begin(), s.end());
    for (auto& v : s) {
      v -= lo;
    }
  }
  return sigs;
}

LikelihoodModel signature_likelihood(const sim::CoilPadConfig& pad, double sigma, double floor) {
  require(sigma > 0.0, Errc::invalid_parameter, "emission sigma must be positive");
  require(floor >= 0.0, Errc::invalid_parameter, "emission floor must be non-negative");
  auto sigs = zone_signatures(pad);
  const int zones = pad.coil_count();
  const double inv_two_var = 1.0 / (2.0 * sigma * sigma);

  // Squared residual of the best non-negative fit gain * s to z - min(z). It equals
  // |z - lo|^2 (1 - cos^2), so the signal energy is clamped below at floor^2 to keep the shape
  // informative while the filtered response decays.
  auto residual = [sigs, floor](int zone, std::span<const double> z) {
    const auto& s = sigs[static_cast<std::size_t>(zone)];
    require(z.size() == s.size(), Errc::invalid_input, "measurement length must equal coil count");
    const double lo = *std::min_element(z.begin(), z.end());
    double ss = 0.0;
    double sz = 0.0;
    double zz = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      ss += s[i] * s[i];
      sz += s[i] * (z[i] - lo);
      zz += (z[i] - lo) * (z[i] - lo);
    }
    if (zz <= 0.0 || ss <= 0.0) {
      return 0.0;
    }
    const double cos = std::max(0.0, sz / std::sqrt(ss * zz));
    return (1.0 - cos * cos) * std::max(zz, floor * floor);
  };

  // Densities are reported relative to the best-fitting zone. The factor depends on z alone, so
  // posteriors are unchanged and no zone underflows to zero.
  return LikelihoodModel(zones, [residual, zones, inv_two_var](int zone, std::span<const double> z) {
    double best = std::numeric_limits<double>::infinity();
    for (int k = 0; k < zones; ++k) {
      best = std::min(best, residual(k, z));
    }
    return std::exp(-(residual(zone, z) - best) * inv_two_var);
  });
}

void ResampleConfig::validate() const {
  require(ess_threshold > 0.0 && ess_threshold <= 1.0, Errc::invalid_parameter,
          "ess_threshold must lie in (0, 1]");
  require(weight_floor >= 0.0, Errc::invalid_parameter, "weight_floor must be non-negative");
  require(n_particles >= 1, Errc::invalid_parameter, "n_particles must be at least 1");
}

ParticleSet predict(ParticleSet set, const TransitionModel& model, int lambda,
                    kernels::Backend backend) {
  const auto cumulative = model.cumulative(lambda);
  for (const auto& p : set.particles) {
    require(p.state >= 0 && p.state < model.zones(), Errc::invalid_state,
            "particle state outside the zone range");
  }
  kernels::predict_states(backend, set.particles, cumulative, model.zones(), set.rng_seed,
                          set.epoch);
  ++set.epoch;
  return set;
}

ParticleSet weight_update(ParticleSet set, const LikelihoodModel& likelihood,
                          std::span<const double> z, kernels::Backend backend) {
  const auto factor = likelihood.evaluate(z);
  kernels::scale_weights(backend, set.particles, factor);
  const bool alive = std::any_of(set.particles.begin(), set.particles.end(),
                                 [](const Particle& p) { return p.weight > 0.0; });
  require(alive, Errc::degenerate_likelihood, "likelihood assigns zero weight to every particle");
  return set;
}

ParticleSet normalize(ParticleSet set) {
  const double sum = weight_sum(set);
  require(sum > 0.0 && std::isfinite(sum), Errc::degenerate_weights, "weights sum to zero");
  for (auto& p : set.particles) {
    p.weight /= sum;
  }
  return set;
}

double effective_sample_size(const ParticleSet& set) {
  require(!set.particles.empty(), Errc::invalid_state, "empty particle set");
  require(std::abs(weight_sum(set) - 1.0) <= 1e-9, Errc::invalid_state,
          "effective sample size needs normalized weights");
  double sq = 0.0;
  for (const auto& p : set.particles) {
    sq += p.weight * p.weight;
  }
  return 1.0 / sq;
}

std::vector<std::size_t> systematic_indices(std::span<const double> weights, std::size_t count,
                                            double offset) {
  require(!weights.empty(), Errc::degenerate_weights, "no weights to resample");
  require(offset >= 0.0 && offset < 1.0, Errc::invalid_parameter, "offset must lie in [0, 1)");
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  require(total > 0.0 && std::isfinite(total), Errc::degenerate_weights, "weights sum to zero");

  std::size_t last_positive = 0;
  for (std::size_t j = 0; j < weights.size(); ++j) {
    if (weights[j] > 0.0) {
      last_positive = j;
    }
  }
  std::vector<std::size_t> out(count);
  std::size_t j = 0;
  double cum = weights[0];
  for (std::size_t i = 0; i < count; ++i) {
    const double position = (offset + static_cast<double>(i)) / static_cast<double>(count) * total;
    while (position >= cum && j < last_positive) {
      ++j;
      cum += weights[j];
    }
    out[i] = j;
  }
  return out;
}

ParticleSet resize(ParticleSet set, int n) {
  require(n >= 1, Errc::invalid_parameter, "particle count must be at least 1");
  const auto w = weights_of(set);
  const auto idx = systematic_indices(w, static_cast<std::size_t>(n), draw_offset(set));
  std::vector<Particle> next;
  next.reserve(idx.size());
  const double uniform = 1.0 / n;
  for (const auto i : idx) {
    next.push_back({set.particles[i].state, uniform});
  }
  set.particles = std::move(next);
  ++set.epoch;
  return set;
}

ParticleSet resample(ParticleSet set) {
  const auto n = static_cast<int>(set.size());
  return resize(std::move(set), n);
}

std::vector<double> zone_histogram(const ParticleSet& set, int zones, kernels::Backend backend) {
  std::vector<double> hist(static_cast<std::size_t>(zones), 0.0);
  for (const auto& p : set.particles) {
    require(p.state >= 0 && p.state < zones, Errc::invalid_state,
            "particle state outside the zone range");
  }
  kernels::zone_histogram(backend, set.particles, hist);
  return hist;
}

StepResult step(ParticleSet set, const TransitionModel& model, const LikelihoodModel& likelihood,
                int lambda, std::span<const double> z, const ResampleConfig& cfg,
                kernels::Backend backend) {
  cfg.validate();
  set = predict(std::move(set), model, lambda, backend);
  set = weight_update(std::move(set), likelihood, z, backend);
  set = normalize(std::move(set));

  StepResult result;
  result.posterior = zone_histogram(set, model.zones(), backend);

  const double n = static_cast<double>(set.size());
  const double ess = effective_sample_size(set);
  const double min_weight =
      std::min_element(set.particles.begin(), set.particles.end(),
                       [](const Particle& a, const Particle& b) { return a.weight < b.weight; })
          ->weight;
  // ESS never exceeds N, so a threshold of 1 means every step.
  result.resampled = cfg.ess_threshold >= 1.0 || ess < cfg.ess_threshold * n ||
                     min_weight < cfg.weight_floor;
  result.set = result.resampled ? resample(std::move(set)) : std::move(set);
  return result;
}

int estimate(std::span<const double> posterior) {
  require(!posterior.empty(), Errc::invalid_input, "empty distribution");
  return static_cast<int>(std::max_element(posterior.begin(), posterior.end()) - posterior.begin());
}

}  // namespace coilsense::pf
