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

#include "coilsense/tracker.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <map>
#include <random>
#include <tuple>

#include "coilsense/errors.hpp"

namespace coilsense::tracker {

namespace {

std::uint64_t trace_seed(std::uint64_t seed, std::size_t index) {
  return kernels::stream_seed(seed, 0x7ACE'5EEDULL, index);
}

void check_network(const bn::BayesNet& net, const sim::CoilPadConfig& pad,
                   const dsp::DspParams& dsp) {
  const auto& vars = net.variables();
  const auto zones = pad.coil_count();
  require(vars[static_cast<std::size_t>(net.index_of(bn::kLastPosition))].cardinality == zones &&
              vars[static_cast<std::size_t>(net.index_of(bn::kNowPosition))].cardinality == zones,
          Errc::invalid_input, "network zone count does not match the pad");
  require(vars[static_cast<std::size_t>(net.index_of(bn::kEigenvalue))].cardinality ==
              zones * dsp.bins,
          Errc::invalid_input, "network eigenvalue cardinality must be coils * bins");
}

}  // namespace

void NetworkParams::validate() const {
  require(alpha >= 0.0, Errc::invalid_parameter, "alpha must be non-negative");
  require(max_parents >= 0, Errc::invalid_parameter, "max_parents must be non-negative");
}

void TrackerParams::validate(const sim::CoilPadConfig& pad) const {
  pad.validate();
  dsp.validate(pad.sample_rate);
  pf.validate();
  require(emission_sigma > 0.0, Errc::invalid_parameter, "emission_sigma must be positive");
  require(emission_floor >= 0.0, Errc::invalid_parameter, "emission_floor must be non-negative");
  require(classifier.tap_threshold > 0.0, Errc::invalid_parameter,
          "tap_threshold must be positive");
}

Tracker::Tracker(sim::CoilPadConfig pad, const bn::BayesNet& net, TrackerParams params)
    : pad_(pad),
      params_(params),
      likelihood_(pf::signature_likelihood(pad, params.emission_sigma, params.emission_floor)) {
  params_.validate(pad_);
  check_network(net, pad_, params_.dsp);
  transitions_ = pf::TransitionModel::from_network(net);
}

Trajectory Tracker::track_features(const dsp::WindowFeatures& features, std::uint64_t seed) const {
  require(features.size() > 0, Errc::insufficient_data, "trace is shorter than one window");
  auto set = pf::ParticleSet::uniform(params_.pf.n_particles, pad_.coil_count(), seed);
  Trajectory traj;
  traj.points.reserve(features.size());
  for (std::size_t w = 0; w < features.size(); ++w) {
    auto result = pf::step(std::move(set), transitions_, likelihood_,
                           features.eigenvalues[w].category(), features.measurements[w],
                           params_.pf, params_.backend);
    set = std::move(result.set);
    const int zone = pf::estimate(result.posterior);
    traj.points.push_back({static_cast<int>(w), zone, std::move(result.posterior)});
  }
  return traj;
}

Trajectory Tracker::track(std::vector<sim::SensorFrame> frames, std::uint64_t seed) const {
  return track_features(dsp::preprocess(std::move(frames), params_.dsp, pad_.sample_rate), seed);
}

Classification Tracker::classify(const Trajectory& traj) const {
  return tracker::classify(traj, pad_, params_.classifier);
}

Trajectory track(std::vector<sim::SensorFrame> frames, const bn::BayesNet& net,
                 const sim::CoilPadConfig& pad, const TrackerParams& params, std::uint64_t seed) {
  return Tracker(pad, net, params).track(std::move(frames), seed);
}

std::vector<int> ground_truth_zones(const sim::HandPath& path, const dsp::WindowFeatures& features,
                                    const sim::CoilPadConfig& pad) {
  std::vector<int> zones;
  zones.reserve(features.size());
  for (const auto& times : features.frame_times) {
    double x = 0.0;
    double y = 0.0;
    for (const double t : times) {
      const auto h = path.at(t);
      x += h.x;
      y += h.y;
    }
    const auto n = static_cast<double>(times.size());
    zones.push_back(pad.zone_at(x / n, y / n));
  }
  return zones;
}

std::vector<bn::Assignment> transition_samples(std::span<const sim::LabeledTrace> traces,
                                               const sim::CoilPadConfig& pad,
                                               const dsp::DspParams& dsp) {
  std::vector<bn::Assignment> samples;
  for (const auto& trace : traces) {
    const auto features = dsp::preprocess(trace.frames, dsp, pad.sample_rate);
    const auto truth = ground_truth_zones(trace.path, features, pad);
    for (std::size_t w = 1; w < features.size(); ++w) {
      samples.push_back({truth[w - 1], features.eigenvalues[w].category(), truth[w]});
    }
  }
  return samples;
}

bn::BayesNet train_network(std::span<const sim::LabeledTrace> traces,
                           const sim::CoilPadConfig& pad, const dsp::DspParams& dsp,
                           const NetworkParams& net_params) {
  net_params.validate();
  dsp.validate(pad.sample_rate);
  const auto samples = transition_samples(traces, pad, dsp);
  return bn::structure_search(bn::transition_variables(pad.coil_count(), pad.coil_count() * dsp.bins),
                              samples, net_params.max_parents, net_params.alpha);
}

Metrics score(std::span<const GestureLabel> truth, std::span<const GestureLabel> predicted) {
  require(!truth.empty(), Errc::invalid_input, "cannot score an empty dataset");
  require(truth.size() == predicted.size(), Errc::invalid_input,
          "truth and prediction counts differ");
  Metrics m;
  m.total = truth.size();
  m.predictions.assign(predicted.begin(), predicted.end());
  std::size_t correct = 0;
  std::array<std::size_t, kGestureCount> per_class_total{};
  std::array<std::size_t, kGestureCount> per_class_correct{};
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const auto t = index_of(truth[i]);
    const auto p = index_of(predicted[i]);
    ++m.confusion[t][p];
    ++per_class_total[t];
    if (t == p) {
      ++correct;
      ++per_class_correct[t];
    }
  }
  m.accuracy = static_cast<double>(correct) / static_cast<double>(m.total);
  m.error_rate = static_cast<double>(m.total - correct) / static_cast<double>(m.total);
  for (std::size_t k = 0; k < kGestureCount; ++k) {
    m.per_class[k] = per_class_total[k] == 0 ? 0.0
                                             : static_cast<double>(per_class_correct[k]) /
                                                   static_cast<double>(per_class_total[k]);
  }
  return m;
}

Metrics evaluate(std::span<const sim::LabeledTrace> dataset, const bn::BayesNet& net,
                 const sim::CoilPadConfig& pad, const TrackerParams& params, std::uint64_t seed) {
  require(!dataset.empty(), Errc::invalid_input, "cannot evaluate an empty dataset");
  const bool across_traces = params.backend == kernels::Backend::parallel;
  TrackerParams inner = params;
  if (across_traces) {
    inner.backend = kernels::Backend::serial;
  }
  const Tracker tracker(pad, net, inner);

  const auto n = dataset.size();
  std::vector<GestureLabel> predicted(n, GestureLabel::tap);
  std::vector<std::size_t> zone_hits(n, 0);
  std::vector<std::size_t> zone_total(n, 0);
  std::vector<std::exception_ptr> failures(n);

#pragma omp parallel for schedule(dynamic) if (across_traces)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
    const auto idx = static_cast<std::size_t>(i);
    try {
      const auto& trace = dataset[idx];
      const auto features = dsp::preprocess(trace.frames, inner.dsp, pad.sample_rate);
      const auto traj = tracker.track_features(features, trace_seed(seed, idx));
      predicted[idx] = tracker.classify(traj).label;
      const auto truth = ground_truth_zones(trace.path, features, pad);
      for (std::size_t w = 0; w < truth.size(); ++w) {
        zone_hits[idx] += traj.points[w].zone == truth[w] ? 1 : 0;
      }
      zone_total[idx] = truth.size();
    } catch (...) {
      failures[idx] = std::current_exception();
    }
  }
  for (const auto& f : failures) {
    if (f) {
      std::rethrow_exception(f);
    }
  }

  std::vector<GestureLabel> truth;
  truth.reserve(n);
  for (const auto& trace : dataset) {
    truth.push_back(trace.label);
  }
  auto m = score(truth, predicted);
  std::size_t hits = 0;
  std::size_t total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    hits += zone_hits[i];
    total += zone_total[i];
  }
  m.zone_accuracy = total == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(total);
  return m;
}

Split split_dataset(std::span<const sim::LabeledTrace> dataset, double train_fraction,
                    std::uint64_t seed) {
  require(train_fraction > 0.0 && train_fraction < 1.0, Errc::invalid_parameter,
          "train_fraction must lie in (0, 1)");
  std::mt19937_64 rng(seed);
  Split split;
  for (const auto label : kAllGestures) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
      if (dataset[i].label == label) {
        members.push_back(i);
      }
    }
    std::shuffle(members.begin(), members.end(), rng);
    const auto n_train = static_cast<std::size_t>(
        std::lround(train_fraction * static_cast<double>(members.size())));
    split.train.insert(split.train.end(), members.begin(),
                       members.begin() + static_cast<std::ptrdiff_t>(n_train));
    split.test.insert(split.test.end(), members.begin() + static_cast<std::ptrdiff_t>(n_train),
                      members.end());
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

std::vector<sim::LabeledTrace> select(std::span<const sim::LabeledTrace> dataset,
                                      std::span<const std::size_t> indices) {
  std::vector<sim::LabeledTrace> out;
  out.reserve(indices.size());
  for (const auto i : indices) {
    out.push_back(dataset[i]);
  }
  return out;
}

void AblationGrid::validate() const {
  require(!n_particles.empty() && !ess_threshold.empty() && !weight_floor.empty() &&
              !alpha.empty() && !window_len.empty() && !max_parents.empty(),
          Errc::invalid_parameter, "every ablation axis needs at least one value");
  for (const int n : n_particles) {
    require(n >= 1, Errc::invalid_parameter, "n_particles values must be at least 1");
  }
  for (const double e : ess_threshold) {
    require(e > 0.0 && e <= 1.0, Errc::invalid_parameter, "ess_threshold values must lie in (0, 1]");
  }
  for (const double w : weight_floor) {
    require(w >= 0.0, Errc::invalid_parameter, "weight_floor values must be non-negative");
  }
  for (const double a : alpha) {
    require(a >= 0.0, Errc::invalid_parameter, "alpha values must be non-negative");
  }
  for (const int w : window_len) {
    require(w >= 1, Errc::invalid_parameter, "window_len values must be at least 1");
  }
  for (const int p : max_parents) {
    require(p >= 0, Errc::invalid_parameter, "max_parents values must be non-negative");
  }
  require(iterations >= 1, Errc::invalid_parameter, "iterations must be at least 1");
  require(train_fraction > 0.0 && train_fraction < 1.0, Errc::invalid_parameter,
          "train_fraction must lie in (0, 1)");
}

std::size_t AblationGrid::size() const noexcept {
  return n_particles.size() * ess_threshold.size() * weight_floor.size() * alpha.size() *
         window_len.size() * max_parents.size();
}

AblationReport ablate(std::span<const sim::LabeledTrace> dataset, const sim::CoilPadConfig& pad,
                      const TrackerParams& base, const AblationGrid& grid, std::uint64_t seed) {
  grid.validate();
  require(!dataset.empty(), Errc::invalid_input, "cannot ablate on an empty dataset");

  std::vector<Split> splits;
  for (int it = 0; it < grid.iterations; ++it) {
    splits.push_back(split_dataset(dataset, grid.train_fraction,
                                   kernels::stream_seed(seed, static_cast<std::uint64_t>(it), 1)));
  }

  // Networks depend only on (alpha, window_len, max_parents, iteration).
  using NetKey = std::tuple<double, int, int, int>;
  std::map<NetKey, std::pair<bn::BayesNet, double>> networks;
  auto network_for = [&](double alpha, int window_len, int max_parents, int it)
      -> const std::pair<bn::BayesNet, double>& {
    const NetKey key{alpha, window_len, max_parents, it};
    auto found = networks.find(key);
    if (found == networks.end()) {
      auto dsp = base.dsp;
      dsp.window_len = window_len;
      dsp.stride = window_len;
      const auto train = select(dataset, splits[static_cast<std::size_t>(it)].train);
      auto net = train_network(train, pad, dsp, {alpha, max_parents});
      const auto samples = transition_samples(train, pad, dsp);
      const double k2 = bn::k2_score(net.variables(), net.structure(), samples);
      found = networks.emplace(key, std::make_pair(std::move(net), k2)).first;
    }
    return found->second;
  };

  AblationReport report;
  for (const int n : grid.n_particles)
    for (const double ess : grid.ess_threshold)
      for (const double floor : grid.weight_floor)
        for (const double alpha : grid.alpha)
          for (const int window_len : grid.window_len)
            for (const int max_parents : grid.max_parents) {
              AblationPoint point{n, ess, floor, alpha, window_len, max_parents, {}, {}, {}, {}, 0.0};
              auto params = base;
              params.pf = {ess, floor, n};
              params.dsp.window_len = window_len;
              params.dsp.stride = window_len;
              double sum = 0.0;
              double best = 0.0;
              for (int it = 0; it < grid.iterations; ++it) {
                const auto& [net, k2] = network_for(alpha, window_len, max_parents, it);
                const auto test = select(dataset, splits[static_cast<std::size_t>(it)].test);
                const double acc =
                    evaluate(test, net, pad, params,
                             kernels::stream_seed(seed, static_cast<std::uint64_t>(it), 2))
                        .accuracy;
                sum += acc;
                best = std::max(best, acc);
                point.accuracy.push_back(acc);
                point.running_mean.push_back(sum / (it + 1));
                point.cumulative_best.push_back(best);
                point.k2_score.push_back(k2);
              }
              point.final_accuracy = point.running_mean.back();
              report.grid.push_back(std::move(point));
            }
  return report;
}

DistributionReport distribution_report(std::span<const double> values, int bins) {
  require(bins >= 1, Errc::invalid_parameter, "bins must be at least 1");
  require(!values.empty(), Errc::invalid_input, "cannot summarize an empty sample");
  DistributionReport r;
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  r.lo = *lo_it;
  r.hi = *hi_it > *lo_it ? *hi_it : *lo_it + 1.0;
  const double width = (r.hi - r.lo) / bins;
  const auto n_bins = static_cast<std::size_t>(bins);
  for (std::size_t b = 0; b <= n_bins; ++b) {
    r.edges.push_back(b == n_bins ? r.hi : r.lo + width * static_cast<double>(b));
  }
  r.counts.assign(n_bins, 0);
  for (const double v : values) {
    const double pos = std::floor((v - r.lo) / width);
    const auto b = static_cast<std::size_t>(std::clamp(pos, 0.0, static_cast<double>(bins - 1)));
    ++r.counts[b];
  }
  const auto total = static_cast<double>(values.size());
  std::size_t running = 0;
  for (std::size_t b = 0; b < n_bins; ++b) {
    running += r.counts[b];
    r.cumulative_counts.push_back(running);
    r.frequency.push_back(static_cast<double>(r.counts[b]) / total);
    r.pdf.push_back(r.frequency.back() / width);
    r.cdf.push_back(static_cast<double>(running) / total);
  }
  return r;
}

}  // namespace coilsense::tracker
