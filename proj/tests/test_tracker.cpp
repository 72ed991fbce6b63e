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

#include <algorithm>
#include <cmath>
#include <map>

#include "coilsense/tracker.hpp"
#include "fixtures.hpp"

using namespace coilsense;
using namespace coilsense::tracker;

namespace {

Trajectory from_zones(const std::vector<int>& zones) {
  Trajectory t;
  for (std::size_t i = 0; i < zones.size(); ++i) {
    // Out-of-range zones keep a uniform posterior so classify can reject them.
    std::vector<double> post(9, 1.0 / 9);
    if (zones[i] >= 0 && zones[i] < 9) {
      std::fill(post.begin(), post.end(), 0.0);
      post[static_cast<std::size_t>(zones[i])] = 1.0;
    }
    t.points.push_back({static_cast<int>(i), zones[i], post});
  }
  return t;
}

std::vector<int> zones_of(const Trajectory& t) {
  std::vector<int> z;
  for (const auto& p : t.points) {
    z.push_back(p.zone);
  }
  return z;
}

sim::HandPath hover(double x, double y, double duration) {
  sim::HandPath p;
  p.waypoints = {{0.0, x, y, 10.0}, {duration, x, y, 10.0}};
  return p;
}

}  // namespace

TEST_CASE("templates classify as themselves") {
  const sim::CoilPadConfig pad;
  for (auto label : kAllGestures) {
    CAPTURE(to_string(label));
    const auto c = classify(template_trajectory(label, 3, 3), pad);
    CHECK(c.label == label);
    CHECK(c.confidence > 0.5);
    CHECK(c.confidence <= 1.0);
  }
}

TEST_CASE("classifier symmetry, taps and time rescaling") {
  const sim::CoilPadConfig pad;
  auto right = zones_of(template_trajectory(GestureLabel::swipe_right, 3, 3));
  std::reverse(right.begin(), right.end());
  CHECK(classify(from_zones(right), pad).label == GestureLabel::swipe_left);

  const auto single = classify(from_zones({4}), pad);
  CHECK(single.label == GestureLabel::tap);
  CHECK(single.confidence == doctest::Approx(1.0));
  CHECK(classify(from_zones({4, 4, 4, 4}), pad).label == GestureLabel::tap);

  for (auto label : kAllGestures) {
    const auto z = zones_of(template_trajectory(label, 3, 3));
    std::vector<int> slow;
    for (int k : z) {
      slow.insert(slow.end(), 3, k);
    }
    CHECK(classify(from_zones(slow), pad).label == label);
  }
  CHECK_ERRC(classify(Trajectory{}, pad), Errc::invalid_input);
  Trajectory bad = from_zones({1, 2});
  bad.points[1].window = 0;
  CHECK_ERRC(bad.validate(), Errc::invalid_input);
  CHECK_ERRC(classify(from_zones({1, 12}), pad), Errc::invalid_input);
}

TEST_CASE("path features") {
  const std::vector<sim::Vec2> line{{0, 1}, {1, 1}, {2, 1}};
  CHECK(path_length(line) == doctest::Approx(2.0));
  const auto f = path_features(line);
  CHECK(f[8] == doctest::Approx(1.0));  // net dx / length
  CHECK(f[9] == doctest::Approx(0.0));
  const auto c = centroid_path(from_zones({0, 4, 8}), 3, 3);
  CHECK(c[1].x == 1.0);
  CHECK(c[2].y == 2.0);
}

TEST_CASE("score") {
  const std::vector<GestureLabel> t{GestureLabel::tap, GestureLabel::swipe_up, GestureLabel::tap,
                                    GestureLabel::swipe_up};
  const auto perfect = score(t, t);
  CHECK(perfect.accuracy == 1.0);
  CHECK(perfect.error_rate == 0.0);
  std::vector<GestureLabel> flipped;
  for (auto l : t) {
    flipped.push_back(l == GestureLabel::tap ? GestureLabel::swipe_up : GestureLabel::tap);
  }
  const auto m = score(t, flipped);
  CHECK(m.accuracy == 0.0);
  CHECK(m.accuracy + m.error_rate == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(m.confusion[index_of(GestureLabel::tap)][index_of(GestureLabel::swipe_up)] == 2);
  int total = 0;
  for (const auto& row : m.confusion) {
    for (int x : row) total += x;
  }
  CHECK(total == 4);
  CHECK_ERRC(score(std::vector<GestureLabel>{}, std::vector<GestureLabel>{}), Errc::invalid_input);
  CHECK_ERRC(score(t, std::vector<GestureLabel>{GestureLabel::tap}), Errc::invalid_input);
}

TEST_CASE("stationary hand converges to its zone") {
  const RunConfig cfg;
  const Tracker tk(cfg.pad, fixture::trained_net(), cfg.tracker);
  for (int k = 0; k < cfg.pad.coil_count(); ++k) {
    CAPTURE(k);
    const auto c = cfg.pad.coil_center(k);
    auto frames = sim::synthesize_trace(hover(c.x, c.y, 2.0), cfg.pad, sim::NoiseSpec::none(), 1);
    const auto traj = tk.track(frames, 3);
    REQUIRE(traj.points.size() == 20);
    for (std::size_t w = 1; w < traj.points.size(); ++w) {
      CHECK(traj.points[w].zone == k);
    }
    for (const auto& p : traj.points) {
      double s = 0.0;
      for (double x : p.posterior) s += x;
      CHECK(s == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
}

TEST_CASE("noiseless swipe right moves left to right") {
  const RunConfig cfg;
  const Tracker tk(cfg.pad, fixture::trained_net(), cfg.tracker);
  const auto frames = sim::synthesize_trace(
      sim::gesture_path(GestureLabel::swipe_right, cfg.pad, nullptr), cfg.pad,
      sim::NoiseSpec::none(), 1);
  const auto traj = tk.track(frames, 1);
  int prev = 0;
  for (const auto& p : traj.points) {
    CHECK(p.zone % 3 >= prev);
    prev = p.zone % 3;
  }
  CHECK(tk.classify(traj).label == GestureLabel::swipe_right);
}

TEST_CASE("track rejects traces shorter than a window") {
  const RunConfig cfg;
  const Tracker tk(cfg.pad, fixture::trained_net(), cfg.tracker);
  auto frames = sim::synthesize_trace(hover(0, 0, 0.06), cfg.pad, sim::NoiseSpec::none(), 1);
  REQUIRE(frames.size() == 3);
  CHECK_ERRC(tk.track(frames, 1), Errc::insufficient_data);
  CHECK_ERRC(tk.track({}, 1), Errc::insufficient_data);
}

TEST_CASE("tracker checks network shape") {
  const RunConfig cfg;
  sim::CoilPadConfig four = cfg.pad;
  four.rows = 2;
  four.cols = 2;
  CHECK_ERRC(Tracker(four, fixture::trained_net(), cfg.tracker), Errc::invalid_input);
  auto params = cfg.tracker;
  params.emission_sigma = 0.0;
  CHECK_ERRC(Tracker(cfg.pad, fixture::trained_net(), params), Errc::invalid_parameter);
}

TEST_CASE("training data and learned structure") {
  const RunConfig cfg;
  const auto data = sim::generate_dataset(kAllGestures, 3, cfg.pad, cfg.noise, 2);
  const auto samples = transition_samples(data, cfg.pad, cfg.tracker.dsp);
  CHECK(!samples.empty());
  for (const auto& s : samples) {
    REQUIRE(s.size() == 3);
    CHECK(s[0] >= 0);
    CHECK(s[0] < 9);
    CHECK(s[1] < 36);
  }
  const auto& net = fixture::trained_net();
  const int now = net.index_of(bn::kNowPosition);
  CHECK(std::find(net.parents(now).begin(), net.parents(now).end(),
                  net.index_of(bn::kLastPosition)) != net.parents(now).end());
  const auto features = dsp::preprocess(data[0].frames, cfg.tracker.dsp, cfg.pad.sample_rate);
  CHECK(ground_truth_zones(data[0].path, features, cfg.pad).size() == features.size());
}

TEST_CASE("evaluate is deterministic and backend independent") {
  const RunConfig cfg;
  const auto data = sim::generate_dataset(kAllGestures, 2, cfg.pad, cfg.noise, 17);
  auto serial = cfg.tracker;
  serial.backend = kernels::Backend::serial;
  const auto a = evaluate(data, fixture::trained_net(), cfg.pad, cfg.tracker, 5);
  const auto b = evaluate(data, fixture::trained_net(), cfg.pad, cfg.tracker, 5);
  const auto c = evaluate(data, fixture::trained_net(), cfg.pad, serial, 5);
  CHECK(a.predictions == b.predictions);
  CHECK(a.predictions == c.predictions);
  CHECK(a.zone_accuracy == c.zone_accuracy);
  CHECK(a.total == data.size());
  CHECK(a.accuracy >= 0.0);
  CHECK(a.accuracy <= 1.0);
  for (std::size_t i = 0; i < kGestureCount; ++i) {
    int row = 0;
    for (int x : a.confusion[i]) row += x;
    CHECK(row == 2);
  }
  CHECK_ERRC(evaluate(std::vector<sim::LabeledTrace>{}, fixture::trained_net(), cfg.pad,
                      cfg.tracker, 5),
             Errc::invalid_input);
}

TEST_CASE("split is stratified, disjoint and seeded") {
  const RunConfig cfg;
  const auto data = sim::generate_dataset(kAllGestures, 10, cfg.pad, sim::NoiseSpec::none(), 1);
  const auto s = split_dataset(data, 0.7, 9);
  CHECK(s.train.size() == 49);
  CHECK(s.test.size() == 21);
  std::map<GestureLabel, int> per;
  for (auto i : s.train) per[data[i].label]++;
  for (auto [label, n] : per) CHECK(n == 7);
  std::vector<std::size_t> all(s.train);
  all.insert(all.end(), s.test.begin(), s.test.end());
  std::sort(all.begin(), all.end());
  CHECK(std::adjacent_find(all.begin(), all.end()) == all.end());
  CHECK(all.size() == data.size());
  CHECK(split_dataset(data, 0.7, 9).train == s.train);
  CHECK(split_dataset(data, 0.7, 10).train != s.train);
  CHECK_ERRC(split_dataset(data, 1.0, 9), Errc::invalid_parameter);
  CHECK(select(data, s.test).size() == 21);
}

TEST_CASE("ablation report shape") {
  const RunConfig cfg;
  const auto data = sim::generate_dataset(kAllGestures, 4, cfg.pad, cfg.noise, 1);
  AblationGrid grid;
  grid.n_particles = {100};
  grid.iterations = 3;
  const auto one = ablate(data, cfg.pad, cfg.tracker, grid, 1);
  REQUIRE(one.grid.size() == 1);
  const auto& p = one.grid[0];
  CHECK(p.accuracy.size() == 3);
  CHECK(std::is_sorted(p.cumulative_best.begin(), p.cumulative_best.end()));
  CHECK(p.final_accuracy == doctest::Approx((p.accuracy[0] + p.accuracy[1] + p.accuracy[2]) / 3));
  grid.n_particles = {50, 100};
  grid.max_parents = {0, 2};
  grid.iterations = 1;
  CHECK(grid.size() == 4);
  CHECK(ablate(data, cfg.pad, cfg.tracker, grid, 1).grid.size() == 4);
  grid.alpha = {};
  CHECK_ERRC(ablate(data, cfg.pad, cfg.tracker, grid, 1), Errc::invalid_parameter);
  CHECK_ERRC(ablate(std::vector<sim::LabeledTrace>{}, cfg.pad, cfg.tracker, AblationGrid{}, 1),
             Errc::invalid_input);
}

TEST_CASE("distribution report") {
  const std::vector<double> v{1, 2, 3, 4};
  const auto r = distribution_report(v, 4);
  CHECK(r.frequency == std::vector<double>{0.25, 0.25, 0.25, 0.25});
  CHECK(r.cdf == std::vector<double>{0.25, 0.5, 0.75, 1.0});
  CHECK(r.cumulative_counts == std::vector<std::size_t>{1, 2, 3, 4});
  CHECK(r.edges.size() == 5);
  double area = 0.0;
  for (std::size_t b = 0; b < 4; ++b) area += r.pdf[b] * (r.edges[b + 1] - r.edges[b]);
  CHECK(area == doctest::Approx(1.0));

  const std::vector<double> constant(10, 2.5);
  const auto c = distribution_report(constant, 5);
  CHECK(c.counts[0] == 10);
  CHECK(c.cdf == std::vector<double>{1, 1, 1, 1, 1});

  CHECK_ERRC(distribution_report(std::vector<double>{}, 3), Errc::invalid_input);
  CHECK_ERRC(distribution_report(v, 0), Errc::invalid_parameter);
}
