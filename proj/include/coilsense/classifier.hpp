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

#ifndef COILSENSE_CLASSIFIER_HPP
#define COILSENSE_CLASSIFIER_HPP

#include <array>
#include <span>
#include <vector>

#include "coilsense/coilpad_sim.hpp"
#include "coilsense/gesture.hpp"

namespace coilsense::tracker {

struct TrajectoryPoint {
  int window = 0;
  int zone = 0;
  std::vector<double> posterior;

  friend bool operator==(const TrajectoryPoint&, const TrajectoryPoint&) = default;
};

/// Inferred zone sequence, one entry per processed window.
struct Trajectory {
  std::vector<TrajectoryPoint> points;

  /// Window indices strictly increasing.
  void validate() const;

  friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

struct ClassifierParams {
  /// Paths shorter than this (in zone pitches) are taps.
  double tap_threshold = 1.0;
};

/// 8 smoothed direction bins, net displacement (x, y), rotation.
using FeatureVector = std::array<double, 11>;

struct Classification {
  GestureLabel label = GestureLabel::tap;
  double confidence = 0.0;
  std::array<double, kGestureCount> distances{};
};

/// Center of each window's MAP zone, in lattice units (column, row).
std::vector<sim::Vec2> centroid_path(const Trajectory& traj, int rows, int cols);

/// Total length of a lattice path.
double path_length(std::span<const sim::Vec2> path);

/// Duration-free shape features: direction histogram weighted by step length, net displacement
/// over path length, and enclosed signed area over squared length (scaled to +-1 for a circle).
FeatureVector path_features(std::span<const sim::Vec2> path);

/// Idealized zone walk for a gesture on a rows x cols pad, as point-mass posteriors.
Trajectory template_trajectory(GestureLabel label, int rows, int cols);

/// Nearest template in feature space, ties to the earlier label. Paths shorter than
/// `tap_threshold` are taps. Confidence is the winner's share of inverse distances.
Classification classify(const Trajectory& traj, const sim::CoilPadConfig& pad,
                        const ClassifierParams& params = {});

}  // namespace coilsense::tracker

#endif
