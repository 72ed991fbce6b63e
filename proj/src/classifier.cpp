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

#include "coilsense/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "coilsense/errors.hpp"

namespace coilsense::tracker {

namespace {

constexpr int kDirectionBins = 8;
constexpr double kEpsilon = 1e-6;

std::vector<int> ring_zones(int rows, int cols) {
  // Counter-clockwise walk over the border cells starting at the bottom-left corner.
  std::vector<int> ring;
  if (rows < 2 || cols < 2) {
    for (int c = 0; c < cols; ++c) {
      ring.push_back(c);
    }
    return ring;
  }
  for (int c = 0; c < cols; ++c) ring.push_back(c);
  for (int r = 1; r < rows; ++r) ring.push_back(r * cols + cols - 1);
  for (int c = cols - 2; c >= 0; --c) ring.push_back((rows - 1) * cols + c);
  for (int r = rows - 2; r >= 0; --r) ring.push_back(r * cols);
  return ring;
}

Trajectory from_zones(const std::vector<int>& zones, int n_zones) {
  Trajectory t;
  for (std::size_t i = 0; i < zones.size(); ++i) {
    std::vector<double> post(static_cast<std::size_t>(n_zones), 0.0);
    post[static_cast<std::size_t>(zones[i])] = 1.0;
    t.points.push_back({static_cast<int>(i), zones[i], std::move(post)});
  }
  return t;
}

double distance(const FeatureVector& a, const FeatureVector& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    d += (a[i] - b[i]) * (a[i] - b[i]);
  }
  return std::sqrt(d);
}

}  // namespace

void Trajectory::validate() const {
  for (std::size_t i = 1; i < points.size(); ++i) {
    require(points[i].window > points[i - 1].window, Errc::invalid_input,
            "trajectory window indices must strictly increase");
  }
}

std::vector<sim::Vec2> centroid_path(const Trajectory& traj, int rows, int cols) {
  std::vector<sim::Vec2> path;
  path.reserve(traj.points.size());
  for (const auto& p : traj.points) {
    require(p.zone >= 0 && p.zone < rows * cols, Errc::invalid_input, "zone outside the pad");
    path.push_back({static_cast<double>(p.zone % cols), static_cast<double>(p.zone / cols)});
  }
  return path;
}

double path_length(std::span<const sim::Vec2> path) {
  double length = 0.0;
  for (std::size_t i = 1; i < path.size(); ++i) {
    length += std::hypot(path[i].x - path[i - 1].x, path[i].y - path[i - 1].y);
  }
  return length;
}

FeatureVector path_features(std::span<const sim::Vec2> path) {
  FeatureVector f{};
  const double length = path_length(path);
  if (length <= 0.0) {
    return f;
  }
  std::array<double, kDirectionBins> hist{};
  for (std::size_t i = 1; i < path.size(); ++i) {
    const double dx = path[i].x - path[i - 1].x;
    const double dy = path[i].y - path[i - 1].y;
    const double step = std::hypot(dx, dy);
    if (step == 0.0) {
      continue;
    }
    const double sector = std::atan2(dy, dx) / (2.0 * std::numbers::pi / kDirectionBins);
    const int bin = ((static_cast<int>(std::lround(sector)) % kDirectionBins) + kDirectionBins) %
                    kDirectionBins;
    hist[static_cast<std::size_t>(bin)] += step / length;
  }
  for (int b = 0; b < kDirectionBins; ++b) {
    const auto prev = static_cast<std::size_t>((b + kDirectionBins - 1) % kDirectionBins);
    const auto next = static_cast<std::size_t>((b + 1) % kDirectionBins);
    f[static_cast<std::size_t>(b)] =
        0.25 * hist[prev] + 0.5 * hist[static_cast<std::size_t>(b)] + 0.25 * hist[next];
  }
  f[8] = (path.back().x - path.front().x) / length;
  f[9] = (path.back().y - path.front().y) / length;
  // Shoelace area of the closed polygon; a circle gives area / length^2 = 1 / (4 pi).
  double area = 0.0;
  for (std::size_t i = 0; i < path.size(); ++i) {
    const auto& a = path[i];
    const auto& b = path[(i + 1) % path.size()];
    area += a.x * b.y - b.x * a.y;
  }
  f[10] = 0.5 * area / (length * length) * 4.0 * std::numbers::pi;
  return f;
}

Trajectory template_trajectory(GestureLabel label, int rows, int cols) {
  const int mid_row = rows / 2;
  const int mid_col = cols / 2;
  std::vector<int> zones;
  switch (label) {
    case GestureLabel::swipe_right:
      for (int c = 0; c < cols; ++c) zones.push_back(mid_row * cols + c);
      break;
    case GestureLabel::swipe_left:
      for (int c = cols - 1; c >= 0; --c) zones.push_back(mid_row * cols + c);
      break;
    case GestureLabel::swipe_up:
      for (int r = 0; r < rows; ++r) zones.push_back(r * cols + mid_col);
      break;
    case GestureLabel::swipe_down:
      for (int r = rows - 1; r >= 0; --r) zones.push_back(r * cols + mid_col);
      break;
    case GestureLabel::circle_ccw: {
      zones = ring_zones(rows, cols);
      zones.push_back(zones.front());
      break;
    }
    case GestureLabel::circle_cw: {
      zones = ring_zones(rows, cols);
      zones.push_back(zones.front());
      std::reverse(zones.begin(), zones.end());
      break;
    }
    case GestureLabel::tap:
      zones.push_back(mid_row * cols + mid_col);
      break;
  }
  return from_zones(zones, rows * cols);
}

Classification classify(const Trajectory& traj, const sim::CoilPadConfig& pad,
                        const ClassifierParams& params) {
  require(!traj.points.empty(), Errc::invalid_input, "cannot classify an empty trajectory");
  traj.validate();
  const auto path = centroid_path(traj, pad.rows, pad.cols);
  const auto features = path_features(path);

  Classification out;
  for (const auto label : kAllGestures) {
    const auto tmpl = template_trajectory(label, pad.rows, pad.cols);
    const auto tmpl_features = path_features(centroid_path(tmpl, pad.rows, pad.cols));
    out.distances[index_of(label)] = distance(features, tmpl_features);
  }

  const double length = path_length(path);
  if (traj.points.size() < 2 || length < params.tap_threshold) {
    out.label = GestureLabel::tap;
    out.confidence = 1.0 - 0.5 * length / params.tap_threshold;
    return out;
  }

  // The zero-motion rule owns taps; only moving gestures compete here.
  double total_inverse = 0.0;
  std::size_t best = 0;
  for (std::size_t k = 0; k < kGestureCount; ++k) {
    if (kAllGestures[k] == GestureLabel::tap) {
      continue;
    }
    total_inverse += 1.0 / (out.distances[k] + kEpsilon);
    if (out.distances[k] < out.distances[best]) {
      best = k;
    }
  }
  out.label = kAllGestures[best];
  out.confidence = (1.0 / (out.distances[best] + kEpsilon)) / total_inverse;
  return out;
}

}  // namespace coilsense::tracker
