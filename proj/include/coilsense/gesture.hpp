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

#ifndef COILSENSE_GESTURE_HPP
#define COILSENSE_GESTURE_HPP

#include <array>
#include <cstddef>
#include <string_view>

namespace coilsense {

/// Closed gesture vocabulary. Enumerator order is the classifier's tie-break order.
enum class GestureLabel {
  swipe_left,
  swipe_right,
  swipe_up,
  swipe_down,
  circle_cw,
  circle_ccw,
  tap,
};

inline constexpr std::size_t kGestureCount = 7;

inline constexpr std::array<GestureLabel, kGestureCount> kAllGestures = {
    GestureLabel::swipe_left, GestureLabel::swipe_right, GestureLabel::swipe_up,
    GestureLabel::swipe_down, GestureLabel::circle_cw,   GestureLabel::circle_ccw,
    GestureLabel::tap,
};

std::string_view to_string(GestureLabel label) noexcept;

/// Parses a snake_case gesture name; throws `Error(Errc::invalid_input)` on unknown names.
GestureLabel parse_gesture(std::string_view name);

constexpr std::size_t index_of(GestureLabel label) noexcept {
  return static_cast<std::size_t>(label);
}

}  // namespace coilsense

#endif
