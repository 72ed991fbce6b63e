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

#include "coilsense/gesture.hpp"

#include <string>

#include "coilsense/errors.hpp"

namespace coilsense {

std::string_view to_string(GestureLabel label) noexcept {
  switch (label) {
    case GestureLabel::swipe_left:
      return "swipe_left";
    case GestureLabel::swipe_right:
      return "swipe_right";
    case GestureLabel::swipe_up:
      return "swipe_up";
    case GestureLabel::swipe_down:
      return "swipe_down";
    case GestureLabel::circle_cw:
      return "circle_cw";
    case GestureLabel::circle_ccw:
      return "circle_ccw";
    case GestureLabel::tap:
      return "tap";
  }
  return "unknown";
}

GestureLabel parse_gesture(std::string_view name) {
  for (const auto label : kAllGestures) {
    if (to_string(label) == name) {
      return label;
    }
  }
  throw Error(Errc::invalid_input, "unknown gesture label '" + std::string(name) + "'");
}

}  // namespace coilsense
