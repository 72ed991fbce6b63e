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

#include "coilsense/errors.hpp"

namespace coilsense {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::invalid_parameter:
      return "invalid-parameter";
    case Errc::invalid_input:
      return "invalid-input";
    case Errc::invalid_query:
      return "invalid-query";
    case Errc::zero_evidence:
      return "zero-evidence";
    case Errc::invalid_structure:
      return "invalid-structure";
    case Errc::degenerate_likelihood:
      return "degenerate-likelihood";
    case Errc::degenerate_weights:
      return "degenerate-weights";
    case Errc::invalid_state:
      return "invalid-state";
    case Errc::insufficient_data:
      return "insufficient-data";
  }
  return "unknown";
}

Error::Error(Errc code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

}  // namespace coilsense
