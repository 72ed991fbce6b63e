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

#ifndef COILSENSE_ERRORS_HPP
#define COILSENSE_ERRORS_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace coilsense {

/// Failure categories shared by every module.
enum class Errc {
  invalid_parameter,
  invalid_input,
  invalid_query,
  zero_evidence,
  invalid_structure,
  degenerate_likelihood,
  degenerate_weights,
  invalid_state,
  insufficient_data,
};

std::string_view to_string(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what);

  [[nodiscard]] Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

/// Throws `Error(code, message)` unless `condition` holds.
inline void require(bool condition, Errc code, const char* message) {
  if (!condition) {
    throw Error(code, message);
  }
}

}  // namespace coilsense

#endif
