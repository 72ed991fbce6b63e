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

#ifndef COILSENSE_CONFIG_HPP
#define COILSENSE_CONFIG_HPP

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "coilsense/coilpad_sim.hpp"
#include "coilsense/tracker.hpp"

namespace coilsense {

struct LiveParams {
  /// Minimum classifier confidence for a `gesture` message after a stroke ends.
  double gesture_confidence = 0.0;
  /// Hand height while the pointer is pressed, mm.
  double pointer_height = 10.0;
  /// Detached sessions are discarded after this many seconds.
  double session_ttl = 60.0;
};

/// Everything a run needs. JSON documents may be partial; missing keys keep their defaults.
struct RunConfig {
  std::uint64_t seed = 42;
  sim::CoilPadConfig pad;
  sim::NoiseSpec noise = sim::NoiseSpec::standard();
  tracker::TrackerParams tracker;
  tracker::NetworkParams network;
  double train_fraction = 0.7;
  LiveParams live;

  /// Validates every section against its owning module.
  void validate() const;
};

nlohmann::json to_json(const RunConfig& cfg);
/// Overlays `j` on `base`. Unknown keys are rejected with `Errc::invalid_parameter`.
RunConfig from_json(const nlohmann::json& j, RunConfig base = {});

RunConfig load_config(const std::string& path);

/// Seed resolution: explicit flag, then `COILSENSE_SEED`, then the config value.
std::uint64_t resolve_seed(std::optional<std::uint64_t> flag, std::uint64_t config_seed);

}  // namespace coilsense

#endif
