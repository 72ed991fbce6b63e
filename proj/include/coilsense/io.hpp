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

#ifndef COILSENSE_IO_HPP
#define COILSENSE_IO_HPP

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "coilsense/bayesnet.hpp"
#include "coilsense/classifier.hpp"
#include "coilsense/coilpad_sim.hpp"
#include "coilsense/dsp.hpp"
#include "coilsense/tracker.hpp"

/**
 * \file
 * \brief On-disk formats. Traces, posteriors and features are JSON Lines; manifests, networks,
 * metrics and ablation reports are JSON; tabular reports are CSV with a header row.
 * Column schemas are listed in docs/formats.md.
 */

namespace coilsense::io {

namespace fs = std::filesystem;

/// Shortest round-trip decimal form of `v`.
std::string format_double(double v);

// Sensor traces: one `{"t": s, "i": [A...], "v": [V...]}` object per line.
void write_trace(std::ostream& out, const std::vector<sim::SensorFrame>& frames);
std::vector<sim::SensorFrame> read_trace(std::istream& in);

nlohmann::json pad_to_json(const sim::CoilPadConfig& pad);
sim::CoilPadConfig pad_from_json(const nlohmann::json& j);
nlohmann::json noise_to_json(const sim::NoiseSpec& noise);
sim::NoiseSpec noise_from_json(const nlohmann::json& j);
nlohmann::json path_to_json(const sim::HandPath& path);
sim::HandPath path_from_json(const nlohmann::json& j);

struct Dataset {
  sim::CoilPadConfig pad;
  sim::NoiseSpec noise;
  std::uint64_t seed = 0;
  std::vector<sim::LabeledTrace> traces;
};

/// Writes `manifest.json` plus `traces/<label>_<index>.jsonl` under `dir` (created if missing).
void save_dataset(const fs::path& dir, const Dataset& data);
/// Reads a directory written by `save_dataset`. Throws `Errc::invalid_input` on a missing or
/// malformed manifest.
Dataset load_dataset(const fs::path& dir);

/// `{"variables": [{"name", "cardinality", "parents": [names], "cpt": [...]}]}`.
nlohmann::json network_to_json(const bn::BayesNet& net);
bn::BayesNet network_from_json(const nlohmann::json& j);

/// One `{"t": window, "posterior": [...], "map": zone}` line per trajectory point.
void write_posteriors(std::ostream& out, const tracker::Trajectory& traj);
/// One `{"w", "coil", "bin", "category", "z": [...]}` line per window.
void write_features(std::ostream& out, const dsp::WindowFeatures& features);

nlohmann::json metrics_to_json(const tracker::Metrics& m);
/// Header `truth,<labels...>`, one row per true label.
void write_confusion_csv(std::ostream& out, const tracker::Metrics& m);

/// Overlays `j` on `base`; each axis may be a scalar or a list.
tracker::AblationGrid grid_from_json(const nlohmann::json& j, tracker::AblationGrid base = {});
nlohmann::json ablation_to_json(const tracker::AblationReport& report);
/// One row per grid point per iteration.
void write_ablation_csv(std::ostream& out, const tracker::AblationReport& report);

nlohmann::json distribution_to_json(const tracker::DistributionReport& report);
void write_distribution_csv(std::ostream& out, const tracker::DistributionReport& report);

nlohmann::json read_json_file(const fs::path& path);
void write_json_file(const fs::path& path, const nlohmann::json& j);
/// Creates the parent directory when needed.
void write_text_file(const fs::path& path, const std::string& text);

}  // namespace coilsense::io

#endif
