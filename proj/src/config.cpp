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

#include "coilsense/config.hpp"

#include <cstdlib>
#include <fstream>
#include <initializer_list>
#include <string_view>

#include "coilsense/errors.hpp"

namespace coilsense {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, std::initializer_list<std::string_view> keys,
                    std::string_view section) {
  require(j.is_object(), Errc::invalid_parameter, "config sections must be JSON objects");
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const auto k : keys) {
      known = known || k == key;
    }
    if (!known) {
      throw Error(Errc::invalid_parameter,
                  "unknown config key '" + std::string(section) + "." + key + "'");
    }
  }
}

template <class T>
void take(const json& j, const char* key, T& out) {
  if (j.contains(key)) {
    out = j.at(key).get<T>();
  }
}

}  // namespace

void RunConfig::validate() const {
  pad.validate();
  noise.validate();
  tracker.validate(pad);
  network.validate();
  require(train_fraction > 0.0 && train_fraction < 1.0, Errc::invalid_parameter,
          "train_fraction must lie in (0, 1)");
  require(live.gesture_confidence >= 0.0 && live.gesture_confidence <= 1.0,
          Errc::invalid_parameter, "gesture_confidence must lie in [0, 1]");
  require(live.pointer_height >= 0.0, Errc::invalid_parameter,
          "pointer_height must be non-negative");
  require(live.session_ttl > 0.0, Errc::invalid_parameter, "session_ttl must be positive");
}

json to_json(const RunConfig& cfg) {
  const auto& p = cfg.pad;
  const auto& n = cfg.noise;
  const auto& d = cfg.tracker.dsp;
  const auto& f = cfg.tracker.pf;
  return json{
      {"seed", cfg.seed},
      {"pad",
       {{"rows", p.rows},
        {"cols", p.cols},
        {"coil_radius", p.coil_radius},
        {"pitch", p.pitch},
        {"base_current", p.base_current},
        {"sample_rate", p.sample_rate},
        {"amplitude", p.amplitude},
        {"falloff_sigma", p.falloff_sigma},
        {"base_voltage", p.base_voltage},
        {"voltage_gain", p.voltage_gain}}},
      {"noise",
       {{"gaussian_sigma", n.gaussian_sigma},
        {"drift_amplitude", n.drift_amplitude},
        {"drift_freq", n.drift_freq},
        {"dropout_prob", n.dropout_prob},
        {"shuffle_window", n.shuffle_window}}},
      {"dsp",
       {{"baseline", d.baseline},
        {"cutoff", d.cutoff},
        {"window_len", d.window_len},
        {"stride", d.stride},
        {"bins", d.bins},
        {"magnitude_scale", d.magnitude_scale},
        {"denoise", std::string(dsp::to_string(d.denoise_method))},
        {"denoise_window", d.denoise_window}}},
      {"bn", {{"alpha", cfg.network.alpha}, {"max_parents", cfg.network.max_parents}}},
      {"pf",
       {{"n_particles", f.n_particles},
        {"ess_threshold", f.ess_threshold},
        {"weight_floor", f.weight_floor},
        {"emission_sigma", cfg.tracker.emission_sigma},
        {"emission_floor", cfg.tracker.emission_floor}}},
      {"classifier", {{"tap_threshold", cfg.tracker.classifier.tap_threshold}}},
      {"eval", {{"train_fraction", cfg.train_fraction}}},
      {"live",
       {{"gesture_confidence", cfg.live.gesture_confidence},
        {"pointer_height", cfg.live.pointer_height},
        {"session_ttl", cfg.live.session_ttl}}},
  };
}

RunConfig from_json(const json& j, RunConfig cfg) {
  try {
    reject_unknown(j, {"seed", "pad", "noise", "dsp", "bn", "pf", "classifier", "eval", "live"},
                   "config");
    take(j, "seed", cfg.seed);
    if (j.contains("pad")) {
      const auto& s = j.at("pad");
      reject_unknown(s,
                     {"rows", "cols", "coil_radius", "pitch", "base_current", "sample_rate",
                      "amplitude", "falloff_sigma", "base_voltage", "voltage_gain"},
                     "pad");
      take(s, "rows", cfg.pad.rows);
      take(s, "cols", cfg.pad.cols);
      take(s, "coil_radius", cfg.pad.coil_radius);
      take(s, "pitch", cfg.pad.pitch);
      take(s, "base_current", cfg.pad.base_current);
      take(s, "sample_rate", cfg.pad.sample_rate);
      take(s, "amplitude", cfg.pad.amplitude);
      take(s, "falloff_sigma", cfg.pad.falloff_sigma);
      take(s, "base_voltage", cfg.pad.base_voltage);
      take(s, "voltage_gain", cfg.pad.voltage_gain);
    }
    if (j.contains("noise")) {
      const auto& s = j.at("noise");
      reject_unknown(s,
                     {"gaussian_sigma", "drift_amplitude", "drift_freq", "dropout_prob",
                      "shuffle_window"},
                     "noise");
      take(s, "gaussian_sigma", cfg.noise.gaussian_sigma);
      take(s, "drift_amplitude", cfg.noise.drift_amplitude);
      take(s, "drift_freq", cfg.noise.drift_freq);
      take(s, "dropout_prob", cfg.noise.dropout_prob);
      take(s, "shuffle_window", cfg.noise.shuffle_window);
    }
    if (j.contains("dsp")) {
      const auto& s = j.at("dsp");
      reject_unknown(s,
                     {"baseline", "cutoff", "window_len", "stride", "bins", "magnitude_scale",
                      "denoise", "denoise_window"},
                     "dsp");
      auto& d = cfg.tracker.dsp;
      take(s, "baseline", d.baseline);
      take(s, "cutoff", d.cutoff);
      take(s, "window_len", d.window_len);
      take(s, "stride", d.stride);
      take(s, "bins", d.bins);
      take(s, "magnitude_scale", d.magnitude_scale);
      if (s.contains("denoise")) {
        d.denoise_method = dsp::parse_denoise_method(s.at("denoise").get<std::string>());
      }
      take(s, "denoise_window", d.denoise_window);
    }
    if (j.contains("bn")) {
      const auto& s = j.at("bn");
      reject_unknown(s, {"alpha", "max_parents"}, "bn");
      take(s, "alpha", cfg.network.alpha);
      take(s, "max_parents", cfg.network.max_parents);
    }
    if (j.contains("pf")) {
      const auto& s = j.at("pf");
      reject_unknown(s, {"n_particles", "ess_threshold", "weight_floor", "emission_sigma",
                         "emission_floor"}, "pf");
      take(s, "n_particles", cfg.tracker.pf.n_particles);
      take(s, "ess_threshold", cfg.tracker.pf.ess_threshold);
      take(s, "weight_floor", cfg.tracker.pf.weight_floor);
      take(s, "emission_sigma", cfg.tracker.emission_sigma);
      take(s, "emission_floor", cfg.tracker.emission_floor);
    }
    if (j.contains("classifier")) {
      const auto& s = j.at("classifier");
      reject_unknown(s, {"tap_threshold"}, "classifier");
      take(s, "tap_threshold", cfg.tracker.classifier.tap_threshold);
    }
    if (j.contains("eval")) {
      const auto& s = j.at("eval");
      reject_unknown(s, {"train_fraction"}, "eval");
      take(s, "train_fraction", cfg.train_fraction);
    }
    if (j.contains("live")) {
      const auto& s = j.at("live");
      reject_unknown(s, {"gesture_confidence", "pointer_height", "session_ttl"}, "live");
      take(s, "gesture_confidence", cfg.live.gesture_confidence);
      take(s, "pointer_height", cfg.live.pointer_height);
      take(s, "session_ttl", cfg.live.session_ttl);
    }
  } catch (const json::exception& e) {
    throw Error(Errc::invalid_parameter, std::string("malformed config: ") + e.what());
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in.good()) {
    throw Error(Errc::invalid_input, "cannot open config " + path);
  }
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(Errc::invalid_parameter, "config " + path + " is not valid JSON: " + e.what());
  }
  return from_json(j);
}

std::uint64_t resolve_seed(std::optional<std::uint64_t> flag, std::uint64_t config_seed) {
  if (flag) {
    return *flag;
  }
  if (const char* env = std::getenv("COILSENSE_SEED"); env != nullptr && *env != '\0') {
    try {
      std::size_t used = 0;
      const auto value = std::stoull(env, &used);
      require(used == std::string_view(env).size(), Errc::invalid_parameter,
              "COILSENSE_SEED must be an unsigned integer");
      return value;
    } catch (const std::logic_error&) {
      throw Error(Errc::invalid_parameter, "COILSENSE_SEED must be an unsigned integer");
    }
  }
  return config_seed;
}

}  // namespace coilsense
