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

#include "coilsense/io.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string_view>

#include "coilsense/config.hpp"
#include "coilsense/errors.hpp"
#include "coilsense/particle_filter.hpp"

namespace coilsense::io {

using nlohmann::json;

namespace {

constexpr int kManifestVersion = 1;

[[noreturn]] void bad_input(const std::string& what) { throw Error(Errc::invalid_input, what); }

template <class T>
std::vector<T> scalar_or_list(const json& j) {
  if (j.is_array()) {
    return j.get<std::vector<T>>();
  }
  return {j.get<T>()};
}

}  // namespace

std::string format_double(double v) {
  std::array<char, 64> buf{};
  const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), end);
}

void write_trace(std::ostream& out, const std::vector<sim::SensorFrame>& frames) {
  for (const auto& f : frames) {
    out << json{{"t", f.t}, {"i", f.currents}, {"v", f.voltages}}.dump() << '\n';
  }
}

std::vector<sim::SensorFrame> read_trace(std::istream& in) {
  std::vector<sim::SensorFrame> frames;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    try {
      const auto j = json::parse(line);
      sim::SensorFrame f;
      f.t = j.at("t").get<double>();
      f.currents = j.at("i").get<std::vector<double>>();
      f.voltages = j.at("v").get<std::vector<double>>();
      if (f.currents.size() != f.voltages.size()) {
        bad_input("trace line " + std::to_string(lineno) + ": current/voltage length mismatch");
      }
      frames.push_back(std::move(f));
    } catch (const json::exception& e) {
      bad_input("trace line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return frames;
}

json pad_to_json(const sim::CoilPadConfig& pad) {
  RunConfig cfg;
  cfg.pad = pad;
  return to_json(cfg).at("pad");
}

sim::CoilPadConfig pad_from_json(const json& j) {
  auto pad = from_json(json{{"pad", j}}).pad;
  pad.validate();
  return pad;
}

json noise_to_json(const sim::NoiseSpec& noise) {
  RunConfig cfg;
  cfg.noise = noise;
  return to_json(cfg).at("noise");
}

sim::NoiseSpec noise_from_json(const json& j) {
  RunConfig base;
  base.noise = sim::NoiseSpec::none();
  auto noise = from_json(json{{"noise", j}}, base).noise;
  noise.validate();
  return noise;
}

json path_to_json(const sim::HandPath& path) {
  json wp = json::array();
  for (const auto& w : path.waypoints) {
    wp.push_back({w.t, w.x, w.y, w.z});
  }
  return wp;
}

sim::HandPath path_from_json(const json& j) {
  sim::HandPath path;
  try {
    for (const auto& w : j) {
      const auto v = w.get<std::vector<double>>();
      if (v.size() != 4) {
        bad_input("waypoints are [t, x, y, z]");
      }
      path.waypoints.push_back({v[0], v[1], v[2], v[3]});
    }
  } catch (const json::exception& e) {
    bad_input(std::string("malformed path: ") + e.what());
  }
  path.validate();
  return path;
}

void save_dataset(const fs::path& dir, const Dataset& data) {
  fs::create_directories(dir / "traces");
  std::array<int, kGestureCount> seen{};
  json entries = json::array();
  for (const auto& trace : data.traces) {
    const auto idx = seen[index_of(trace.label)]++;
    const std::string file =
        "traces/" + std::string(to_string(trace.label)) + "_" + std::to_string(idx) + ".jsonl";
    std::ofstream out(dir / file, std::ios::binary);
    if (!out) {
      throw Error(Errc::invalid_input, "cannot write " + (dir / file).string());
    }
    write_trace(out, trace.frames);
    entries.push_back(
        {{"file", file}, {"label", to_string(trace.label)}, {"path", path_to_json(trace.path)}});
  }
  write_json_file(dir / "manifest.json", json{{"version", kManifestVersion},
                                              {"pad", pad_to_json(data.pad)},
                                              {"noise", noise_to_json(data.noise)},
                                              {"seed", data.seed},
                                              {"traces", entries}});
}

Dataset load_dataset(const fs::path& dir) {
  const auto manifest = read_json_file(dir / "manifest.json");
  Dataset data;
  try {
    if (manifest.at("version").get<int>() != kManifestVersion) {
      bad_input("unsupported manifest version");
    }
    data.pad = pad_from_json(manifest.at("pad"));
    data.noise = noise_from_json(manifest.at("noise"));
    data.seed = manifest.at("seed").get<std::uint64_t>();
    for (const auto& entry : manifest.at("traces")) {
      sim::LabeledTrace trace;
      trace.label = parse_gesture(entry.at("label").get<std::string>());
      trace.path = path_from_json(entry.at("path"));
      trace.path.label = trace.label;
      const auto file = dir / entry.at("file").get<std::string>();
      std::ifstream in(file);
      if (!in) {
        bad_input("missing trace file " + file.string());
      }
      trace.frames = read_trace(in);
      for (const auto& f : trace.frames) {
        if (f.currents.size() != static_cast<std::size_t>(data.pad.coil_count())) {
          bad_input(file.string() + ": frame width does not match the pad");
        }
      }
      data.traces.push_back(std::move(trace));
    }
  } catch (const json::exception& e) {
    bad_input("malformed manifest: " + std::string(e.what()));
  }
  return data;
}

json network_to_json(const bn::BayesNet& net) {
  json vars = json::array();
  for (std::size_t v = 0; v < net.size(); ++v) {
    json parents = json::array();
    for (int p : net.parents(static_cast<int>(v))) {
      parents.push_back(net.variables()[static_cast<std::size_t>(p)].name);
    }
    vars.push_back({{"name", net.variables()[v].name},
                    {"cardinality", net.variables()[v].cardinality},
                    {"parents", parents},
                    {"cpt", net.tables()[v].probs}});
  }
  return json{{"variables", vars}};
}

bn::BayesNet network_from_json(const json& j) {
  try {
    const auto& vars_j = j.at("variables");
    std::vector<bn::DiscreteVariable> vars;
    for (const auto& v : vars_j) {
      vars.push_back({v.at("name").get<std::string>(), v.at("cardinality").get<int>()});
    }
    auto find = [&](const std::string& name) {
      for (std::size_t i = 0; i < vars.size(); ++i) {
        if (vars[i].name == name) {
          return static_cast<int>(i);
        }
      }
      throw Error(Errc::invalid_structure, "unknown parent '" + name + "'");
    };
    std::vector<bn::ConditionalTable> tables;
    for (std::size_t i = 0; i < vars.size(); ++i) {
      bn::ConditionalTable t;
      t.child = static_cast<int>(i);
      for (const auto& p : vars_j[i].at("parents")) {
        t.parents.push_back(find(p.get<std::string>()));
      }
      t.probs = vars_j[i].at("cpt").get<std::vector<double>>();
      tables.push_back(std::move(t));
    }
    return bn::BayesNet(std::move(vars), std::move(tables));
  } catch (const json::exception& e) {
    bad_input(std::string("malformed network: ") + e.what());
  }
}

void write_posteriors(std::ostream& out, const tracker::Trajectory& traj) {
  for (const auto& p : traj.points) {
    out << json{{"t", p.window}, {"posterior", p.posterior}, {"map", p.zone}}.dump() << '\n';
  }
}

void write_features(std::ostream& out, const dsp::WindowFeatures& features) {
  for (std::size_t w = 0; w < features.size(); ++w) {
    const auto& e = features.eigenvalues[w];
    out << json{{"w", w},
                {"coil", e.dominant_coil},
                {"bin", e.magnitude_bin},
                {"category", e.category()},
                {"z", features.measurements[w]}}
               .dump()
        << '\n';
  }
}

json metrics_to_json(const tracker::Metrics& m) {
  json per_class = json::object();
  json confusion = json::array();
  json predictions = json::array();
  for (auto label : kAllGestures) {
    per_class[std::string(to_string(label))] = m.per_class[index_of(label)];
    confusion.push_back(m.confusion[index_of(label)]);
  }
  for (auto p : m.predictions) {
    predictions.push_back(to_string(p));
  }
  json labels = json::array();
  for (auto label : kAllGestures) {
    labels.push_back(to_string(label));
  }
  return json{{"accuracy", m.accuracy},       {"error_rate", m.error_rate},
              {"zone_accuracy", m.zone_accuracy}, {"total", m.total},
              {"labels", labels},             {"confusion", confusion},
              {"per_class", per_class},       {"predictions", predictions}};
}

void write_confusion_csv(std::ostream& out, const tracker::Metrics& m) {
  out << "truth";
  for (auto label : kAllGestures) {
    out << ',' << to_string(label);
  }
  out << '\n';
  for (auto truth : kAllGestures) {
    out << to_string(truth);
    for (auto pred : kAllGestures) {
      out << ',' << m.confusion[index_of(truth)][index_of(pred)];
    }
    out << '\n';
  }
}

tracker::AblationGrid grid_from_json(const json& j, tracker::AblationGrid grid) {
  if (!j.is_object()) {
    throw Error(Errc::invalid_parameter, "grid must be a JSON object");
  }
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "n_particles") {
        grid.n_particles = scalar_or_list<int>(value);
      } else if (key == "ess_threshold") {
        grid.ess_threshold = scalar_or_list<double>(value);
      } else if (key == "weight_floor") {
        grid.weight_floor = scalar_or_list<double>(value);
      } else if (key == "alpha") {
        grid.alpha = scalar_or_list<double>(value);
      } else if (key == "window_len") {
        grid.window_len = scalar_or_list<int>(value);
      } else if (key == "max_parents") {
        grid.max_parents = scalar_or_list<int>(value);
      } else if (key == "iterations") {
        grid.iterations = value.get<int>();
      } else if (key == "train_fraction") {
        grid.train_fraction = value.get<double>();
      } else {
        throw Error(Errc::invalid_parameter, "unknown grid key '" + key + "'");
      }
    }
  } catch (const json::exception& e) {
    throw Error(Errc::invalid_parameter, std::string("malformed grid: ") + e.what());
  }
  grid.validate();
  return grid;
}

json ablation_to_json(const tracker::AblationReport& report) {
  json points = json::array();
  for (const auto& p : report.grid) {
    points.push_back({{"n_particles", p.n_particles},
                      {"ess_threshold", p.ess_threshold},
                      {"weight_floor", p.weight_floor},
                      {"alpha", p.alpha},
                      {"window_len", p.window_len},
                      {"max_parents", p.max_parents},
                      {"accuracy", p.accuracy},
                      {"running_mean", p.running_mean},
                      {"cumulative_best", p.cumulative_best},
                      {"k2_score", p.k2_score},
                      {"final_accuracy", p.final_accuracy}});
  }
  return json{{"grid", points}};
}

void write_ablation_csv(std::ostream& out, const tracker::AblationReport& report) {
  out << "point,n_particles,ess_threshold,weight_floor,alpha,window_len,max_parents,iteration,"
         "accuracy,running_mean,cumulative_best,k2_score\n";
  for (std::size_t i = 0; i < report.grid.size(); ++i) {
    const auto& p = report.grid[i];
    for (std::size_t it = 0; it < p.accuracy.size(); ++it) {
      out << i << ',' << p.n_particles << ',' << format_double(p.ess_threshold) << ','
          << format_double(p.weight_floor) << ',' << format_double(p.alpha) << ','
          << p.window_len << ',' << p.max_parents << ',' << it << ','
          << format_double(p.accuracy[it]) << ',' << format_double(p.running_mean[it]) << ','
          << format_double(p.cumulative_best[it]) << ',' << format_double(p.k2_score[it])
          << '\n';
    }
  }
}

json distribution_to_json(const tracker::DistributionReport& r) {
  return json{{"lo", r.lo},
              {"hi", r.hi},
              {"edges", r.edges},
              {"counts", r.counts},
              {"cumulative_counts", r.cumulative_counts},
              {"frequency", r.frequency},
              {"pdf", r.pdf},
              {"cdf", r.cdf}};
}

void write_distribution_csv(std::ostream& out, const tracker::DistributionReport& r) {
  out << "bin_left,bin_right,bin_center,count,frequency,density,cdf,cumulative_count\n";
  for (std::size_t b = 0; b < r.counts.size(); ++b) {
    const double left = r.edges[b];
    const double right = r.edges[b + 1];
    out << format_double(left) << ',' << format_double(right) << ','
        << format_double(0.5 * (left + right)) << ',' << r.counts[b] << ','
        << format_double(r.frequency[b]) << ',' << format_double(r.pdf[b]) << ','
        << format_double(r.cdf[b]) << ',' << r.cumulative_counts[b] << '\n';
  }
}

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) {
    bad_input("cannot open " + path.string());
  }
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    bad_input(path.string() + " is not valid JSON: " + e.what());
  }
}

void write_json_file(const fs::path& path, const json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

void write_text_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    bad_input("cannot write " + path.string());
  }
  out << text;
}

}  // namespace coilsense::io
