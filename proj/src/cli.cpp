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

#include "coilsense/cli.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "coilsense/config.hpp"
#include "coilsense/errors.hpp"
#include "coilsense/io.hpp"
#include "coilsense/live_server.hpp"
#include "coilsense/tracker.hpp"

namespace coilsense::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "JSON run configuration")->check(CLI::ExistingFile);
  cmd->add_option("--seed", c.seed, "Seed (overrides COILSENSE_SEED and the config)");
  cmd->add_option("--set", c.overrides, "Override a config value, e.g. pf.n_particles=500")
      ->take_all();
}

/// `section.key=value`, value parsed as JSON when possible and as a string otherwise.
json override_doc(const std::string& text) {
  const auto eq = text.find('=');
  const auto dot = text.find('.');
  if (eq == std::string::npos) {
    throw Error(Errc::invalid_parameter, "--set expects key=value, got '" + text + "'");
  }
  const auto value_text = text.substr(eq + 1);
  json value = json::parse(value_text, nullptr, false);
  if (value.is_discarded()) {
    value = value_text;
  }
  if (dot == std::string::npos || dot > eq) {
    return json{{text.substr(0, eq), value}};
  }
  return json{{text.substr(0, dot), {{text.substr(dot + 1, eq - dot - 1), value}}}};
}

RunConfig resolve(const Common& c) {
  RunConfig cfg = c.config.empty() ? RunConfig{} : load_config(c.config);
  for (const auto& o : c.overrides) {
    cfg = from_json(override_doc(o), cfg);
  }
  cfg.seed = resolve_seed(c.seed, cfg.seed);
  cfg.validate();
  return cfg;
}

/// The dataset's own pad and noise replace the configured ones.
io::Dataset load_data(const std::string& dir, RunConfig& cfg) {
  auto data = io::load_dataset(dir);
  require(!data.traces.empty(), Errc::invalid_input, "dataset has no traces");
  cfg.pad = data.pad;
  cfg.noise = data.noise;
  cfg.validate();
  return data;
}

std::vector<sim::SensorFrame> load_trace(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(Errc::invalid_input, "cannot open trace " + path);
  }
  return io::read_trace(in);
}

template <class Fn>
void write_stream(const std::string& path, Fn&& fn) {
  std::ostringstream buf;
  fn(buf);
  io::write_text_file(path, buf.str());
}

std::vector<sim::LabeledTrace> default_dataset(const RunConfig& cfg) {
  return sim::generate_dataset(kAllGestures, 50, cfg.pad, cfg.noise, cfg.seed);
}

bn::BayesNet train_on_split(std::span<const sim::LabeledTrace> traces, const RunConfig& cfg,
                            tracker::Split& split) {
  split = tracker::split_dataset(traces, cfg.train_fraction, cfg.seed);
  const auto train = tracker::select(traces, split.train);
  return tracker::train_network(train, cfg.pad, cfg.tracker.dsp, cfg.network);
}

int cmd_simulate(const RunConfig& cfg, const std::string& gestures, int per_class,
                 const std::string& out_dir, std::ostream& out) {
  std::vector<GestureLabel> labels;
  if (gestures == "all") {
    labels.assign(kAllGestures.begin(), kAllGestures.end());
  } else {
    std::stringstream ss(gestures);
    std::string name;
    while (std::getline(ss, name, ',')) {
      labels.push_back(parse_gesture(name));
    }
  }
  io::Dataset data{cfg.pad, cfg.noise, cfg.seed,
                   sim::generate_dataset(labels, per_class, cfg.pad, cfg.noise, cfg.seed)};
  io::save_dataset(out_dir, data);
  out << json{{"traces", data.traces.size()}, {"out", out_dir}}.dump() << '\n';
  return 0;
}

}  // namespace

int run_command(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Gesture tracking on simulated multi-coil charging pads", "coilsense"};
  app.require_subcommand(1);
  app.fallthrough(false);

  Common c;
  std::string data_dir;
  std::string out_path;
  std::string net_path;
  std::string trace_path;
  std::string json_path;
  std::string gestures = "all";
  int per_class = 50;
  int index = -1;
  bool all_traces = false;

  auto* simulate = app.add_subcommand("simulate", "Synthesize a labeled dataset");
  add_common(simulate, c);
  simulate->add_option("--gestures", gestures, "'all' or a comma-separated list");
  simulate->add_option("--per-class", per_class, "Traces per gesture")->check(CLI::PositiveNumber);
  simulate->add_option("--out", out_path, "Output directory")->required();

  auto* filter = app.add_subcommand("filter", "Preprocess a trace into window features");
  add_common(filter, c);
  auto* filter_src = filter->add_option_group("source");
  filter_src->add_option("--trace", trace_path, "Trace JSONL file");
  filter_src->add_option("--data", data_dir, "Dataset directory (with --index)");
  filter_src->require_option(1);
  filter->add_option("--index", index, "Trace index within --data");
  filter->add_option("--out", out_path, "Features JSONL")->required();

  auto* train = app.add_subcommand("train", "Learn the transition network from a dataset");
  add_common(train, c);
  train->add_option("--data", data_dir, "Dataset directory")->required();
  train->add_option("--out", out_path, "Network JSON")->required();

  auto* track = app.add_subcommand("track", "Track one trace and classify it");
  add_common(track, c);
  auto* track_src = track->add_option_group("source");
  track_src->add_option("--trace", trace_path, "Trace JSONL file");
  track_src->add_option("--data", data_dir, "Dataset directory (with --index)");
  track_src->require_option(1);
  track->add_option("--index", index, "Trace index within --data");
  track->add_option("--net", net_path, "Network JSON")->required();
  track->add_option("--out", out_path, "Posterior JSONL")->required();

  auto* eval = app.add_subcommand("eval", "Score gesture accuracy on the held-out split");
  add_common(eval, c);
  eval->add_option("--data", data_dir, "Dataset directory")->required();
  eval->add_option("--report", out_path, "Metrics JSON")->required();
  eval->add_option("--net", net_path, "Network JSON (trained on the split when omitted)");
  eval->add_option("--confusion", json_path, "Confusion matrix CSV");
  eval->add_flag("--all", all_traces, "Score every trace instead of the test split");

  std::string grid_path;
  std::optional<int> iterations;
  auto* ablate = app.add_subcommand("ablate", "Sweep filter and network parameters");
  add_common(ablate, c);
  ablate->add_option("--grid", grid_path, "Grid JSON")->required()->check(CLI::ExistingFile);
  ablate->add_option("--out", out_path, "Accuracy curves CSV")->required();
  ablate->add_option("--json", json_path, "Full report JSON");
  ablate->add_option("--data", data_dir, "Dataset directory (default: 7 x 50 synthetic)");
  ablate->add_option("--iterations", iterations, "Re-splits per grid point")
      ->check(CLI::PositiveNumber);

  std::string values_path;
  int bins = 20;
  auto* report = app.add_subcommand("report", "Histogram, pdf and cdf of a set of values");
  add_common(report, c);
  auto* report_src = report->add_option_group("source");
  report_src->add_option("--values", values_path, "Numbers, whitespace/comma separated or JSON");
  report_src->add_option("--data", data_dir, "Dataset: per-window per-coil responses (mean positive filtered current)");
  report_src->require_option(1);
  report->add_option("--bins", bins, "Histogram bins")->check(CLI::PositiveNumber);
  report->add_option("--out", out_path, "Distribution CSV")->required();
  report->add_option("--json", json_path, "Distribution JSON");

  live::ServerOptions server_opts;
  std::string static_dir;
  auto* serve = app.add_subcommand("serve", "Run the live playground server");
  add_common(serve, c);
  serve->add_option("--host", server_opts.host, "Bind address");
  serve->add_option("--port", server_opts.port, "Port (0 picks a free one)");
  serve->add_option("--static", static_dir, "UI bundle directory");
  serve->add_option("--net", net_path, "Network JSON (trained on synthetic data when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    auto cfg = resolve(c);
    if (*simulate) {
      return cmd_simulate(cfg, gestures, per_class, out_path, out);
    }
    if (*filter || *track) {
      std::vector<sim::SensorFrame> frames;
      if (!trace_path.empty()) {
        frames = load_trace(trace_path);
      } else {
        auto data = load_data(data_dir, cfg);
        require(index >= 0 && static_cast<std::size_t>(index) < data.traces.size(),
                Errc::invalid_parameter, "--index is out of range for --data");
        frames = std::move(data.traces[static_cast<std::size_t>(index)].frames);
      }
      if (*filter) {
        const auto features = dsp::preprocess(std::move(frames), cfg.tracker.dsp,
                                              cfg.pad.sample_rate);
        write_stream(out_path, [&](std::ostream& s) { io::write_features(s, features); });
        out << json{{"windows", features.size()}, {"out", out_path}}.dump() << '\n';
        return 0;
      }
      const auto net = io::network_from_json(io::read_json_file(net_path));
      const tracker::Tracker tk(cfg.pad, net, cfg.tracker);
      const auto traj = tk.track(std::move(frames), cfg.seed);
      const auto cls = tk.classify(traj);
      write_stream(out_path, [&](std::ostream& s) { io::write_posteriors(s, traj); });
      out << json{{"label", to_string(cls.label)},
                  {"confidence", cls.confidence},
                  {"windows", traj.points.size()}}
                 .dump()
          << '\n';
      return 0;
    }
    if (*train) {
      const auto data = load_data(data_dir, cfg);
      tracker::Split split;
      const auto net = train_on_split(data.traces, cfg, split);
      io::write_json_file(out_path, io::network_to_json(net));
      json parents = json::object();
      for (std::size_t v = 0; v < net.size(); ++v) {
        json names = json::array();
        for (int p : net.parents(static_cast<int>(v))) {
          names.push_back(net.variables()[static_cast<std::size_t>(p)].name);
        }
        parents[net.variables()[v].name] = names;
      }
      out << json{{"train_traces", split.train.size()}, {"structure", parents}, {"out", out_path}}
                 .dump()
          << '\n';
      return 0;
    }
    if (*eval) {
      const auto data = load_data(data_dir, cfg);
      tracker::Split split = tracker::split_dataset(data.traces, cfg.train_fraction, cfg.seed);
      std::optional<bn::BayesNet> net;
      if (!net_path.empty()) {
        net = io::network_from_json(io::read_json_file(net_path));
      } else {
        net = train_on_split(data.traces, cfg, split);
      }
      const auto scored = all_traces ? data.traces : tracker::select(data.traces, split.test);
      const auto m = tracker::evaluate(scored, *net, cfg.pad, cfg.tracker, cfg.seed);
      auto doc = io::metrics_to_json(m);
      doc["seed"] = cfg.seed;
      doc["split"] = all_traces ? "all" : "test";
      io::write_json_file(out_path, doc);
      if (!json_path.empty()) {
        write_stream(json_path, [&](std::ostream& s) { io::write_confusion_csv(s, m); });
      }
      out << json{{"accuracy", m.accuracy}, {"zone_accuracy", m.zone_accuracy}, {"total", m.total}}
                 .dump()
          << '\n';
      return 0;
    }
    if (*ablate) {
      tracker::AblationGrid base;
      base.n_particles = {cfg.tracker.pf.n_particles};
      base.ess_threshold = {cfg.tracker.pf.ess_threshold};
      base.weight_floor = {cfg.tracker.pf.weight_floor};
      base.alpha = {cfg.network.alpha};
      base.window_len = {cfg.tracker.dsp.window_len};
      base.max_parents = {cfg.network.max_parents};
      base.train_fraction = cfg.train_fraction;
      auto grid = io::grid_from_json(io::read_json_file(grid_path), base);
      if (iterations) {
        grid.iterations = *iterations;
      }
      std::vector<sim::LabeledTrace> traces;
      if (!data_dir.empty()) {
        traces = load_data(data_dir, cfg).traces;
      } else {
        traces = default_dataset(cfg);
      }
      const auto rep =
          tracker::ablate(traces, cfg.pad, cfg.tracker, grid, cfg.seed);
      write_stream(out_path, [&](std::ostream& s) { io::write_ablation_csv(s, rep); });
      if (!json_path.empty()) {
        io::write_json_file(json_path, io::ablation_to_json(rep));
      }
      json finals = json::array();
      for (const auto& p : rep.grid) {
        finals.push_back(p.final_accuracy);
      }
      out << json{{"points", rep.grid.size()}, {"final_accuracy", finals}}.dump() << '\n';
      return 0;
    }
    if (*report) {
      std::vector<double> values;
      if (!values_path.empty()) {
        std::ifstream in(values_path);
        if (!in) {
          throw Error(Errc::invalid_input, "cannot open " + values_path);
        }
        std::stringstream text;
        text << in.rdbuf();
        const auto doc = json::parse(text.str(), nullptr, false);
        if (!doc.is_discarded() && doc.is_array()) {
          values = doc.get<std::vector<double>>();
        } else {
          std::string s = text.str();
          std::replace(s.begin(), s.end(), ',', ' ');
          std::istringstream nums(s);
          std::string tok;
          while (nums >> tok) {
            try {
              std::size_t used = 0;
              values.push_back(std::stod(tok, &used));
              require(used == tok.size(), Errc::invalid_input, "non-numeric value");
            } catch (const std::logic_error&) {
              throw Error(Errc::invalid_input, "non-numeric value '" + tok + "'");
            }
          }
        }
      } else {
        const auto data = load_data(data_dir, cfg);
        for (const auto& t : data.traces) {
          const auto f = dsp::preprocess(t.frames, cfg.tracker.dsp, cfg.pad.sample_rate);
          for (const auto& z : f.measurements) {
            values.insert(values.end(), z.begin(), z.end());
          }
        }
      }
      const auto dist = tracker::distribution_report(values, bins);
      write_stream(out_path, [&](std::ostream& s) { io::write_distribution_csv(s, dist); });
      if (!json_path.empty()) {
        io::write_json_file(json_path, io::distribution_to_json(dist));
      }
      out << json{{"values", values.size()}, {"bins", bins}, {"out", out_path}}.dump() << '\n';
      return 0;
    }
    if (*serve) {
      std::optional<bn::BayesNet> net;
      if (!net_path.empty()) {
        net = io::network_from_json(io::read_json_file(net_path));
      } else {
        const auto traces = default_dataset(cfg);
        tracker::Split split;
        net = train_on_split(traces, cfg, split);
      }
      auto tk = std::make_shared<const tracker::Tracker>(cfg.pad, *net, cfg.tracker);
      server_opts.static_dir = static_dir;
      live::LiveServer server(cfg, tk, server_opts);
      const auto port = server.start();
      out << "listening on http://" << server_opts.host << ':' << port << std::endl;
      server.wait();
      return 0;
    }
  } catch (const Error& e) {
    err << "coilsense: " << to_string(e.code()) << ": " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "coilsense: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace coilsense::cli
