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

#ifndef COILSENSE_TESTS_FIXTURES_HPP
#define COILSENSE_TESTS_FIXTURES_HPP

#include <doctest.h>

#include <filesystem>
#include <memory>
#include <random>
#include <string>

#include "coilsense/config.hpp"
#include "coilsense/errors.hpp"
#include "coilsense/tracker.hpp"

#define CHECK_ERRC(expr, errc)                                   \
  do {                                                           \
    bool thrown_ = false;                                        \
    try {                                                        \
      (void)(expr);                                              \
    } catch (const coilsense::Error& e_) {                       \
      thrown_ = true;                                            \
      CHECK_MESSAGE(e_.code() == (errc), e_.what());             \
    }                                                            \
    CHECK_MESSAGE(thrown_, "expected coilsense::Error from " #expr); \
  } while (0)

namespace fixture {

/// Network trained on 7 x 20 default-noise traces. Built once per test binary.
inline const coilsense::bn::BayesNet& trained_net() {
  static const auto net = [] {
    const coilsense::RunConfig cfg;
    const auto data = coilsense::sim::generate_dataset(coilsense::kAllGestures, 20, cfg.pad,
                                                       cfg.noise, 7);
    return coilsense::tracker::train_network(data, cfg.pad, cfg.tracker.dsp, cfg.network);
  }();
  return net;
}

inline std::shared_ptr<const coilsense::tracker::Tracker> shared_tracker() {
  static const auto tk = std::make_shared<const coilsense::tracker::Tracker>(
      coilsense::RunConfig{}.pad, trained_net(), coilsense::RunConfig{}.tracker);
  return tk;
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("coilsense-test-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  [[nodiscard]] const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace fixture

#endif
