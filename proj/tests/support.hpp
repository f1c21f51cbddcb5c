// Copyright 2026 The OpenEI Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "openei/capability.hpp"
#include "openei/device.hpp"
#include "openei/executor.hpp"
#include "openei/reference_executor.hpp"
#include "openei/registry.hpp"

namespace testing {

class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    auto base = std::filesystem::temp_directory_path();
    do {
      path_ = base / ("openei-test-" + std::to_string(rd()));
    } while (std::filesystem::exists(path_));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

inline openei::DeviceSpec device(std::string id, std::uint64_t memory = 1ull << 30,
                                 double energy = 500.0, double power = 5.0) {
  openei::DeviceSpec d;
  d.device_id = std::move(id);
  d.memory_budget_bytes = memory;
  d.energy_budget_mj = energy;
  d.power_w = power;
  return d;
}

inline openei::AlemProfile alem(double a, double l, double e, std::uint64_t m) {
  return {a, l, e, m};
}

inline openei::ModelEntry entry(std::string id, openei::Scenario scenario = openei::Scenario::Safety,
                                std::string task = "detection") {
  openei::ModelEntry e;
  e.model_id = id;
  e.scenario = scenario;
  e.task = std::move(task);
  e.package_id = "reference";
  e.version = 1;
  e.artifact_ref = std::move(id) + "@v1";
  return e;
}

inline openei::ModelEntry profiled(std::string id, const openei::AlemProfile& p,
                                   const std::string& device_id = "edge-0") {
  auto e = entry(std::move(id));
  e.profiles[device_id] = p;
  return e;
}

inline openei::Workload workload(const std::vector<std::pair<std::vector<double>, std::string>>& rows,
                                 std::string id = "w") {
  openei::Workload w;
  w.id = std::move(id);
  for (const auto& [x, label] : rows) w.samples.push_back({openei::encode_features(x), label});
  return w;
}

// Two-feature detector: "person" when x0 > x1.
inline openei::ReferenceModel detector() {
  return openei::ReferenceModel::linear_classifier({"clear", "person"}, {-1, 1, 1, -1}, {0, 0});
}

inline openei::Workload detector_workload(std::size_t n, unsigned seed = 11) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::pair<std::vector<double>, std::string>> rows;
  while (rows.size() < n) {
    double a = u(rng), b = u(rng);
    if (std::abs(a - b) < 1e-3) continue;
    rows.push_back({{a, b}, a > b ? "person" : "clear"});
  }
  return workload(rows, "detector-eval");
}

}  // namespace testing
