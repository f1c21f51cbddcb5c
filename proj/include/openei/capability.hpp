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

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "openei/device.hpp"
#include "openei/executor.hpp"

namespace openei {

/// Accuracy (fraction), latency (ms, mean), energy (mJ per inference) and
/// peak memory footprint (bytes) of one model on one device.
struct AlemProfile {
  double accuracy = 0.0;
  double latency_ms = 0.0;
  double energy_mj = 0.0;
  std::uint64_t memory_bytes = 0;

  /// Range checks for a stored profile: accuracy in [0,1], latency and
  /// energy non-negative.
  void validate() const;

  bool operator==(const AlemProfile&) const = default;
};

void to_json(nlohmann::json& j, const AlemProfile& p);
void from_json(const nlohmann::json& j, AlemProfile& p);

struct MeasurementConfig {
  std::size_t warmup_runs = 5;
  std::size_t measured_runs = 50;
  std::string workload_id;

  void validate() const;
};

/// One line of a `.alem.jsonl` profile file.
struct ProfileRecord {
  std::string model_id;
  std::string device_id;
  std::string package_id;
  AlemProfile profile;
  std::string workload_id;
  std::int64_t measured_at_ms = 0;  // unix epoch

  bool operator==(const ProfileRecord&) const = default;
};

void to_json(nlohmann::json& j, const ProfileRecord& r);
void from_json(const nlohmann::json& j, ProfileRecord& r);

void append_profile_record(const std::string& path, const ProfileRecord& record);
void save_profile_records(const std::string& path, const std::vector<ProfileRecord>& records);
/// Throws Io if unreadable, CorruptFile (detail.line) on a bad line.
std::vector<ProfileRecord> load_profile_records(const std::string& path);

struct EnergyReading {
  double total_mj = 0.0;
  double idle_mj = 0.0;
};

/// Pluggable energy source. A measurement window is opened with begin(),
/// every timed inference is reported through record_call(), and end()
/// returns the window's total and idle-baseline energy.
class EnergyMeter {
 public:
  virtual ~EnergyMeter() = default;
  virtual bool available() const { return true; }
  virtual void begin() = 0;
  virtual void record_call(double latency_ms) = 0;
  virtual EnergyReading end() = 0;
};

/// energy = power x latency, with no idle draw attributed to the model.
class CostModelMeter final : public EnergyMeter {
 public:
  explicit CostModelMeter(double power_w) : power_w_(power_w) {}

  void begin() override { total_mj_ = 0.0; }
  void record_call(double latency_ms) override { total_mj_ += power_w_ * latency_ms; }
  EnergyReading end() override { return {total_mj_, 0.0}; }

 private:
  double power_w_;
  double total_mj_ = 0.0;
};

/// W x ms = mJ.
constexpr double cost_model_energy_mj(double power_w, double latency_ms) noexcept {
  return power_w * latency_ms;
}

/// Decides whether an output counts as correct for a sample.
using MatchRule = std::function<bool(const InferenceOutput&, const Sample&)>;
bool exact_label_match(const InferenceOutput& output, const Sample& sample);

/// Mean wall time of executor.infer() over config.measured_runs calls after
/// config.warmup_runs discarded calls. Samples are used round-robin.
double measure_latency(Executor& executor, const std::string& model_id, const Workload& workload,
                       const MeasurementConfig& config);

/// Peak executor-reported footprint over one full workload pass.
std::uint64_t measure_memory(Executor& executor, const std::string& model_id,
                             const Workload& workload);

/// Per-inference energy: (total - idle) / measured_runs.
double measure_energy(EnergyMeter& meter, Executor& executor, const std::string& model_id,
                      const Workload& workload, const MeasurementConfig& config);

double measure_accuracy(Executor& executor, const std::string& model_id, const Workload& workload,
                        const MatchRule& match = exact_label_match);

/// Takes all four measurements in one session. Energy defaults to the
/// cost-model meter at the device's power rating and is computed from the
/// same timed calls as latency. Any failing measurement aborts the whole
/// profile.
ProfileRecord profile_model(Executor& executor, const std::string& model_id,
                            const Workload& workload, const MeasurementConfig& config,
                            const DeviceSpec& device, EnergyMeter* meter = nullptr,
                            const MatchRule& match = exact_label_match);

}  // namespace openei
