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

#include "openei/capability.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "openei/error.hpp"

namespace openei {

void DeviceSpec::validate() const {
  if (device_id.empty()) throw Error(ErrorCode::InvalidArgument, "device_id is empty");
  if (memory_budget_bytes == 0 || !(energy_budget_mj > 0.0) || !(compute_capacity > 0.0) ||
      !(power_w >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument,
                "device " + device_id + ": budgets and compute capacity must be positive");
  }
}

void to_json(nlohmann::json& j, const DeviceSpec& d) {
  j = {{"device_id", d.device_id},
       {"memory_budget_bytes", d.memory_budget_bytes},
       {"energy_budget_mj", d.energy_budget_mj},
       {"power_w", d.power_w},
       {"compute_capacity", d.compute_capacity}};
}

void from_json(const nlohmann::json& j, DeviceSpec& d) {
  j.at("device_id").get_to(d.device_id);
  j.at("memory_budget_bytes").get_to(d.memory_budget_bytes);
  j.at("energy_budget_mj").get_to(d.energy_budget_mj);
  j.at("power_w").get_to(d.power_w);
  d.compute_capacity = j.value("compute_capacity", 1.0);
}

void AlemProfile::validate() const {
  if (!(accuracy >= 0.0 && accuracy <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "accuracy must lie in [0, 1]");
  }
  if (!(latency_ms >= 0.0) || !(energy_mj >= 0.0) || !std::isfinite(latency_ms) ||
      !std::isfinite(energy_mj)) {
    throw Error(ErrorCode::InvalidArgument, "latency and energy must be finite and non-negative");
  }
}

void to_json(nlohmann::json& j, const AlemProfile& p) {
  j = {{"accuracy", p.accuracy},
       {"latency_ms", p.latency_ms},
       {"energy_mj", p.energy_mj},
       {"memory_bytes", p.memory_bytes}};
}

void from_json(const nlohmann::json& j, AlemProfile& p) {
  j.at("accuracy").get_to(p.accuracy);
  j.at("latency_ms").get_to(p.latency_ms);
  j.at("energy_mj").get_to(p.energy_mj);
  j.at("memory_bytes").get_to(p.memory_bytes);
}

void MeasurementConfig::validate() const {
  if (measured_runs < 1) throw Error(ErrorCode::InvalidArgument, "measured_runs must be >= 1");
}

void to_json(nlohmann::json& j, const ProfileRecord& r) {
  j = {{"model_id", r.model_id},
       {"device_id", r.device_id},
       {"package_id", r.package_id},
       {"accuracy", r.profile.accuracy},
       {"latency_ms", r.profile.latency_ms},
       {"energy_mj", r.profile.energy_mj},
       {"memory_bytes", r.profile.memory_bytes},
       {"workload_id", r.workload_id},
       {"measured_at", r.measured_at_ms}};
}

void from_json(const nlohmann::json& j, ProfileRecord& r) {
  j.at("model_id").get_to(r.model_id);
  j.at("device_id").get_to(r.device_id);
  j.at("package_id").get_to(r.package_id);
  from_json(j, r.profile);
  j.at("workload_id").get_to(r.workload_id);
  j.at("measured_at").get_to(r.measured_at_ms);
}

void append_profile_record(const std::string& path, const ProfileRecord& record) {
  std::ofstream out(path, std::ios::app);
  if (!out) throw Error(ErrorCode::Io, "cannot append to " + path, {{"path", path}});
  out << nlohmann::json(record).dump() << '\n';
  if (!out.flush()) throw Error(ErrorCode::Io, "write failed for " + path, {{"path", path}});
}

void save_profile_records(const std::string& path, const std::vector<ProfileRecord>& records) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + tmp, {{"path", tmp}});
    for (const auto& r : records) out << nlohmann::json(r).dump() << '\n';
    if (!out.flush()) throw Error(ErrorCode::Io, "write failed for " + tmp, {{"path", tmp}});
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot replace " + path + ": " + ec.message(), {{"path", path}});
}

std::vector<ProfileRecord> load_profile_records(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path, {{"path", path}});
  std::vector<ProfileRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      auto rec = nlohmann::json::parse(line).get<ProfileRecord>();
      rec.profile.validate();
      records.push_back(std::move(rec));
    } catch (const std::exception& e) {
      throw Error(ErrorCode::CorruptFile,
                  path + ":" + std::to_string(line_no) + ": " + e.what(),
                  {{"path", path}, {"line", line_no}});
    }
  }
  return records;
}

bool exact_label_match(const InferenceOutput& output, const Sample& sample) {
  return output.label == sample.label;
}

namespace {

using Clock = std::chrono::steady_clock;

InferenceOutput checked_infer(Executor& executor, const std::string& model_id,
                              const Payload& input) {
  try {
    return executor.infer(model_id, input);
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(ErrorCode::ExecutorFailure, std::string("executor failed: ") + e.what(),
                {{"model_id", model_id}});
  }
}

void require_samples(const Workload& workload) {
  if (workload.samples.empty()) {
    throw Error(ErrorCode::EmptyWorkload, "workload '" + workload.id + "' has no samples");
  }
}

// Runs warmups and then the measured calls, returning each measured
// call's wall time in milliseconds.
std::vector<double> timed_runs(Executor& executor, const std::string& model_id,
                               const Workload& workload, const MeasurementConfig& config) {
  require_samples(workload);
  config.validate();
  const auto& samples = workload.samples;
  std::size_t next = 0;
  for (std::size_t i = 0; i < config.warmup_runs; ++i) {
    checked_infer(executor, model_id, samples[next++ % samples.size()].input);
  }
  std::vector<double> latencies;
  latencies.reserve(config.measured_runs);
  for (std::size_t i = 0; i < config.measured_runs; ++i) {
    const auto& input = samples[next++ % samples.size()].input;
    auto start = Clock::now();
    checked_infer(executor, model_id, input);
    auto stop = Clock::now();
    latencies.push_back(std::chrono::duration<double, std::milli>(stop - start).count());
  }
  return latencies;
}

double mean(const std::vector<double>& values) {
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

double energy_from(EnergyMeter& meter, const std::vector<double>& latencies) {
  meter.begin();
  for (double l : latencies) meter.record_call(l);
  auto reading = meter.end();
  return std::max(0.0, reading.total_mj - reading.idle_mj) / static_cast<double>(latencies.size());
}

void require_meter(const EnergyMeter& meter) {
  if (!meter.available()) throw Error(ErrorCode::MeterUnavailable, "energy meter unavailable");
}

}  // namespace

double measure_latency(Executor& executor, const std::string& model_id, const Workload& workload,
                       const MeasurementConfig& config) {
  return mean(timed_runs(executor, model_id, workload, config));
}

std::uint64_t measure_memory(Executor& executor, const std::string& model_id,
                             const Workload& workload) {
  if (!executor.reports_resources()) {
    throw Error(ErrorCode::ReportUnavailable,
                "package " + executor.package_id() + " does not report resource usage");
  }
  require_samples(workload);
  executor.reset_resource_report();
  for (const auto& s : workload.samples) checked_infer(executor, model_id, s.input);
  return executor.resource_report();
}

double measure_energy(EnergyMeter& meter, Executor& executor, const std::string& model_id,
                      const Workload& workload, const MeasurementConfig& config) {
  require_meter(meter);
  // Meters with real counters bracket the calls themselves; the cost model
  // only needs the per-call latencies.
  return energy_from(meter, timed_runs(executor, model_id, workload, config));
}

double measure_accuracy(Executor& executor, const std::string& model_id, const Workload& workload,
                        const MatchRule& match) {
  require_samples(workload);
  std::size_t correct = 0;
  for (const auto& s : workload.samples) {
    if (match(checked_infer(executor, model_id, s.input), s)) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(workload.samples.size());
}

ProfileRecord profile_model(Executor& executor, const std::string& model_id,
                            const Workload& workload, const MeasurementConfig& config,
                            const DeviceSpec& device, EnergyMeter* meter,
                            const MatchRule& match) {
  config.validate();
  require_samples(workload);
  CostModelMeter cost_model(device.power_w);
  EnergyMeter& energy_meter = meter ? *meter : cost_model;
  require_meter(energy_meter);
  if (!executor.reports_resources()) {
    throw Error(ErrorCode::ReportUnavailable,
                "package " + executor.package_id() + " does not report resource usage");
  }

  // One accuracy pass doubles as the memory pass.
  executor.reset_resource_report();
  std::size_t correct = 0;
  for (const auto& s : workload.samples) {
    if (match(checked_infer(executor, model_id, s.input), s)) ++correct;
  }
  const std::uint64_t memory = executor.resource_report();

  auto latencies = timed_runs(executor, model_id, workload, config);

  ProfileRecord record;
  record.model_id = model_id;
  record.device_id = device.device_id;
  record.package_id = executor.package_id();
  record.workload_id = config.workload_id.empty() ? workload.id : config.workload_id;
  record.profile.accuracy =
      static_cast<double>(correct) / static_cast<double>(workload.samples.size());
  record.profile.latency_ms = mean(latencies);
  record.profile.energy_mj = energy_from(energy_meter, latencies);
  record.profile.memory_bytes = memory;
  record.measured_at_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                              std::chrono::system_clock::now().time_since_epoch())
                              .count();
  return record;
}

}  // namespace openei
