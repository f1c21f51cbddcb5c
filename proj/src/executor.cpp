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

#include "openei/executor.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>

#include "openei/error.hpp"

namespace openei {

static_assert(std::endian::native == std::endian::little,
              "feature packing assumes a little-endian host");

Payload encode_features(std::span<const double> values) {
  Payload out(values.size() * sizeof(double), '\0');
  if (!values.empty()) std::memcpy(out.data(), values.data(), out.size());
  return out;
}

std::vector<double> decode_features(std::string_view bytes) {
  if (bytes.size() % sizeof(double) != 0) {
    throw Error(ErrorCode::ExecutorFailure,
                "input is not a packed float64 array (" + std::to_string(bytes.size()) +
                    " bytes)");
  }
  std::vector<double> values(bytes.size() / sizeof(double));
  if (!values.empty()) std::memcpy(values.data(), bytes.data(), bytes.size());
  return values;
}

std::uint64_t fingerprint(std::string_view bytes) noexcept {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

void to_json(nlohmann::json& j, const InferenceOutput& out) {
  j = {{"label", out.label}, {"scores", out.scores}};
}

void from_json(const nlohmann::json& j, InferenceOutput& out) {
  j.at("label").get_to(out.label);
  j.at("scores").get_to(out.scores);
}

std::size_t Workload::payload_size() const noexcept {
  std::size_t size = 0;
  for (const auto& s : samples) size = std::max(size, s.input.size());
  return size;
}

Workload workload_from_json(const nlohmann::json& doc) {
  Workload w;
  try {
    w.id = doc.at("id").get<std::string>();
    for (const auto& s : doc.at("samples")) {
      auto features = s.at("input").get<std::vector<double>>();
      auto label = s.at("label").get<std::string>();
      w.samples.push_back({encode_features(features), std::move(label)});
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::WorkloadParse, std::string("malformed workload: ") + e.what());
  }
  if (w.samples.empty()) throw Error(ErrorCode::WorkloadParse, "workload has no samples");
  return w;
}

nlohmann::json workload_to_json(const Workload& workload) {
  nlohmann::json samples = nlohmann::json::array();
  for (const auto& s : workload.samples) {
    samples.push_back({{"input", decode_features(s.input)}, {"label", s.label}});
  }
  return {{"id", workload.id}, {"samples", std::move(samples)}};
}

Workload load_workload(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::WorkloadParse, "cannot open workload " + path, {{"path", path}});
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::WorkloadParse, "workload " + path + ": " + e.what(), {{"path", path}});
  }
  return workload_from_json(doc);
}

void RetrainConfig::validate() const {
  if (passes < 1) throw Error(ErrorCode::InvalidArgument, "retrain passes must be >= 1");
  if (!(learning_rate > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "retrain learning_rate must be positive");
  }
}

RetrainOutcome Executor::retrain(const Payload&, const Workload&, const RetrainConfig&) {
  throw Error(ErrorCode::RetrainUnsupported, "package " + package_id() + " cannot retrain");
}

std::uint64_t Executor::resource_report() const {
  throw Error(ErrorCode::ReportUnavailable,
              "package " + package_id() + " does not report resource usage");
}

}  // namespace openei
