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
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace openei {

/// Opaque input/artifact bytes.
using Payload = std::string;

/// Packs feature values as little-endian float64.
Payload encode_features(std::span<const double> values);

/// Inverse of encode_features. Throws ExecutorFailure when the byte count is
/// not a multiple of eight.
std::vector<double> decode_features(std::string_view bytes);

/// Stable 64-bit FNV-1a fingerprint of a byte string.
std::uint64_t fingerprint(std::string_view bytes) noexcept;

struct InferenceOutput {
  std::string label;
  std::vector<double> scores;

  bool operator==(const InferenceOutput&) const = default;
};

void to_json(nlohmann::json& j, const InferenceOutput& out);
void from_json(const nlohmann::json& j, InferenceOutput& out);

struct Sample {
  Payload input;
  std::string label;
};

/// A labeled evaluation (or training) set.
struct Workload {
  std::string id;
  std::vector<Sample> samples;

  /// Largest per-sample payload in bytes.
  std::size_t payload_size() const noexcept;
};

/// Reads a workload document:
///   {"id": "...", "samples": [{"input": [1.0, 2.0], "label": "cat"}, ...]}
/// Throws WorkloadParse on a missing or malformed file, or an empty/unlabeled
/// sample list.
Workload load_workload(const std::string& path);
Workload workload_from_json(const nlohmann::json& doc);
nlohmann::json workload_to_json(const Workload& workload);

struct RetrainConfig {
  std::uint32_t passes = 1;
  double learning_rate = 0.01;
  /// Recorded for merge weighting; zero means "use the dataset size".
  std::uint64_t sample_count = 0;

  /// Throws InvalidArgument unless passes >= 1 and learning_rate > 0.
  void validate() const;
};

struct RetrainOutcome {
  Payload artifact;
  /// Training loss before the first pass, then after every pass.
  std::vector<double> loss_curve;
};

/// Flat parameter tensor used for merging retrained models.
struct ModelParams {
  std::vector<std::size_t> shape;
  std::vector<double> values;

  bool operator==(const ModelParams&) const = default;
};

/// Contract every inference package implements. Implementations need not be
/// reentrant; callers serialize access per instance.
class Executor {
 public:
  virtual ~Executor() = default;

  virtual std::string package_id() const = 0;

  virtual void load(const std::string& model_id, const Payload& artifact) = 0;
  virtual bool loaded(const std::string& model_id) const = 0;
  virtual InferenceOutput infer(const std::string& model_id, const Payload& input) = 0;

  virtual bool supports_retrain() const { return false; }
  /// Default throws RetrainUnsupported.
  virtual RetrainOutcome retrain(const Payload& artifact, const Workload& dataset,
                                 const RetrainConfig& config);

  // Resource-report contract: peak bytes allocated by infer() calls since
  // the last reset.
  virtual bool reports_resources() const { return false; }
  virtual void reset_resource_report() {}
  /// Default throws ReportUnavailable.
  virtual std::uint64_t resource_report() const;
};

}  // namespace openei
