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

#include <cstdint>
#include <map>
#include <mutex>
#include <set>
#include <string>
#include <vector>

#include "openei/executor.hpp"

namespace openei {

/// Deterministic test-double model understood by ReferenceExecutor.
///
/// Linear models compute scores = W x + b over decoded float64 features.
/// Classifiers emit labels[argmax(scores)], regressors emit scores[0] with an
/// empty label. Constant models ignore their input and Lookup models return a
/// memorized label per input fingerprint. Every kind honors a programmed
/// per-call delay, a declared working set and an error mask of input
/// fingerprints on which the label is deliberately wrong.
struct ReferenceModel {
  enum class Kind { Classifier, Regressor, Constant, Lookup };

  Kind kind = Kind::Classifier;
  std::size_t input_dim = 0;
  std::vector<std::string> labels;
  std::vector<double> weights;  // row-major, rows() x input_dim
  std::vector<double> bias;     // rows()
  std::map<std::uint64_t, std::string> table;  // Lookup only
  double delay_ms = 0.0;
  std::uint64_t working_set_bytes = 0;
  std::set<std::uint64_t> error_mask;

  std::size_t rows() const noexcept;

  static ReferenceModel linear_classifier(std::vector<std::string> labels,
                                          std::vector<double> weights,
                                          std::vector<double> bias);
  static ReferenceModel linear_regressor(std::vector<double> weights, double bias);
  static ReferenceModel constant(std::string label);
  /// Memorizes every (input, label) pair of the workload.
  static ReferenceModel lookup(const Workload& workload);

  /// Marks every k-th sample (index % k == k - 1) of the workload as an error.
  ReferenceModel& mask_every(const Workload& workload, std::size_t k);
  ReferenceModel& mask(const Payload& input);

  /// [W | b] as a rows() x (input_dim + 1) tensor. Linear kinds only.
  ModelParams params() const;
  void set_params(const ModelParams& params);

  Payload to_artifact() const;
  /// Throws ExecutorFailure on undecodable bytes.
  static ReferenceModel from_artifact(const Payload& artifact);

  InferenceOutput evaluate(const Payload& input) const;
};

/// Training loss of a linear model on a dataset: mean over samples of
/// 0.5 * ||W x + b - t||^2 where t is the one-hot (classifier) or numeric
/// (regressor) target.
double training_loss(const ReferenceModel& model, const Workload& dataset);

/// One full-batch gradient step on training_loss. The step is stable for
/// learning rates below 2 / lambda_max(mean of [x;1][x;1]^T).
void gradient_step(ReferenceModel& model, const Workload& dataset, double learning_rate);

class ReferenceExecutor final : public Executor {
 public:
  explicit ReferenceExecutor(std::string package_id = "reference");

  std::string package_id() const override { return package_id_; }

  void load(const std::string& model_id, const Payload& artifact) override;
  bool loaded(const std::string& model_id) const override;
  InferenceOutput infer(const std::string& model_id, const Payload& input) override;

  bool supports_retrain() const override { return true; }
  RetrainOutcome retrain(const Payload& artifact, const Workload& dataset,
                         const RetrainConfig& config) override;

  bool reports_resources() const override { return true; }
  void reset_resource_report() override;
  std::uint64_t resource_report() const override;

 private:
  std::string package_id_;
  mutable std::mutex mutex_;
  std::map<std::string, ReferenceModel> models_;
  std::uint64_t peak_bytes_ = 0;
};

}  // namespace openei
