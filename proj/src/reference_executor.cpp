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

#include "openei/reference_executor.hpp"

#include <algorithm>
#include <chrono>
#include <stdexcept>
#include <thread>

#include "openei/error.hpp"

namespace openei {

namespace {

const char* kind_name(ReferenceModel::Kind kind) {
  switch (kind) {
    case ReferenceModel::Kind::Classifier: return "classifier";
    case ReferenceModel::Kind::Regressor: return "regressor";
    case ReferenceModel::Kind::Constant: return "constant";
    case ReferenceModel::Kind::Lookup: return "lookup";
  }
  return "?";
}

ReferenceModel::Kind parse_kind(const std::string& name) {
  if (name == "classifier") return ReferenceModel::Kind::Classifier;
  if (name == "regressor") return ReferenceModel::Kind::Regressor;
  if (name == "constant") return ReferenceModel::Kind::Constant;
  if (name == "lookup") return ReferenceModel::Kind::Lookup;
  throw Error(ErrorCode::ExecutorFailure, "unknown reference model kind '" + name + "'");
}

bool is_linear(const ReferenceModel& m) {
  return m.kind == ReferenceModel::Kind::Classifier || m.kind == ReferenceModel::Kind::Regressor;
}

std::string wrong_label(const std::string& label) { return "~" + label; }

// Target vector for one training sample.
std::vector<double> target_for(const ReferenceModel& m, const Sample& s) {
  if (m.kind == ReferenceModel::Kind::Regressor) {
    try {
      std::size_t used = 0;
      double y = std::stod(s.label, &used);
      if (used != s.label.size()) throw std::invalid_argument(s.label);
      return {y};
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidArgument, "regression label '" + s.label + "' is not a number");
    }
  }
  std::vector<double> t(m.labels.size(), 0.0);
  for (std::size_t k = 0; k < m.labels.size(); ++k) {
    if (m.labels[k] == s.label) {
      t[k] = 1.0;
      return t;
    }
  }
  throw Error(ErrorCode::InvalidArgument, "label '" + s.label + "' is not a model class");
}

std::vector<double> linear_scores(const ReferenceModel& m, const std::vector<double>& x) {
  if (x.size() != m.input_dim) {
    throw Error(ErrorCode::ExecutorFailure, "input has " + std::to_string(x.size()) +
                                                " features, model expects " +
                                                std::to_string(m.input_dim));
  }
  std::vector<double> scores(m.rows());
  for (std::size_t r = 0; r < scores.size(); ++r) {
    double acc = m.bias[r];
    for (std::size_t c = 0; c < m.input_dim; ++c) acc += m.weights[r * m.input_dim + c] * x[c];
    scores[r] = acc;
  }
  return scores;
}

void require_linear(const ReferenceModel& m) {
  if (!is_linear(m)) {
    throw Error(ErrorCode::RetrainUnsupported,
                std::string("reference ") + kind_name(m.kind) + " models have no trainable parameters");
  }
}

}  // namespace

std::size_t ReferenceModel::rows() const noexcept {
  switch (kind) {
    case Kind::Classifier: return labels.size();
    case Kind::Regressor: return 1;
    default: return 0;
  }
}

ReferenceModel ReferenceModel::linear_classifier(std::vector<std::string> labels,
                                                 std::vector<double> weights,
                                                 std::vector<double> bias) {
  ReferenceModel m;
  m.kind = Kind::Classifier;
  m.labels = std::move(labels);
  if (m.labels.empty() || bias.size() != m.labels.size() ||
      weights.size() % m.labels.size() != 0) {
    throw Error(ErrorCode::InvalidArgument, "classifier weights/bias do not match label count");
  }
  m.input_dim = weights.size() / m.labels.size();
  m.weights = std::move(weights);
  m.bias = std::move(bias);
  return m;
}

ReferenceModel ReferenceModel::linear_regressor(std::vector<double> weights, double bias) {
  ReferenceModel m;
  m.kind = Kind::Regressor;
  m.input_dim = weights.size();
  m.weights = std::move(weights);
  m.bias = {bias};
  return m;
}

ReferenceModel ReferenceModel::constant(std::string label) {
  ReferenceModel m;
  m.kind = Kind::Constant;
  m.labels = {std::move(label)};
  return m;
}

ReferenceModel ReferenceModel::lookup(const Workload& workload) {
  ReferenceModel m;
  m.kind = Kind::Lookup;
  for (const auto& s : workload.samples) m.table[fingerprint(s.input)] = s.label;
  return m;
}

ReferenceModel& ReferenceModel::mask_every(const Workload& workload, std::size_t k) {
  if (k == 0) throw Error(ErrorCode::InvalidArgument, "mask period must be positive");
  for (std::size_t i = 0; i < workload.samples.size(); ++i) {
    if (i % k == k - 1) error_mask.insert(fingerprint(workload.samples[i].input));
  }
  return *this;
}

ReferenceModel& ReferenceModel::mask(const Payload& input) {
  error_mask.insert(fingerprint(input));
  return *this;
}

ModelParams ReferenceModel::params() const {
  require_linear(*this);
  ModelParams p;
  p.shape = {rows(), input_dim + 1};
  p.values.reserve(rows() * (input_dim + 1));
  for (std::size_t r = 0; r < rows(); ++r) {
    for (std::size_t c = 0; c < input_dim; ++c) p.values.push_back(weights[r * input_dim + c]);
    p.values.push_back(bias[r]);
  }
  return p;
}

void ReferenceModel::set_params(const ModelParams& p) {
  require_linear(*this);
  if (p.shape != std::vector<std::size_t>{rows(), input_dim + 1} ||
      p.values.size() != rows() * (input_dim + 1)) {
    throw Error(ErrorCode::ShapeMismatch, "parameter shape does not match model");
  }
  for (std::size_t r = 0; r < rows(); ++r) {
    for (std::size_t c = 0; c < input_dim; ++c) {
      weights[r * input_dim + c] = p.values[r * (input_dim + 1) + c];
    }
    bias[r] = p.values[r * (input_dim + 1) + input_dim];
  }
}

Payload ReferenceModel::to_artifact() const {
  nlohmann::json table_doc = nlohmann::json::array();
  for (const auto& [fp, label] : table) table_doc.push_back({fp, label});
  nlohmann::json doc = {
      {"kind", kind_name(kind)},
      {"input_dim", input_dim},
      {"labels", labels},
      {"weights", weights},
      {"bias", bias},
      {"table", std::move(table_doc)},
      {"delay_ms", delay_ms},
      {"working_set_bytes", working_set_bytes},
      {"error_mask", error_mask},
  };
  return doc.dump();
}

ReferenceModel ReferenceModel::from_artifact(const Payload& artifact) {
  ReferenceModel m;
  try {
    auto doc = nlohmann::json::parse(artifact);
    m.kind = parse_kind(doc.at("kind").get<std::string>());
    doc.at("input_dim").get_to(m.input_dim);
    doc.at("labels").get_to(m.labels);
    doc.at("weights").get_to(m.weights);
    doc.at("bias").get_to(m.bias);
    for (const auto& row : doc.at("table")) {
      m.table[row.at(0).get<std::uint64_t>()] = row.at(1).get<std::string>();
    }
    doc.at("delay_ms").get_to(m.delay_ms);
    doc.at("working_set_bytes").get_to(m.working_set_bytes);
    doc.at("error_mask").get_to(m.error_mask);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ExecutorFailure, std::string("undecodable reference artifact: ") + e.what());
  }
  if (is_linear(m) &&
      (m.rows() == 0 || m.weights.size() != m.rows() * m.input_dim || m.bias.size() != m.rows())) {
    throw Error(ErrorCode::ExecutorFailure, "reference artifact has inconsistent parameter sizes");
  }
  if (m.kind == Kind::Constant && m.labels.size() != 1) {
    throw Error(ErrorCode::ExecutorFailure, "constant reference artifact needs exactly one label");
  }
  return m;
}

InferenceOutput ReferenceModel::evaluate(const Payload& input) const {
  InferenceOutput out;
  switch (kind) {
    case Kind::Classifier: {
      out.scores = linear_scores(*this, decode_features(input));
      std::size_t best = 0;
      for (std::size_t k = 1; k < out.scores.size(); ++k) {
        if (out.scores[k] > out.scores[best]) best = k;
      }
      if (error_mask.contains(fingerprint(input))) {
        out.label = labels.size() > 1 ? labels[(best + 1) % labels.size()] : wrong_label(labels[best]);
      } else {
        out.label = labels[best];
      }
      return out;
    }
    case Kind::Regressor:
      out.scores = linear_scores(*this, decode_features(input));
      return out;
    case Kind::Constant:
      out.label = labels.front();
      break;
    case Kind::Lookup:
      if (auto it = table.find(fingerprint(input)); it != table.end()) out.label = it->second;
      break;
  }
  if (error_mask.contains(fingerprint(input))) out.label = wrong_label(out.label);
  return out;
}

double training_loss(const ReferenceModel& model, const Workload& dataset) {
  require_linear(model);
  if (dataset.samples.empty()) throw Error(ErrorCode::EmptyDataset, "training set is empty");
  double total = 0.0;
  for (const auto& s : dataset.samples) {
    auto scores = linear_scores(model, decode_features(s.input));
    auto target = target_for(model, s);
    for (std::size_t r = 0; r < scores.size(); ++r) {
      double e = scores[r] - target[r];
      total += 0.5 * e * e;
    }
  }
  return total / static_cast<double>(dataset.samples.size());
}

void gradient_step(ReferenceModel& model, const Workload& dataset, double learning_rate) {
  require_linear(model);
  if (dataset.samples.empty()) throw Error(ErrorCode::EmptyDataset, "training set is empty");
  const std::size_t rows = model.rows();
  const std::size_t dim = model.input_dim;
  std::vector<double> grad_w(rows * dim, 0.0);
  std::vector<double> grad_b(rows, 0.0);
  for (const auto& s : dataset.samples) {
    auto x = decode_features(s.input);
    auto scores = linear_scores(model, x);
    auto target = target_for(model, s);
    for (std::size_t r = 0; r < rows; ++r) {
      double e = scores[r] - target[r];
      for (std::size_t c = 0; c < dim; ++c) grad_w[r * dim + c] += e * x[c];
      grad_b[r] += e;
    }
  }
  const double scale = learning_rate / static_cast<double>(dataset.samples.size());
  for (std::size_t i = 0; i < grad_w.size(); ++i) model.weights[i] -= scale * grad_w[i];
  for (std::size_t r = 0; r < rows; ++r) model.bias[r] -= scale * grad_b[r];
}

ReferenceExecutor::ReferenceExecutor(std::string package_id) : package_id_(std::move(package_id)) {}

void ReferenceExecutor::load(const std::string& model_id, const Payload& artifact) {
  auto model = ReferenceModel::from_artifact(artifact);
  std::lock_guard lock(mutex_);
  models_[model_id] = std::move(model);
}

bool ReferenceExecutor::loaded(const std::string& model_id) const {
  std::lock_guard lock(mutex_);
  return models_.contains(model_id);
}

InferenceOutput ReferenceExecutor::infer(const std::string& model_id, const Payload& input) {
  double delay_ms = 0.0;
  {
    std::lock_guard lock(mutex_);
    auto it = models_.find(model_id);
    if (it == models_.end()) {
      throw Error(ErrorCode::ExecutorFailure, "model '" + model_id + "' is not loaded");
    }
    delay_ms = it->second.delay_ms;
  }
  if (delay_ms > 0.0) {
    std::this_thread::sleep_for(std::chrono::duration<double, std::milli>(delay_ms));
  }
  std::lock_guard lock(mutex_);
  auto it = models_.find(model_id);
  if (it == models_.end()) {
    throw Error(ErrorCode::ExecutorFailure, "model '" + model_id + "' was unloaded mid-call");
  }
  const auto& model = it->second;
  auto out = model.evaluate(input);
  // A declared working set covers the scratch buffers; otherwise the
  // footprint is just the input and output buffers.
  std::uint64_t footprint = model.working_set_bytes > 0
                                ? model.working_set_bytes
                                : input.size() + out.scores.size() * sizeof(double) + out.label.size();
  peak_bytes_ = std::max(peak_bytes_, footprint);
  return out;
}

RetrainOutcome ReferenceExecutor::retrain(const Payload& artifact, const Workload& dataset,
                                          const RetrainConfig& config) {
  config.validate();
  if (dataset.samples.empty()) throw Error(ErrorCode::EmptyDataset, "training set is empty");
  auto model = ReferenceModel::from_artifact(artifact);
  require_linear(model);
  RetrainOutcome outcome;
  outcome.loss_curve.push_back(training_loss(model, dataset));
  for (std::uint32_t pass = 0; pass < config.passes; ++pass) {
    gradient_step(model, dataset, config.learning_rate);
    outcome.loss_curve.push_back(training_loss(model, dataset));
  }
  outcome.artifact = model.to_artifact();
  return outcome;
}

void ReferenceExecutor::reset_resource_report() {
  std::lock_guard lock(mutex_);
  peak_bytes_ = 0;
}

std::uint64_t ReferenceExecutor::resource_report() const {
  std::lock_guard lock(mutex_);
  return peak_bytes_;
}

}  // namespace openei
