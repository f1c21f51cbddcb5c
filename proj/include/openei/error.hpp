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

#include <stdexcept>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace openei {

/// Machine-readable error codes shared by every module. The string form
/// (see to_string) is what the service and CLI emit.
enum class ErrorCode {
  InvalidArgument,
  ExecutorFailure,
  EmptyWorkload,
  ReportUnavailable,
  MeterUnavailable,
  DuplicateId,
  VersionRegression,
  UnknownModel,
  Io,
  CorruptFile,
  MissingProfile,
  Infeasible,
  UnknownDevice,
  UnknownPackage,
  QueueFull,
  ArtifactMissing,
  RetrainUnsupported,
  EmptyDataset,
  ShuttingDown,
  UnknownSensor,
  NoData,
  InvalidRange,
  Unsupported,
  MalformedUri,
  UnknownAlgorithm,
  MissingArg,
  BindFailure,
  StaleVersion,
  SimulatedDrop,
  ShapeMismatch,
  EmptyStage,
  NoCapacity,
  ConfigError,
  WorkloadParse,
  FixtureParse,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        nlohmann::json detail = nlohmann::json::object())
      : std::runtime_error(message), code_(code), detail_(std::move(detail)) {}

  ErrorCode code() const noexcept { return code_; }
  const nlohmann::json& detail() const noexcept { return detail_; }

  /// {code, message, detail}
  nlohmann::json to_json() const;

 private:
  ErrorCode code_;
  nlohmann::json detail_;
};

}  // namespace openei
