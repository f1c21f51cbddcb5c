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

#include "openei/error.hpp"

namespace openei {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ExecutorFailure: return "ExecutorFailure";
    case ErrorCode::EmptyWorkload: return "EmptyWorkload";
    case ErrorCode::ReportUnavailable: return "ReportUnavailable";
    case ErrorCode::MeterUnavailable: return "MeterUnavailable";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::VersionRegression: return "VersionRegression";
    case ErrorCode::UnknownModel: return "UnknownModel";
    case ErrorCode::Io: return "Io";
    case ErrorCode::CorruptFile: return "CorruptFile";
    case ErrorCode::MissingProfile: return "MissingProfile";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::UnknownDevice: return "UnknownDevice";
    case ErrorCode::UnknownPackage: return "UnknownPackage";
    case ErrorCode::QueueFull: return "QueueFull";
    case ErrorCode::ArtifactMissing: return "ArtifactMissing";
    case ErrorCode::RetrainUnsupported: return "RetrainUnsupported";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::ShuttingDown: return "ShuttingDown";
    case ErrorCode::UnknownSensor: return "UnknownSensor";
    case ErrorCode::NoData: return "NoData";
    case ErrorCode::InvalidRange: return "InvalidRange";
    case ErrorCode::Unsupported: return "Unsupported";
    case ErrorCode::MalformedUri: return "MalformedUri";
    case ErrorCode::UnknownAlgorithm: return "UnknownAlgorithm";
    case ErrorCode::MissingArg: return "MissingArg";
    case ErrorCode::BindFailure: return "BindFailure";
    case ErrorCode::StaleVersion: return "StaleVersion";
    case ErrorCode::SimulatedDrop: return "SimulatedDrop";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::EmptyStage: return "EmptyStage";
    case ErrorCode::NoCapacity: return "NoCapacity";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::WorkloadParse: return "WorkloadParse";
    case ErrorCode::FixtureParse: return "FixtureParse";
  }
  return "Unknown";
}

nlohmann::json Error::to_json() const {
  return {{"code", std::string(to_string(code_))},
          {"message", what()},
          {"detail", detail_}};
}

}  // namespace openei
