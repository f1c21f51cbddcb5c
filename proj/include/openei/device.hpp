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
#include <string>

#include <nlohmann/json.hpp>

namespace openei {

/// What an edge provides to the models running on it.
struct DeviceSpec {
  std::string device_id;
  std::uint64_t memory_budget_bytes = 0;
  double energy_budget_mj = 0.0;  // per inference
  double power_w = 0.0;
  double compute_capacity = 1.0;  // relative units

  /// Throws InvalidArgument unless every budget and the capacity are positive.
  void validate() const;

  bool operator==(const DeviceSpec&) const = default;
};

void to_json(nlohmann::json& j, const DeviceSpec& d);
void from_json(const nlohmann::json& j, DeviceSpec& d);

}  // namespace openei
