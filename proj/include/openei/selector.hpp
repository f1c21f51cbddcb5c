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
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "openei/capability.hpp"
#include "openei/device.hpp"
#include "openei/registry.hpp"

namespace openei {

enum class Objective { Latency, Accuracy, Energy, Memory };

std::string_view to_string(Objective objective) noexcept;
std::optional<Objective> parse_objective(std::string_view name) noexcept;

using DeviceCatalog = std::map<std::string, DeviceSpec>;

/// Optimize one ALEM dimension subject to thresholds on the others.
/// Device budgets always apply; query thresholds can only tighten them.
struct SelectionQuery {
  Scenario scenario = Scenario::Safety;
  std::string task;
  Objective objective = Objective::Latency;
  std::optional<double> min_accuracy;
  std::optional<double> max_latency_ms;
  std::optional<double> max_energy_mj;
  std::optional<std::uint64_t> max_memory_bytes;
  std::string device_id;

  /// Throws InvalidArgument when the objective dimension is also
  /// constrained, or a threshold is non-finite or non-positive.
  void validate() const;
};

struct Candidate {
  ModelEntry entry;
  AlemProfile profile;
};

/// Per-constraint violation counts. A candidate violating two constraints
/// is counted under both.
struct ViolationCounts {
  std::size_t accuracy = 0;
  std::size_t latency = 0;
  std::size_t energy = 0;
  std::size_t memory = 0;

  bool operator==(const ViolationCounts&) const = default;
};

void to_json(nlohmann::json& j, const ViolationCounts& v);

struct FeasibleSet {
  std::vector<Candidate> feasible;
  /// model_ids excluded for lacking a profile on the query device.
  std::vector<std::string> missing_profile;
  ViolationCounts violations;
};

/// True when the profile meets every set threshold and the device budgets.
bool satisfies(const AlemProfile& profile, const SelectionQuery& query, const DeviceSpec& device);

FeasibleSet feasible_set(std::span<const ModelEntry> entries, const SelectionQuery& query,
                         const DeviceSpec& device);

/// Strict total order used by both select() and rank(): objective value
/// (accuracy descending, the rest ascending), then accuracy descending, then
/// latency, energy and memory ascending (the objective dimension is not
/// compared twice), then model_id and package_id.
bool ranks_before(const Candidate& a, const Candidate& b, Objective objective);

std::vector<Candidate> rank(std::vector<Candidate> candidates, Objective objective);

double objective_value(const AlemProfile& profile, Objective objective) noexcept;

/// `preferred` unless the query already constrains that dimension, in which
/// case the first unconstrained of latency, accuracy, energy, memory.
Objective unconstrained_objective(const SelectionQuery& query, Objective preferred) noexcept;

struct SelectionResult {
  std::string model_id;
  std::string package_id;
  std::uint32_t version = 0;
  Objective objective = Objective::Latency;
  double objective_value = 0.0;
  std::size_t feasible_count = 0;
  AlemProfile profile_used;
  std::vector<std::string> missing_profile;
};

void to_json(nlohmann::json& j, const SelectionResult& r);

/// Search strategy over a non-empty feasible set. Returns the index of the
/// chosen candidate.
class SelectionStrategy {
 public:
  virtual ~SelectionStrategy() = default;
  virtual std::size_t choose(std::span<const Candidate> feasible, Objective objective) const = 0;
};

/// Linear scan under ranks_before.
class ExhaustiveSearch final : public SelectionStrategy {
 public:
  std::size_t choose(std::span<const Candidate> feasible, Objective objective) const override;
};

/// Throws Infeasible (detail: violations, missing_profile, candidates) when
/// no candidate qualifies.
SelectionResult select(const SelectionQuery& query, std::span<const ModelEntry> entries,
                       const DeviceSpec& device,
                       const SelectionStrategy& strategy = ExhaustiveSearch{});

/// Looks up (scenario, task) in the registry. Throws UnknownDevice when the
/// query's device is not in the catalog.
SelectionResult select(const SelectionQuery& query, const Registry& registry,
                       const DeviceCatalog& devices,
                       const SelectionStrategy& strategy = ExhaustiveSearch{});

}  // namespace openei
