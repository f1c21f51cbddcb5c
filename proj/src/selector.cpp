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

#include "openei/selector.hpp"

#include <algorithm>
#include <cmath>

#include "openei/error.hpp"

namespace openei {

std::string_view to_string(Objective objective) noexcept {
  switch (objective) {
    case Objective::Latency: return "latency";
    case Objective::Accuracy: return "accuracy";
    case Objective::Energy: return "energy";
    case Objective::Memory: return "memory";
  }
  return "?";
}

std::optional<Objective> parse_objective(std::string_view name) noexcept {
  if (name == "latency") return Objective::Latency;
  if (name == "accuracy") return Objective::Accuracy;
  if (name == "energy") return Objective::Energy;
  if (name == "memory") return Objective::Memory;
  return std::nullopt;
}

namespace {

void require_positive(const std::optional<double>& value, const char* name) {
  if (value && !(std::isfinite(*value) && *value > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, std::string(name) + " must be finite and positive");
  }
}

void require_unset_for_objective(bool is_set, Objective objective, Objective dimension,
                                 const char* name) {
  if (is_set && objective == dimension) {
    throw Error(ErrorCode::InvalidArgument,
                std::string(name) + " cannot be set when optimizing " +
                    std::string(to_string(objective)));
  }
}

// -1, 0, +1 for a < b, a == b, a > b
template <typename T>
int compare(const T& a, const T& b) {
  return a < b ? -1 : (b < a ? 1 : 0);
}

}  // namespace

void SelectionQuery::validate() const {
  require_positive(min_accuracy, "min_accuracy");
  require_positive(max_latency_ms, "max_latency");
  require_positive(max_energy_mj, "max_energy");
  if (min_accuracy && *min_accuracy > 1.0) {
    throw Error(ErrorCode::InvalidArgument, "min_accuracy must lie in (0, 1]");
  }
  if (max_memory_bytes && *max_memory_bytes == 0) {
    throw Error(ErrorCode::InvalidArgument, "max_memory must be positive");
  }
  require_unset_for_objective(min_accuracy.has_value(), objective, Objective::Accuracy,
                              "min_accuracy");
  require_unset_for_objective(max_latency_ms.has_value(), objective, Objective::Latency,
                              "max_latency");
  require_unset_for_objective(max_energy_mj.has_value(), objective, Objective::Energy,
                              "max_energy");
  require_unset_for_objective(max_memory_bytes.has_value(), objective, Objective::Memory,
                              "max_memory");
}

void to_json(nlohmann::json& j, const ViolationCounts& v) {
  j = {{"accuracy", v.accuracy}, {"latency", v.latency}, {"energy", v.energy}, {"memory", v.memory}};
}

namespace {

double energy_limit(const SelectionQuery& q, const DeviceSpec& d) {
  return q.max_energy_mj ? std::min(*q.max_energy_mj, d.energy_budget_mj) : d.energy_budget_mj;
}

std::uint64_t memory_limit(const SelectionQuery& q, const DeviceSpec& d) {
  return q.max_memory_bytes ? std::min(*q.max_memory_bytes, d.memory_budget_bytes)
                            : d.memory_budget_bytes;
}

}  // namespace

bool satisfies(const AlemProfile& p, const SelectionQuery& q, const DeviceSpec& d) {
  if (q.min_accuracy && !(p.accuracy >= *q.min_accuracy)) return false;
  if (q.max_latency_ms && !(p.latency_ms <= *q.max_latency_ms)) return false;
  if (!(p.energy_mj <= energy_limit(q, d))) return false;
  return p.memory_bytes <= memory_limit(q, d);
}

FeasibleSet feasible_set(std::span<const ModelEntry> entries, const SelectionQuery& query,
                         const DeviceSpec& device) {
  FeasibleSet out;
  const double e_limit = energy_limit(query, device);
  const std::uint64_t m_limit = memory_limit(query, device);
  for (const auto& entry : entries) {
    const AlemProfile* p = entry.profile_for(query.device_id);
    if (!p) {
      out.missing_profile.push_back(entry.model_id);
      continue;
    }
    bool ok = true;
    if (query.min_accuracy && !(p->accuracy >= *query.min_accuracy)) {
      ++out.violations.accuracy;
      ok = false;
    }
    if (query.max_latency_ms && !(p->latency_ms <= *query.max_latency_ms)) {
      ++out.violations.latency;
      ok = false;
    }
    if (!(p->energy_mj <= e_limit)) {
      ++out.violations.energy;
      ok = false;
    }
    if (!(p->memory_bytes <= m_limit)) {
      ++out.violations.memory;
      ok = false;
    }
    if (ok) out.feasible.push_back({entry, *p});
  }
  return out;
}

double objective_value(const AlemProfile& p, Objective objective) noexcept {
  switch (objective) {
    case Objective::Latency: return p.latency_ms;
    case Objective::Accuracy: return p.accuracy;
    case Objective::Energy: return p.energy_mj;
    case Objective::Memory: return static_cast<double>(p.memory_bytes);
  }
  return 0.0;
}

Objective unconstrained_objective(const SelectionQuery& q, Objective preferred) noexcept {
  auto constrained = [&](Objective o) {
    switch (o) {
      case Objective::Accuracy: return q.min_accuracy.has_value();
      case Objective::Latency: return q.max_latency_ms.has_value();
      case Objective::Energy: return q.max_energy_mj.has_value();
      case Objective::Memory: return q.max_memory_bytes.has_value();
    }
    return false;
  };
  for (Objective o : {preferred, Objective::Latency, Objective::Accuracy, Objective::Energy,
                      Objective::Memory}) {
    if (!constrained(o)) return o;
  }
  return preferred;
}

bool ranks_before(const Candidate& a, const Candidate& b, Objective objective) {
  const auto& pa = a.profile;
  const auto& pb = b.profile;
  int c = 0;
  switch (objective) {
    case Objective::Latency: c = compare(pa.latency_ms, pb.latency_ms); break;
    case Objective::Accuracy: c = compare(pb.accuracy, pa.accuracy); break;
    case Objective::Energy: c = compare(pa.energy_mj, pb.energy_mj); break;
    case Objective::Memory: c = compare(pa.memory_bytes, pb.memory_bytes); break;
  }
  if (c != 0) return c < 0;
  if (objective != Objective::Accuracy && (c = compare(pb.accuracy, pa.accuracy)) != 0) return c < 0;
  if (objective != Objective::Latency && (c = compare(pa.latency_ms, pb.latency_ms)) != 0) return c < 0;
  if (objective != Objective::Energy && (c = compare(pa.energy_mj, pb.energy_mj)) != 0) return c < 0;
  if (objective != Objective::Memory && (c = compare(pa.memory_bytes, pb.memory_bytes)) != 0) {
    return c < 0;
  }
  if ((c = compare(a.entry.model_id, b.entry.model_id)) != 0) return c < 0;
  return a.entry.package_id < b.entry.package_id;
}

std::vector<Candidate> rank(std::vector<Candidate> candidates, Objective objective) {
  std::stable_sort(candidates.begin(), candidates.end(),
                   [objective](const Candidate& a, const Candidate& b) {
                     return ranks_before(a, b, objective);
                   });
  return candidates;
}

std::size_t ExhaustiveSearch::choose(std::span<const Candidate> feasible,
                                     Objective objective) const {
  std::size_t best = 0;
  for (std::size_t i = 1; i < feasible.size(); ++i) {
    if (ranks_before(feasible[i], feasible[best], objective)) best = i;
  }
  return best;
}

void to_json(nlohmann::json& j, const SelectionResult& r) {
  j = {{"model_id", r.model_id},
       {"package_id", r.package_id},
       {"version", r.version},
       {"objective", std::string(to_string(r.objective))},
       {"objective_value", r.objective_value},
       {"feasible_count", r.feasible_count},
       {"profile", r.profile_used},
       {"missing_profile", r.missing_profile}};
}

SelectionResult select(const SelectionQuery& query, std::span<const ModelEntry> entries,
                       const DeviceSpec& device, const SelectionStrategy& strategy) {
  query.validate();
  auto set = feasible_set(entries, query, device);
  if (set.feasible.empty()) {
    nlohmann::json detail = {{"violations", set.violations},
                             {"missing_profile", set.missing_profile},
                             {"candidates", entries.size()}};
    throw Error(ErrorCode::Infeasible,
                "no model for " + std::string(to_string(query.scenario)) + "/" + query.task +
                    " satisfies the constraints on " + query.device_id,
                std::move(detail));
  }
  const auto& chosen = set.feasible[strategy.choose(set.feasible, query.objective)];
  SelectionResult result;
  result.model_id = chosen.entry.model_id;
  result.package_id = chosen.entry.package_id;
  result.version = chosen.entry.version;
  result.objective = query.objective;
  result.objective_value = objective_value(chosen.profile, query.objective);
  result.feasible_count = set.feasible.size();
  result.profile_used = chosen.profile;
  result.missing_profile = std::move(set.missing_profile);
  return result;
}

SelectionResult select(const SelectionQuery& query, const Registry& registry,
                       const DeviceCatalog& devices, const SelectionStrategy& strategy) {
  auto device = devices.find(query.device_id);
  if (device == devices.end()) {
    throw Error(ErrorCode::UnknownDevice, "unknown device '" + query.device_id + "'",
                {{"device_id", query.device_id}});
  }
  auto entries = registry.lookup(query.scenario, query.task);
  return select(query, entries, device->second, strategy);
}

}  // namespace openei
