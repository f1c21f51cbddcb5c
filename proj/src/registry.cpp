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

#include "openei/registry.hpp"

#include <filesystem>
#include <fstream>
#include <mutex>

#include "openei/error.hpp"

namespace openei {

std::string_view to_string(Scenario scenario) noexcept {
  switch (scenario) {
    case Scenario::Vehicles: return "vehicles";
    case Scenario::Safety: return "safety";
    case Scenario::Home: return "home";
    case Scenario::Health: return "health";
  }
  return "?";
}

std::optional<Scenario> parse_scenario(std::string_view name) noexcept {
  if (name == "vehicles") return Scenario::Vehicles;
  if (name == "safety") return Scenario::Safety;
  if (name == "home") return Scenario::Home;
  if (name == "health") return Scenario::Health;
  return std::nullopt;
}

const AlemProfile* ModelEntry::profile_for(const std::string& device_id) const {
  auto it = profiles.find(device_id);
  return it == profiles.end() ? nullptr : &it->second;
}

void to_json(nlohmann::json& j, const ModelEntry& e) {
  nlohmann::json profiles = nlohmann::json::object();
  for (const auto& [device, profile] : e.profiles) profiles[device] = profile;
  j = {{"model_id", e.model_id},
       {"scenario", std::string(to_string(e.scenario))},
       {"task", e.task},
       {"package_id", e.package_id},
       {"version", e.version},
       {"artifact_ref", e.artifact_ref},
       {"declared_memory_bytes", nullptr},
       {"profiles", std::move(profiles)}};
  if (e.declared_memory_bytes) j["declared_memory_bytes"] = *e.declared_memory_bytes;
}

void from_json(const nlohmann::json& j, ModelEntry& e) {
  j.at("model_id").get_to(e.model_id);
  auto scenario = j.at("scenario").get<std::string>();
  auto parsed = parse_scenario(scenario);
  if (!parsed) throw Error(ErrorCode::InvalidArgument, "unknown scenario '" + scenario + "'");
  e.scenario = *parsed;
  j.at("task").get_to(e.task);
  j.at("package_id").get_to(e.package_id);
  j.at("version").get_to(e.version);
  j.at("artifact_ref").get_to(e.artifact_ref);
  const auto& mem = j.at("declared_memory_bytes");
  if (mem.is_null()) {
    e.declared_memory_bytes.reset();
  } else {
    e.declared_memory_bytes = mem.get<std::uint64_t>();
  }
  e.profiles.clear();
  for (const auto& [device, profile] : j.at("profiles").items()) {
    e.profiles[device] = profile.get<AlemProfile>();
  }
}

Registry::Registry(const Registry& other) {
  std::shared_lock lock(other.mutex_);
  models_ = other.models_;
  path_ = other.path_;
}

Registry& Registry::operator=(const Registry& other) {
  if (this == &other) return *this;
  std::scoped_lock lock(mutex_, other.mutex_);
  models_ = other.models_;
  path_ = other.path_;
  return *this;
}

Registry Registry::open(const std::string& path) {
  Registry registry;
  if (std::filesystem::exists(path)) registry = load(path);
  registry.path_ = path;
  return registry;
}

Registry Registry::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path, {{"path", path}});
  Registry registry;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      auto entry = nlohmann::json::parse(line).get<ModelEntry>();
      registry.validate(entry);
      auto& versions = registry.models_[entry.model_id];
      if (versions.contains(entry.version)) {
        throw Error(ErrorCode::DuplicateId, "duplicate " + entry.model_id + " v" +
                                                std::to_string(entry.version));
      }
      versions.emplace(entry.version, std::move(entry));
    } catch (const std::exception& e) {
      throw Error(ErrorCode::CorruptFile, path + ":" + std::to_string(line_no) + ": " + e.what(),
                  {{"path", path}, {"line", line_no}});
    }
  }
  return registry;
}

void Registry::save(const std::string& path) const {
  std::shared_lock lock(mutex_);
  write_file(path);
}

void Registry::bind(const std::string& path) {
  std::unique_lock lock(mutex_);
  path_ = path;
  persist_locked();
}

std::optional<std::string> Registry::bound_path() const {
  std::shared_lock lock(mutex_);
  return path_;
}

void Registry::persist_locked() const {
  if (path_) write_file(*path_);
}

void Registry::write_file(const std::string& path) const {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + tmp, {{"path", tmp}});
    for (const auto& [id, versions] : models_) {
      for (const auto& [version, entry] : versions) out << nlohmann::json(entry).dump() << '\n';
    }
    if (!out.flush()) throw Error(ErrorCode::Io, "write failed for " + tmp, {{"path", tmp}});
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot replace " + path + ": " + ec.message(), {{"path", path}});
}

void Registry::validate(const ModelEntry& entry) const {
  if (entry.model_id.empty()) throw Error(ErrorCode::InvalidArgument, "model_id is empty");
  if (entry.version < 1) throw Error(ErrorCode::InvalidArgument, "version must be >= 1");
  if (!parse_scenario(to_string(entry.scenario))) {
    throw Error(ErrorCode::InvalidArgument, "scenario outside the supported set");
  }
  for (const auto& [device, profile] : entry.profiles) profile.validate();
}

std::string Registry::register_model(ModelEntry entry) {
  validate(entry);
  std::unique_lock lock(mutex_);
  auto it = models_.find(entry.model_id);
  if (it != models_.end() && !it->second.empty()) {
    auto latest = it->second.rbegin()->first;
    if (entry.version == latest || it->second.contains(entry.version)) {
      throw Error(ErrorCode::DuplicateId,
                  entry.model_id + " v" + std::to_string(entry.version) + " already registered",
                  {{"model_id", entry.model_id}, {"version", entry.version}});
    }
    if (entry.version < latest) {
      throw Error(ErrorCode::VersionRegression,
                  entry.model_id + " v" + std::to_string(entry.version) + " is older than v" +
                      std::to_string(latest),
                  {{"model_id", entry.model_id}, {"version", entry.version}, {"latest", latest}});
    }
  }
  auto id = entry.model_id;
  auto previous = models_;
  models_[id].emplace(entry.version, std::move(entry));
  try {
    persist_locked();
  } catch (...) {
    models_ = std::move(previous);
    throw;
  }
  return id;
}

void Registry::upsert(ModelEntry entry) {
  validate(entry);
  std::unique_lock lock(mutex_);
  auto& versions = models_[entry.model_id];
  if (!versions.empty() && entry.version < versions.rbegin()->first) {
    throw Error(ErrorCode::VersionRegression,
                entry.model_id + " v" + std::to_string(entry.version) + " is older than v" +
                    std::to_string(versions.rbegin()->first));
  }
  auto version = entry.version;
  versions.insert_or_assign(version, std::move(entry));
  persist_locked();
}

std::vector<ModelEntry> Registry::lookup(Scenario scenario, const std::string& task) const {
  std::shared_lock lock(mutex_);
  std::vector<ModelEntry> out;
  for (const auto& [id, versions] : models_) {
    if (versions.empty()) continue;
    const auto& latest = versions.rbegin()->second;
    if (latest.scenario == scenario && latest.task == task) out.push_back(latest);
  }
  return out;
}

std::optional<ModelEntry> Registry::get(const std::string& model_id) const {
  std::shared_lock lock(mutex_);
  auto it = models_.find(model_id);
  if (it == models_.end() || it->second.empty()) return std::nullopt;
  return it->second.rbegin()->second;
}

std::optional<ModelEntry> Registry::get(const std::string& model_id, std::uint32_t version) const {
  std::shared_lock lock(mutex_);
  auto it = models_.find(model_id);
  if (it == models_.end()) return std::nullopt;
  auto v = it->second.find(version);
  if (v == it->second.end()) return std::nullopt;
  return v->second;
}

std::vector<ModelEntry> Registry::entries() const {
  std::shared_lock lock(mutex_);
  std::vector<ModelEntry> out;
  for (const auto& [id, versions] : models_) {
    if (!versions.empty()) out.push_back(versions.rbegin()->second);
  }
  return out;
}

std::vector<ModelEntry> Registry::history() const {
  std::shared_lock lock(mutex_);
  std::vector<ModelEntry> out;
  for (const auto& [id, versions] : models_) {
    for (const auto& [v, entry] : versions) out.push_back(entry);
  }
  return out;
}

std::size_t Registry::size() const {
  std::shared_lock lock(mutex_);
  return models_.size();
}

void Registry::attach_profile(const std::string& model_id, const std::string& device_id,
                              const AlemProfile& profile) {
  profile.validate();
  std::unique_lock lock(mutex_);
  auto it = models_.find(model_id);
  if (it == models_.end() || it->second.empty()) {
    throw Error(ErrorCode::UnknownModel, "unknown model '" + model_id + "'",
                {{"model_id", model_id}});
  }
  auto& profiles = it->second.rbegin()->second.profiles;
  std::optional<AlemProfile> before;
  if (auto p = profiles.find(device_id); p != profiles.end()) before = p->second;
  profiles[device_id] = profile;
  try {
    persist_locked();
  } catch (...) {
    if (before) {
      profiles[device_id] = *before;
    } else {
      profiles.erase(device_id);
    }
    throw;
  }
}

}  // namespace openei
