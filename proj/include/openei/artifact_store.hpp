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
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>

#include "openei/executor.hpp"

namespace openei {

/// Model bytes keyed by artifact_ref. Directory-backed when constructed with
/// a path, in-memory otherwise.
class ArtifactStore {
 public:
  ArtifactStore() = default;
  explicit ArtifactStore(std::filesystem::path dir);

  void put(const std::string& ref, const Payload& bytes);
  std::optional<Payload> get(const std::string& ref) const;
  bool contains(const std::string& ref) const;
  std::optional<std::uint64_t> size_of(const std::string& ref) const;
  bool remove(const std::string& ref);

 private:
  std::filesystem::path file_for(const std::string& ref) const;

  std::optional<std::filesystem::path> dir_;
  mutable std::mutex mutex_;
  std::map<std::string, Payload> memory_;
};

}  // namespace openei
