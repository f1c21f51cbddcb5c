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

#include "openei/artifact_store.hpp"

#include <fstream>
#include <sstream>

#include "fs_util.hpp"
#include "openei/error.hpp"

namespace openei {

namespace fs = std::filesystem;


ArtifactStore::ArtifactStore(fs::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  fs::create_directories(*dir_, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create artifact dir " + dir_->string() + ": " + ec.message());
}

fs::path ArtifactStore::file_for(const std::string& ref) const {
  return *dir_ / (detail::escape_filename(ref) + ".bin");
}

void ArtifactStore::put(const std::string& ref, const Payload& bytes) {
  if (ref.empty()) throw Error(ErrorCode::InvalidArgument, "artifact_ref is empty");
  std::lock_guard lock(mutex_);
  if (!dir_) {
    memory_[ref] = bytes;
    return;
  }
  auto path = file_for(ref);
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out.flush()) throw Error(ErrorCode::Io, "cannot write " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot replace " + path.string() + ": " + ec.message());
}

std::optional<Payload> ArtifactStore::get(const std::string& ref) const {
  std::lock_guard lock(mutex_);
  if (!dir_) {
    auto it = memory_.find(ref);
    if (it == memory_.end()) return std::nullopt;
    return it->second;
  }
  std::ifstream in(file_for(ref), std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream buf;
  buf << in.rdbuf();
  return std::move(buf).str();
}

bool ArtifactStore::contains(const std::string& ref) const {
  std::lock_guard lock(mutex_);
  if (!dir_) return memory_.contains(ref);
  return fs::exists(file_for(ref));
}

std::optional<std::uint64_t> ArtifactStore::size_of(const std::string& ref) const {
  std::lock_guard lock(mutex_);
  if (!dir_) {
    auto it = memory_.find(ref);
    if (it == memory_.end()) return std::nullopt;
    return it->second.size();
  }
  std::error_code ec;
  auto size = fs::file_size(file_for(ref), ec);
  if (ec) return std::nullopt;
  return size;
}

bool ArtifactStore::remove(const std::string& ref) {
  std::lock_guard lock(mutex_);
  if (!dir_) return memory_.erase(ref) > 0;
  std::error_code ec;
  return fs::remove(file_for(ref), ec);
}

}  // namespace openei
