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
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "openei/registry.hpp"

namespace openei {

enum class ResourceKind { Algorithms, Data };
enum class DataType { Realtime, Historical };

std::string_view to_string(ResourceKind kind) noexcept;  // "ei_algorithms" / "ei_data"
std::string_view to_string(DataType type) noexcept;      // "realtime" / "historical"

/// Parsed libei resource locator.
///
///   uri       = [ "http://" authority | authority ] path [ "?" args ]
///   authority = host [ ":" port ]
///   path      = "/" kind "/" field3 "/" field4 [ "/" args ]
///   kind      = "ei_algorithms" | "ei_data"
///   field3    = scenario (vehicles|safety|home|health) for ei_algorithms,
///               data type (realtime|historical) for ei_data
///   field4    = algorithm name or sensor id (non-empty)
///   args      = key "=" value *( "&" key "=" value )
///
/// Arguments written as a trailing path segment are equivalent to query
/// arguments and come first. The canonical form always uses the query
/// spelling and percent-encodes every byte outside
/// [A-Za-z0-9-._~!$'()*+,;:@] with uppercase hex.
struct ResourceUri {
  std::optional<std::string> host;
  std::optional<std::uint16_t> port;
  ResourceKind kind = ResourceKind::Data;
  std::string field3;
  std::string field4;
  std::vector<std::pair<std::string, std::string>> args;

  /// First value for `key`.
  std::optional<std::string> arg(std::string_view key) const;

  Scenario scenario() const;   // Algorithms only
  DataType data_type() const;  // Data only

  bool operator==(const ResourceUri&) const = default;
};

/// Throws MalformedUri with detail.field naming the offending field
/// (scheme, host, port, path, resource_kind, scenario, data_type,
/// algorithm, sensor_id, args).
ResourceUri parse_uri(std::string_view text);

std::string format_uri(const ResourceUri& uri);

/// Percent-encodes per the canonical rule above.
std::string uri_encode(std::string_view raw);

}  // namespace openei
