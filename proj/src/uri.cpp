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

#include "openei/uri.hpp"

#include <cctype>

#include "openei/error.hpp"

namespace openei {

std::string_view to_string(ResourceKind kind) noexcept {
  return kind == ResourceKind::Algorithms ? "ei_algorithms" : "ei_data";
}

std::string_view to_string(DataType type) noexcept {
  return type == DataType::Realtime ? "realtime" : "historical";
}

std::optional<std::string> ResourceUri::arg(std::string_view key) const {
  for (const auto& [k, v] : args) {
    if (k == key) return v;
  }
  return std::nullopt;
}

Scenario ResourceUri::scenario() const {
  auto s = parse_scenario(field3);
  if (kind != ResourceKind::Algorithms || !s) {
    throw Error(ErrorCode::InvalidArgument, "uri does not name an algorithm scenario");
  }
  return *s;
}

DataType ResourceUri::data_type() const {
  if (kind != ResourceKind::Data) {
    throw Error(ErrorCode::InvalidArgument, "uri does not name a data resource");
  }
  return field3 == "realtime" ? DataType::Realtime : DataType::Historical;
}

namespace {

[[noreturn]] void malformed(std::string_view field, const std::string& why) {
  throw Error(ErrorCode::MalformedUri, "malformed uri: " + why, {{"field", std::string(field)}});
}

bool is_unreserved(unsigned char c) {
  return std::isalnum(c) || c == '-' || c == '.' || c == '_' || c == '~';
}

bool is_safe(unsigned char c) {
  switch (c) {
    case '!': case '$': case '\'': case '(': case ')': case '*':
    case '+': case ',': case ';': case ':': case '@':
      return true;
    default:
      return is_unreserved(c);
  }
}

int hex_digit(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  return -1;
}

// Decodes one segment/key/value. Raw bytes must be in the safe set.
std::string decode(std::string_view raw, std::string_view field) {
  std::string out;
  out.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    unsigned char c = static_cast<unsigned char>(raw[i]);
    if (c == '%') {
      if (i + 2 >= raw.size()) malformed(field, "truncated percent escape");
      int hi = hex_digit(raw[i + 1]);
      int lo = hex_digit(raw[i + 2]);
      if (hi < 0 || lo < 0) malformed(field, "invalid percent escape");
      out.push_back(static_cast<char>(hi * 16 + lo));
      i += 2;
    } else if (is_safe(c)) {
      out.push_back(static_cast<char>(c));
    } else {
      malformed(field, "illegal character in " + std::string(field));
    }
  }
  return out;
}

void parse_args(std::string_view raw, std::vector<std::pair<std::string, std::string>>& out) {
  if (raw.empty()) malformed("args", "empty argument list");
  std::size_t pos = 0;
  while (true) {
    auto amp = raw.find('&', pos);
    auto pair = raw.substr(pos, amp == std::string_view::npos ? std::string_view::npos : amp - pos);
    auto eq = pair.find('=');
    if (eq == std::string_view::npos) malformed("args", "argument without '='");
    auto key = decode(pair.substr(0, eq), "args");
    if (key.empty()) malformed("args", "argument with empty key");
    out.emplace_back(std::move(key), decode(pair.substr(eq + 1), "args"));
    if (amp == std::string_view::npos) break;
    pos = amp + 1;
  }
}

void parse_authority(std::string_view authority, ResourceUri& uri) {
  if (authority.empty()) malformed("host", "empty host");
  std::string_view host = authority;
  std::optional<std::string_view> port;
  if (authority.front() == '[') {
    auto close = authority.find(']');
    if (close == std::string_view::npos) malformed("host", "unterminated IPv6 literal");
    host = authority.substr(0, close + 1);
    auto rest = authority.substr(close + 1);
    if (!rest.empty()) {
      if (rest.front() != ':') malformed("host", "garbage after IPv6 literal");
      port = rest.substr(1);
    }
    for (char c : host.substr(1, host.size() - 2)) {
      if (!(std::isxdigit(static_cast<unsigned char>(c)) || c == ':' || c == '.')) {
        malformed("host", "invalid IPv6 literal");
      }
    }
    if (host.size() <= 2) malformed("host", "empty IPv6 literal");
  } else {
    auto colon = authority.find(':');
    if (colon != std::string_view::npos) {
      host = authority.substr(0, colon);
      port = authority.substr(colon + 1);
    }
    if (host.empty()) malformed("host", "empty host");
    for (char c : host) {
      if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-')) {
        malformed("host", "invalid host character");
      }
    }
  }
  uri.host = std::string(host);
  if (port) {
    if (port->empty() || port->size() > 5) malformed("port", "invalid port");
    unsigned value = 0;
    for (char c : *port) {
      if (!std::isdigit(static_cast<unsigned char>(c))) malformed("port", "port is not numeric");
      value = value * 10 + static_cast<unsigned>(c - '0');
    }
    if (value == 0 || value > 65535) malformed("port", "port out of range");
    uri.port = static_cast<std::uint16_t>(value);
  }
}

}  // namespace

ResourceUri parse_uri(std::string_view text) {
  ResourceUri uri;
  if (text.find('#') != std::string_view::npos) malformed("path", "fragments are not supported");

  std::string_view rest = text;
  constexpr std::string_view kScheme = "http://";
  bool has_scheme = false;
  if (rest.substr(0, kScheme.size()) == kScheme) {
    has_scheme = true;
    rest.remove_prefix(kScheme.size());
  } else if (auto sep = rest.find("://"); sep != std::string_view::npos &&
                                          sep < rest.find('/')) {
    malformed("scheme", "only http is supported");
  }
  if (has_scheme || (!rest.empty() && rest.front() != '/')) {
    auto slash = rest.find('/');
    if (slash == std::string_view::npos) malformed("path", "missing resource path");
    parse_authority(rest.substr(0, slash), uri);
    rest.remove_prefix(slash);
  }
  if (rest.empty() || rest.front() != '/') malformed("path", "path must start with '/'");

  std::string_view query;
  bool has_query = false;
  if (auto q = rest.find('?'); q != std::string_view::npos) {
    query = rest.substr(q + 1);
    rest = rest.substr(0, q);
    has_query = true;
  }

  std::vector<std::string_view> segments;
  rest.remove_prefix(1);
  while (true) {
    auto slash = rest.find('/');
    segments.push_back(rest.substr(0, slash));
    if (slash == std::string_view::npos) break;
    rest.remove_prefix(slash + 1);
  }
  if (segments.size() < 3 || segments.size() > 4) {
    malformed("path", "expected four fields, got " + std::to_string(segments.size() + 1));
  }

  auto kind = decode(segments[0], "resource_kind");
  if (kind == "ei_algorithms") {
    uri.kind = ResourceKind::Algorithms;
  } else if (kind == "ei_data") {
    uri.kind = ResourceKind::Data;
  } else {
    malformed("resource_kind", "unknown resource kind '" + kind + "'");
  }

  const char* field3_name = uri.kind == ResourceKind::Algorithms ? "scenario" : "data_type";
  uri.field3 = decode(segments[1], field3_name);
  if (uri.kind == ResourceKind::Algorithms) {
    if (!parse_scenario(uri.field3)) malformed("scenario", "unknown scenario '" + uri.field3 + "'");
  } else if (uri.field3 != "realtime" && uri.field3 != "historical") {
    malformed("data_type", "unknown data type '" + uri.field3 + "'");
  }

  const char* field4_name = uri.kind == ResourceKind::Algorithms ? "algorithm" : "sensor_id";
  uri.field4 = decode(segments[2], field4_name);
  if (uri.field4.empty()) malformed(field4_name, std::string("empty ") + field4_name);

  if (segments.size() == 4) parse_args(segments[3], uri.args);
  if (has_query) parse_args(query, uri.args);
  return uri;
}

std::string uri_encode(std::string_view raw) {
  static const char* hex = "0123456789ABCDEF";
  std::string out;
  out.reserve(raw.size());
  for (unsigned char c : raw) {
    if (is_safe(c)) {
      out.push_back(static_cast<char>(c));
    } else {
      out.push_back('%');
      out.push_back(hex[c >> 4]);
      out.push_back(hex[c & 0xF]);
    }
  }
  return out;
}

std::string format_uri(const ResourceUri& uri) {
  std::string out;
  if (uri.host) {
    out += "http://" + *uri.host;
    if (uri.port) out += ":" + std::to_string(*uri.port);
  }
  out += "/";
  out += to_string(uri.kind);
  out += "/" + uri_encode(uri.field3) + "/" + uri_encode(uri.field4);
  for (std::size_t i = 0; i < uri.args.size(); ++i) {
    out += i == 0 ? "?" : "&";
    out += uri_encode(uri.args[i].first) + "=" + uri_encode(uri.args[i].second);
  }
  return out;
}

}  // namespace openei
