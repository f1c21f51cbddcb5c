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

#include "openei/datastore.hpp"

#include <cstring>
#include <limits>
#include <mutex>
#include <sstream>

#include "fs_util.hpp"
#include "openei/error.hpp"

namespace openei {

namespace fs = std::filesystem;

namespace {

constexpr char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
constexpr std::size_t kHeaderBytes = 4 + 8 + 2;

template <typename T>
void put_le(std::string& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<char>((static_cast<std::uint64_t>(value) >> (8 * i)) & 0xFF));
  }
}

template <typename T>
T get_le(std::string_view bytes, std::size_t offset) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[offset + i])) << (8 * i);
  }
  return static_cast<T>(v);
}

}  // namespace

std::string base64_encode(std::string_view bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 2 < bytes.size(); i += 3) {
    std::uint32_t n = (static_cast<unsigned char>(bytes[i]) << 16) |
                      (static_cast<unsigned char>(bytes[i + 1]) << 8) |
                      static_cast<unsigned char>(bytes[i + 2]);
    out += {kAlphabet[(n >> 18) & 63], kAlphabet[(n >> 12) & 63], kAlphabet[(n >> 6) & 63],
            kAlphabet[n & 63]};
  }
  if (std::size_t rest = bytes.size() - i; rest > 0) {
    std::uint32_t n = static_cast<unsigned char>(bytes[i]) << 16;
    if (rest == 2) n |= static_cast<unsigned char>(bytes[i + 1]) << 8;
    out.push_back(kAlphabet[(n >> 18) & 63]);
    out.push_back(kAlphabet[(n >> 12) & 63]);
    out.push_back(rest == 2 ? kAlphabet[(n >> 6) & 63] : '=');
    out.push_back('=');
  }
  return out;
}

std::string base64_decode(std::string_view text) {
  auto value = [](char c) -> int {
    if (c >= 'A' && c <= 'Z') return c - 'A';
    if (c >= 'a' && c <= 'z') return c - 'a' + 26;
    if (c >= '0' && c <= '9') return c - '0' + 52;
    if (c == '+') return 62;
    if (c == '/') return 63;
    return -1;
  };
  while (!text.empty() && text.back() == '=') text.remove_suffix(1);
  std::string out;
  std::uint32_t acc = 0;
  int bits = 0;
  for (char c : text) {
    int v = value(c);
    if (v < 0) throw Error(ErrorCode::InvalidArgument, "invalid base64 input");
    acc = (acc << 6) | static_cast<std::uint32_t>(v);
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      out.push_back(static_cast<char>((acc >> bits) & 0xFF));
    }
  }
  return out;
}

void to_json(nlohmann::json& j, const SensorRecord& r) {
  j = {{"sensor_id", r.sensor_id},
       {"timestamp", r.timestamp_ms},
       {"content_type", r.content_type},
       {"payload_base64", base64_encode(r.payload)}};
}

RecordRing::RecordRing(std::size_t capacity) : slots_(capacity) {
  if (capacity == 0) throw Error(ErrorCode::InvalidArgument, "ring capacity must be positive");
}

void RecordRing::push(SensorRecord record) {
  slots_[head_] = std::move(record);
  head_ = (head_ + 1) % slots_.size();
  if (count_ < slots_.size()) ++count_;
}

const SensorRecord* RecordRing::newest() const noexcept {
  if (count_ == 0) return nullptr;
  return &slots_[(head_ + slots_.size() - 1) % slots_.size()];
}

std::vector<SensorRecord> RecordRing::snapshot() const {
  std::vector<SensorRecord> out;
  out.reserve(count_);
  std::size_t start = (head_ + slots_.size() - count_) % slots_.size();
  for (std::size_t i = 0; i < count_; ++i) out.push_back(slots_[(start + i) % slots_.size()]);
  return out;
}

std::string encode_segment_record(const SensorRecord& record) {
  std::string out;
  out.reserve(kHeaderBytes + record.sensor_id.size() + record.payload.size());
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(record.payload.size()));
  put_le<std::uint64_t>(out, static_cast<std::uint64_t>(record.timestamp_ms));
  put_le<std::uint16_t>(out, static_cast<std::uint16_t>(record.sensor_id.size()));
  out += record.sensor_id;
  out += record.payload;
  return out;
}

std::vector<SensorRecord> decode_segment(std::string_view bytes, std::size_t& consumed) {
  std::vector<SensorRecord> out;
  std::size_t pos = 0;
  while (bytes.size() - pos >= kHeaderBytes) {
    auto payload_len = get_le<std::uint32_t>(bytes, pos);
    auto timestamp = get_le<std::uint64_t>(bytes, pos + 4);
    auto id_len = get_le<std::uint16_t>(bytes, pos + 12);
    std::size_t total = kHeaderBytes + id_len + payload_len;
    if (bytes.size() - pos < total) break;
    SensorRecord r;
    r.sensor_id.assign(bytes.substr(pos + kHeaderBytes, id_len));
    r.timestamp_ms = static_cast<std::int64_t>(timestamp);
    r.payload.assign(bytes.substr(pos + kHeaderBytes + id_len, payload_len));
    out.push_back(std::move(r));
    pos += total;
  }
  consumed = pos;
  return out;
}

struct Datastore::Sensor {
  explicit Sensor(std::size_t capacity) : ring(capacity) {}

  mutable std::shared_mutex mutex;
  RecordRing ring;
  // Equal timestamps keep insertion (= ingest) order.
  std::multimap<std::int64_t, SensorRecord> history;
  std::ofstream segment;
  std::string content_type;
};

Datastore::Datastore(DatastoreOptions options) : options_(std::move(options)) {
  if (options_.ring_capacity == 0) {
    throw Error(ErrorCode::InvalidArgument, "ring capacity must be positive");
  }
  if (options_.data_dir) {
    std::error_code ec;
    fs::create_directories(*options_.data_dir, ec);
    if (ec) {
      throw Error(ErrorCode::Io,
                  "cannot create data dir " + options_.data_dir->string() + ": " + ec.message());
    }
    replay();
  }
}

Datastore::~Datastore() = default;

void Datastore::replay() {
  for (const auto& file : fs::directory_iterator(*options_.data_dir)) {
    if (file.path().extension() != ".seg") continue;
    std::ifstream in(file.path(), std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string bytes = std::move(buf).str();
    std::size_t consumed = 0;
    auto records = decode_segment(bytes, consumed);
    in.close();
    if (consumed < bytes.size()) fs::resize_file(file.path(), consumed);  // torn tail

    auto sensor_id = detail::unescape_filename(file.path().stem().string());
    auto ctype_path = file.path();
    ctype_path.replace_extension(".ctype");
    std::string ctype = "application/octet-stream";
    if (std::ifstream ct(ctype_path); ct) std::getline(ct, ctype);

    auto sensor = std::make_unique<Sensor>(options_.ring_capacity);
    sensor->content_type = ctype;
    for (auto& r : records) {
      if (r.sensor_id != sensor_id) {
        throw Error(ErrorCode::CorruptFile,
                    "segment " + file.path().string() + " holds a record for " + r.sensor_id,
                    {{"path", file.path().string()}});
      }
      r.content_type = ctype;
      sensor->ring.push(r);
      auto ts = r.timestamp_ms;
      sensor->history.emplace(ts, std::move(r));
    }
    sensors_[sensor_id] = std::move(sensor);
  }
}

void Datastore::declare_sensor(const std::string& sensor_id) {
  if (sensor_id.empty()) throw Error(ErrorCode::InvalidArgument, "sensor_id is empty");
  sensor_for_ingest(sensor_id);
}

Datastore::Sensor& Datastore::sensor_for_ingest(const std::string& sensor_id) {
  {
    std::shared_lock lock(mutex_);
    if (auto it = sensors_.find(sensor_id); it != sensors_.end()) return *it->second;
  }
  std::unique_lock lock(mutex_);
  auto& slot = sensors_[sensor_id];
  if (!slot) slot = std::make_unique<Sensor>(options_.ring_capacity);
  return *slot;
}

const Datastore::Sensor& Datastore::sensor(const std::string& sensor_id) const {
  std::shared_lock lock(mutex_);
  auto it = sensors_.find(sensor_id);
  if (it == sensors_.end()) {
    throw Error(ErrorCode::UnknownSensor, "unknown sensor '" + sensor_id + "'",
                {{"sensor_id", sensor_id}});
  }
  return *it->second;
}

void Datastore::ingest(SensorRecord record) {
  if (record.sensor_id.empty()) throw Error(ErrorCode::InvalidArgument, "sensor_id is empty");
  if (record.timestamp_ms < 0) throw Error(ErrorCode::InvalidArgument, "timestamp is negative");
  if (record.sensor_id.size() > std::numeric_limits<std::uint16_t>::max() ||
      record.payload.size() > std::numeric_limits<std::uint32_t>::max()) {
    throw Error(ErrorCode::InvalidArgument, "record exceeds the segment size limits");
  }
  auto& s = sensor_for_ingest(record.sensor_id);
  std::unique_lock lock(s.mutex);
  if (options_.data_dir) {
    auto base = *options_.data_dir / detail::escape_filename(record.sensor_id);
    if (!s.segment.is_open()) {
      auto path = base;
      path += ".seg";
      s.segment.open(path, std::ios::binary | std::ios::app);
      if (!s.segment) throw Error(ErrorCode::Io, "cannot open segment " + path.string());
    }
    if (record.content_type != s.content_type) {
      auto path = base;
      path += ".ctype";
      std::ofstream ct(path, std::ios::trunc);
      ct << record.content_type << '\n';
      if (!ct.flush()) throw Error(ErrorCode::Io, "cannot write " + path.string());
    }
    auto bytes = encode_segment_record(record);
    s.segment.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!s.segment.flush()) {
      s.segment.clear();
      throw Error(ErrorCode::Io, "append failed for sensor " + record.sensor_id);
    }
  }
  s.content_type = record.content_type;
  s.ring.push(record);
  auto ts = record.timestamp_ms;
  s.history.emplace(ts, std::move(record));
}

SensorRecord Datastore::query_realtime(const std::string& sensor_id) const {
  const auto& s = sensor(sensor_id);
  std::shared_lock lock(s.mutex);
  const auto* newest = s.ring.newest();
  if (!newest) {
    throw Error(ErrorCode::NoData, "sensor '" + sensor_id + "' has no data",
                {{"sensor_id", sensor_id}});
  }
  return *newest;
}

std::vector<SensorRecord> Datastore::query_historical(const std::string& sensor_id,
                                                      std::int64_t start, std::int64_t end) const {
  if (start > end) {
    throw Error(ErrorCode::InvalidRange,
                "start " + std::to_string(start) + " is after end " + std::to_string(end),
                {{"start", start}, {"end", end}});
  }
  const auto& s = sensor(sensor_id);
  std::shared_lock lock(s.mutex);
  std::vector<SensorRecord> out;
  for (auto it = s.history.lower_bound(start); it != s.history.end() && it->first <= end; ++it) {
    out.push_back(it->second);
  }
  return out;
}

std::vector<SensorRecord> Datastore::realtime_window(const std::string& sensor_id) const {
  const auto& s = sensor(sensor_id);
  std::shared_lock lock(s.mutex);
  return s.ring.snapshot();
}

std::vector<std::string> Datastore::sensors() const {
  std::shared_lock lock(mutex_);
  std::vector<std::string> out;
  for (const auto& [id, s] : sensors_) out.push_back(id);
  return out;
}

bool Datastore::has_sensor(const std::string& sensor_id) const {
  std::shared_lock lock(mutex_);
  return sensors_.contains(sensor_id);
}

}  // namespace openei
