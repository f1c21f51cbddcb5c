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
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "openei/executor.hpp"

namespace openei {

struct SensorRecord {
  std::string sensor_id;
  std::int64_t timestamp_ms = 0;  // producer-supplied epoch milliseconds
  Payload payload;
  std::string content_type = "application/octet-stream";

  bool operator==(const SensorRecord&) const = default;
};

/// {sensor_id, timestamp, content_type, payload_base64}
void to_json(nlohmann::json& j, const SensorRecord& r);

std::string base64_encode(std::string_view bytes);
/// Throws InvalidArgument on characters outside the standard alphabet.
std::string base64_decode(std::string_view text);

/// Fixed-capacity FIFO that keeps the most recent records.
class RecordRing {
 public:
  explicit RecordRing(std::size_t capacity);

  void push(SensorRecord record);
  std::size_t size() const noexcept { return count_; }
  std::size_t capacity() const noexcept { return slots_.size(); }
  const SensorRecord* newest() const noexcept;
  /// Oldest first.
  std::vector<SensorRecord> snapshot() const;

 private:
  std::vector<SensorRecord> slots_;
  std::size_t head_ = 0;  // next write slot
  std::size_t count_ = 0;
};

/// Historical segment codec. Each record is
///   u32 LE payload length | u64 LE timestamp | u16 LE sensor-id length |
///   sensor-id bytes | payload bytes
std::string encode_segment_record(const SensorRecord& record);
/// Decodes records from `bytes`, stopping at the first incomplete record.
/// `consumed` receives the byte length of the complete prefix.
std::vector<SensorRecord> decode_segment(std::string_view bytes, std::size_t& consumed);

struct DatastoreOptions {
  std::size_t ring_capacity = 1024;
  /// When set, one append-only segment file per sensor lives here and is
  /// replayed on construction.
  std::optional<std::filesystem::path> data_dir;
};

/// Sensor data behind the ei_data resources: a realtime ring plus the full
/// historical log per sensor. Ingests on different sensors run in parallel;
/// readers copy out under a shared lock.
class Datastore {
 public:
  explicit Datastore(DatastoreOptions options = {});
  ~Datastore();

  Datastore(const Datastore&) = delete;
  Datastore& operator=(const Datastore&) = delete;

  /// Makes a sensor known before it has data (queries then yield NoData).
  void declare_sensor(const std::string& sensor_id);
  /// Throws InvalidArgument for an invalid record, Io on a failed append.
  void ingest(SensorRecord record);

  /// Most recently ingested record. Throws UnknownSensor, NoData.
  SensorRecord query_realtime(const std::string& sensor_id) const;
  /// Records with start <= timestamp <= end, ascending by timestamp then
  /// ingest order. Throws UnknownSensor, InvalidRange.
  std::vector<SensorRecord> query_historical(const std::string& sensor_id, std::int64_t start,
                                             std::int64_t end) const;
  /// Ring contents, oldest first.
  std::vector<SensorRecord> realtime_window(const std::string& sensor_id) const;

  std::vector<std::string> sensors() const;
  bool has_sensor(const std::string& sensor_id) const;
  std::size_t ring_capacity() const noexcept { return options_.ring_capacity; }

 private:
  struct Sensor;
  Sensor& sensor_for_ingest(const std::string& sensor_id);
  const Sensor& sensor(const std::string& sensor_id) const;
  void replay();

  DatastoreOptions options_;
  mutable std::shared_mutex mutex_;
  std::map<std::string, std::unique_ptr<Sensor>> sensors_;
};

}  // namespace openei
