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

#include "openei/api.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <set>

#include "openei/reference_executor.hpp"

namespace openei {

ApiResponse ApiResponse::success(nlohmann::json body) {
  ApiResponse r;
  r.body = std::move(body);
  return r;
}

ApiResponse ApiResponse::failure(const Error& error) {
  ApiResponse r;
  r.ok = false;
  r.http_status = http_status_for(error.code());
  r.error = error.to_json();
  r.body = nullptr;
  return r;
}

nlohmann::json ApiResponse::to_json() const {
  if (!ok) return {{"status", "error"}, {"error", error}};
  nlohmann::json j = {{"status", "ok"}, {"body", body}};
  if (selection_trace) j["selection_trace"] = *selection_trace;
  return j;
}

int http_status_for(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::MalformedUri:
    case ErrorCode::MissingArg:
    case ErrorCode::InvalidRange:
    case ErrorCode::InvalidArgument:
    case ErrorCode::Unsupported:
      return 400;
    case ErrorCode::UnknownSensor:
    case ErrorCode::UnknownAlgorithm:
    case ErrorCode::UnknownModel:
    case ErrorCode::UnknownDevice:
    case ErrorCode::UnknownPackage:
    case ErrorCode::NoData:
      return 404;
    case ErrorCode::Infeasible:
      return 409;
    case ErrorCode::QueueFull:
    case ErrorCode::ShuttingDown:
      return 503;
    default:
      return 500;
  }
}

namespace {

const std::set<std::string, std::less<>> kControlArgs = {
    "objective", "min_accuracy", "max_latency", "max_energy", "max_memory",
    "device",    "priority",     "urgent",      "deadline_ms", "input"};

double number_arg(const ResourceUri& uri, std::string_view key) {
  auto text = *uri.arg(key);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(value)) {
    throw Error(ErrorCode::InvalidArgument,
                "argument " + std::string(key) + "='" + text + "' is not a number",
                {{"arg", std::string(key)}});
  }
  return value;
}

std::int64_t integer_arg(const ResourceUri& uri, std::string_view key) {
  auto text = uri.arg(key);
  if (!text) {
    throw Error(ErrorCode::MissingArg, "missing argument '" + std::string(key) + "'",
                {{"arg", std::string(key)}});
  }
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(text->data(), text->data() + text->size(), value);
  if (ec != std::errc{} || ptr != text->data() + text->size()) {
    throw Error(ErrorCode::InvalidArgument,
                "argument " + std::string(key) + "='" + *text + "' is not an integer",
                {{"arg", std::string(key)}});
  }
  return value;
}

Payload features_from_list(const std::string& text) {
  std::vector<double> values;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto comma = text.find(',', pos);
    auto item = text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (item.empty() || ec != std::errc{} || ptr != item.data() + item.size()) {
      throw Error(ErrorCode::InvalidArgument, "input list item '" + item + "' is not a number",
                  {{"arg", "input"}});
    }
    values.push_back(v);
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return encode_features(values);
}

std::int64_t now_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

}  // namespace

ApiService::ApiService(Wiring wiring) : w_(std::move(wiring)) {}

ApiResponse ApiService::handle(std::string_view method, std::string_view target,
                               std::string_view body, std::string_view content_type) {
  try {
    auto uri = parse_uri(target);
    if (uri.kind == ResourceKind::Algorithms) {
      if (method != "GET" && method != "POST") {
        throw Error(ErrorCode::Unsupported, std::string(method) + " is not supported on ei_algorithms");
      }
      return handle_algorithm(uri, method == "POST" ? body : std::string_view{}, content_type);
    }
    if (method == "GET") return handle_data(uri);
    if (method == "POST") return handle_ingest(uri, body, content_type);
    throw Error(ErrorCode::Unsupported, std::string(method) + " is not supported on ei_data");
  } catch (const Error& e) {
    return ApiResponse::failure(e);
  } catch (const std::exception& e) {
    return ApiResponse::failure(Error(ErrorCode::Io, std::string("internal error: ") + e.what()));
  }
}

SelectionQuery ApiService::query_for(const ResourceUri& uri) const {
  SelectionQuery q;
  q.scenario = uri.scenario();
  q.task = uri.field4;
  q.device_id = uri.arg("device").value_or(w_.device_id);
  if (uri.arg("min_accuracy")) q.min_accuracy = number_arg(uri, "min_accuracy");
  if (uri.arg("max_latency")) q.max_latency_ms = number_arg(uri, "max_latency");
  if (uri.arg("max_energy")) q.max_energy_mj = number_arg(uri, "max_energy");
  if (uri.arg("max_memory")) {
    double m = number_arg(uri, "max_memory");
    if (!(m >= 1.0)) {
      throw Error(ErrorCode::InvalidArgument, "max_memory must be positive", {{"arg", "max_memory"}});
    }
    q.max_memory_bytes = static_cast<std::uint64_t>(m);
  }
  if (auto name = uri.arg("objective")) {
    auto o = parse_objective(*name);
    if (!o) {
      throw Error(ErrorCode::InvalidArgument, "unknown objective '" + *name + "'",
                  {{"arg", "objective"}});
    }
    q.objective = *o;
  } else {
    q.objective = unconstrained_objective(q, w_.default_objective);
  }
  q.validate();
  return q;
}

Payload ApiService::resolve_input(const ResourceUri& uri, std::string_view body,
                                  std::string_view content_type) const {
  if (!body.empty()) {
    if (content_type.substr(0, 16) == "application/json") {
      try {
        auto doc = nlohmann::json::parse(body);
        return encode_features(doc.at("input").get<std::vector<double>>());
      } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::InvalidArgument,
                    std::string("JSON body must be {\"input\": [numbers]}: ") + e.what());
      }
    }
    return Payload(body);
  }
  if (auto list = uri.arg("input")) return features_from_list(*list);
  // Any other argument may reference a sensor whose latest record is the
  // input (e.g. video=camera1).
  for (const auto& [key, value] : uri.args) {
    if (kControlArgs.contains(key)) continue;
    if (w_.datastore.has_sensor(value)) return w_.datastore.query_realtime(value).payload;
  }
  throw Error(ErrorCode::MissingArg,
              "no input: POST a body, pass input=v1,v2,... or reference a sensor",
              {{"arg", "input"}});
}

ApiResponse ApiService::handle_algorithm(const ResourceUri& uri, std::string_view body,
                                         std::string_view content_type) {
  try {
    if (uri.kind != ResourceKind::Algorithms) {
      throw Error(ErrorCode::InvalidArgument, "not an ei_algorithms resource");
    }
    auto query = query_for(uri);
    auto candidates = w_.registry.lookup(query.scenario, query.task);
    if (candidates.empty()) {
      throw Error(ErrorCode::UnknownAlgorithm,
                  "no model implements " + uri.field3 + "/" + uri.field4,
                  {{"scenario", uri.field3}, {"algorithm", uri.field4}});
    }
    auto device = w_.devices.find(query.device_id);
    if (device == w_.devices.end()) {
      throw Error(ErrorCode::UnknownDevice, "unknown device '" + query.device_id + "'",
                  {{"device_id", query.device_id}});
    }
    auto selection = select(query, candidates, device->second);
    if (!satisfies(selection.profile_used, query, device->second)) {
      throw Error(ErrorCode::Io, "selected model " + selection.model_id + " violates the request");
    }

    InferenceTask task;
    task.model_id = selection.model_id;
    task.package_id = selection.package_id;
    task.input = resolve_input(uri, body, content_type);
    task.priority = Priority::Normal;
    if (auto p = uri.arg("priority")) {
      auto parsed = parse_priority(*p);
      if (!parsed) {
        throw Error(ErrorCode::InvalidArgument, "unknown priority '" + *p + "'", {{"arg", "priority"}});
      }
      task.priority = *parsed;
    }
    if (auto urgent = uri.arg("urgent"); urgent && (*urgent == "true" || *urgent == "1")) {
      task.priority = Priority::Realtime;
    }
    if (uri.arg("deadline_ms")) task.deadline_ms = number_arg(uri, "deadline_ms");

    auto result = w_.runtime.submit(std::move(task)).get();

    auto response = ApiResponse::success({{"output", result.output},
                                          {"task_id", result.task_id},
                                          {"priority", std::string(to_string(result.priority))},
                                          {"deadline_missed", result.deadline_missed},
                                          {"queue_ms", result.queue_ms},
                                          {"run_ms", result.run_ms}});
    response.selection_trace = nlohmann::json{{"model_id", selection.model_id},
                                              {"package_id", selection.package_id},
                                              {"version", selection.version},
                                              {"objective", std::string(to_string(selection.objective))},
                                              {"objective_value", selection.objective_value},
                                              {"feasible_count", selection.feasible_count},
                                              {"device_id", query.device_id}};
    return response;
  } catch (const Error& e) {
    return ApiResponse::failure(e);
  }
}

ApiResponse ApiService::handle_data(const ResourceUri& uri) {
  try {
    if (uri.kind != ResourceKind::Data) throw Error(ErrorCode::InvalidArgument, "not an ei_data resource");
    if (uri.data_type() == DataType::Realtime) {
      if (auto ts = uri.arg("timestamp"); ts && *ts != "present_time") {
        throw Error(ErrorCode::Unsupported,
                    "realtime reads only accept timestamp=present_time; use historical with "
                    "start/end for other times",
                    {{"arg", "timestamp"}});
      }
      return ApiResponse::success(w_.datastore.query_realtime(uri.field4));
    }
    auto start = integer_arg(uri, "start");
    auto end = integer_arg(uri, "end");
    auto records = w_.datastore.query_historical(uri.field4, start, end);
    return ApiResponse::success(
        {{"sensor_id", uri.field4}, {"count", records.size()}, {"records", records}});
  } catch (const Error& e) {
    return ApiResponse::failure(e);
  }
}

ApiResponse ApiService::handle_ingest(const ResourceUri& uri, std::string_view body,
                                      std::string_view content_type) {
  try {
    if (uri.kind != ResourceKind::Data) throw Error(ErrorCode::InvalidArgument, "not an ei_data resource");
    SensorRecord record;
    record.sensor_id = uri.field4;
    auto ts = uri.arg("timestamp");
    if (!ts) throw Error(ErrorCode::MissingArg, "missing argument 'timestamp'", {{"arg", "timestamp"}});
    record.timestamp_ms = *ts == "present_time" ? now_ms() : integer_arg(uri, "timestamp");
    record.payload = Payload(body);
    if (!content_type.empty()) record.content_type = std::string(content_type);
    auto stored = record.timestamp_ms;
    w_.datastore.ingest(std::move(record));
    return ApiResponse::success({{"sensor_id", uri.field4}, {"timestamp", stored}});
  } catch (const Error& e) {
    return ApiResponse::failure(e);
  }
}

nlohmann::json ApiService::stats() const {
  return {{"runtime", w_.runtime.telemetry()},
          {"models", w_.registry.size()},
          {"sensors", w_.datastore.sensors()},
          {"device_id", w_.device_id}};
}

Deployment::Deployment(const ServiceConfig& config)
    : config_(config),
      registry_(config.registry_path.empty() ? Registry{} : Registry::open(config.registry_path)),
      artifacts_(config.artifact_dir.empty() ? ArtifactStore{} : ArtifactStore(config.artifact_dir)) {
  DatastoreOptions ds;
  ds.ring_capacity = config.ring_capacity;
  if (!config.data_dir.empty()) ds.data_dir = config.data_dir;
  datastore_ = std::make_unique<Datastore>(ds);
  for (const auto& s : config.sensors) datastore_->declare_sensor(s);

  RuntimeOptions ro;
  ro.workers = config.workers;
  ro.queue_capacity = config.queue_capacity;
  runtime_ = std::make_unique<Runtime>(registry_, artifacts_, ro);
  runtime_->add_executor(std::make_shared<ReferenceExecutor>());

  api_ = std::make_unique<ApiService>(ApiService::Wiring{registry_, config.device_catalog(),
                                                         *datastore_, *runtime_, config.device_id,
                                                         config.default_objective});
}

Deployment::~Deployment() {
  api_.reset();
  if (runtime_) runtime_->shutdown(true);
}

}  // namespace openei
