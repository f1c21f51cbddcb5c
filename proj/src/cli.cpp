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

#include "openei/cli.hpp"

#include <pthread.h>
#include <signal.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <httplib.h>
#include <nlohmann/json.hpp>

#include "openei/api.hpp"
#include "openei/capability.hpp"
#include "openei/collab.hpp"
#include "openei/config.hpp"
#include "openei/reference_executor.hpp"
#include "openei/registry.hpp"
#include "openei/selector.hpp"
#include "openei/server.hpp"

namespace openei {

int exit_code_for(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::ConfigError:
    case ErrorCode::InvalidArgument:
    case ErrorCode::MissingArg:
      return kExitUsage;
    case ErrorCode::Infeasible:
      return kExitInfeasible;
    default:
      return kExitRuntime;
  }
}

namespace {

using Table = std::vector<std::vector<std::string>>;

void print_table(std::ostream& out, const Table& rows) {
  std::vector<std::size_t> width;
  for (const auto& row : rows) {
    width.resize(std::max(width.size(), row.size()), 0);
    for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());
  }
  for (const auto& row : rows) {
    std::string line;
    for (std::size_t i = 0; i < row.size(); ++i) {
      line += row[i];
      if (i + 1 < row.size()) line += std::string(width[i] - row[i].size() + 2, ' ');
    }
    out << line << '\n';
  }
}

std::string num(double v) {
  std::ostringstream s;
  s << std::setprecision(10) << v;
  return s.str();
}

void flatten(const nlohmann::json& j, const std::string& prefix, Table& rows) {
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) flatten(v, prefix.empty() ? k : prefix + "." + k, rows);
  } else {
    rows.push_back({prefix, j.is_string() ? j.get<std::string>() : j.dump()});
  }
}

std::int64_t now_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path, {{"path", path}});
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file_atomic(const std::string& path, const std::string& text) {
  auto tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << text;
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path, {{"path", path}});
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot write " + path + ": " + ec.message(), {{"path", path}});
}

struct Globals {
  std::optional<std::string> config_path;
  std::string output = "table";
  bool json() const { return output == "json"; }
};

ServiceConfig config_for(const Globals& g) { return load_config(g.config_path); }

// --- serve ---------------------------------------------------------------

struct ServeFlags {
  std::optional<int> port;
  std::optional<std::string> bind;
  std::optional<std::string> port_file;
};

int cmd_serve(const Globals& g, const ServeFlags& f, std::ostream& out) {
  auto config = config_for(g);
  if (f.port) config.port = *f.port;
  if (f.bind) config.bind_address = *f.bind;

  // Block the stop signals before any thread exists so that only sigwait
  // below sees them.
  sigset_t stop_signals, previous;
  sigemptyset(&stop_signals);
  sigaddset(&stop_signals, SIGINT);
  sigaddset(&stop_signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &stop_signals, &previous);
  struct RestoreMask {
    sigset_t mask;
    ~RestoreMask() { pthread_sigmask(SIG_SETMASK, &mask, nullptr); }
  } restore{previous};

  Deployment node(config);
  HttpServer server(node.api());
  int port = server.bind(config.bind_address, config.port);
  server.start();
  out << "openei listening on http://" << config.bind_address << ':' << port << std::endl;
  if (f.port_file) write_file_atomic(*f.port_file, std::to_string(port) + "\n");

  int sig = 0;
  sigwait(&stop_signals, &sig);
  out << "received signal " << sig << ", shutting down" << std::endl;
  server.stop();
  node.runtime().shutdown(true);
  return kExitOk;
}

// --- register ------------------------------------------------------------

struct RegisterFlags {
  std::string model_id;
  std::string scenario;
  std::string task;
  std::string package_id = "reference";
  std::optional<std::uint32_t> version;
  std::string artifact_path;
  std::optional<std::uint64_t> declared_memory;
};

int cmd_register(const Globals& g, const RegisterFlags& f, std::ostream& out) {
  auto scenario = parse_scenario(f.scenario);
  if (!scenario) {
    throw Error(ErrorCode::InvalidArgument, "unknown scenario '" + f.scenario + "'");
  }
  auto artifact = read_file(f.artifact_path);
  if (f.package_id == "reference") ReferenceModel::from_artifact(artifact);  // validates

  auto config = config_for(g);
  auto registry = Registry::open(config.registry_path);

  ModelEntry entry;
  entry.model_id = f.model_id;
  entry.scenario = *scenario;
  entry.task = f.task;
  entry.package_id = f.package_id;
  auto current = registry.get(f.model_id);
  entry.version = f.version.value_or(current ? current->version + 1 : 1);
  entry.artifact_ref = f.model_id + "@v" + std::to_string(entry.version);
  entry.declared_memory_bytes = f.declared_memory;
  if (current && current->version >= entry.version) {
    throw Error(current->version == entry.version ? ErrorCode::DuplicateId
                                                  : ErrorCode::VersionRegression,
                f.model_id + " is already at v" + std::to_string(current->version));
  }
  ArtifactStore artifacts(config.artifact_dir);
  artifacts.put(entry.artifact_ref, artifact);
  registry.register_model(entry);

  if (g.json()) {
    out << nlohmann::json(entry).dump(2) << '\n';
  } else {
    print_table(out, {{"model_id", "version", "scenario", "task", "package_id", "artifact_ref"},
                      {entry.model_id, std::to_string(entry.version),
                       std::string(to_string(entry.scenario)), entry.task, entry.package_id,
                       entry.artifact_ref}});
  }
  return kExitOk;
}

// --- profile -------------------------------------------------------------

struct ProfileFlags {
  std::string model_id;
  std::optional<std::string> device_id;
  std::string workload_path;
  std::size_t warmup = 5;
  std::size_t runs = 50;
};

int cmd_profile(const Globals& g, const ProfileFlags& f, std::ostream& out) {
  auto workload = load_workload(f.workload_path);
  MeasurementConfig mc;
  mc.warmup_runs = f.warmup;
  mc.measured_runs = f.runs;
  mc.workload_id = workload.id;
  mc.validate();

  auto config = config_for(g);
  auto devices = config.device_catalog();
  auto device_id = f.device_id.value_or(config.device_id);
  auto device = devices.find(device_id);
  if (device == devices.end()) {
    throw Error(ErrorCode::UnknownDevice, "unknown device '" + device_id + "'",
                {{"device_id", device_id}});
  }
  auto registry = Registry::open(config.registry_path);
  auto entry = registry.get(f.model_id);
  if (!entry) {
    throw Error(ErrorCode::UnknownModel, "unknown model '" + f.model_id + "'",
                {{"model_id", f.model_id}});
  }
  ReferenceExecutor executor;
  if (entry->package_id != executor.package_id()) {
    throw Error(ErrorCode::Unsupported,
                "no executor for package '" + entry->package_id + "' in this tool",
                {{"package_id", entry->package_id}});
  }
  ArtifactStore artifacts(config.artifact_dir);
  auto artifact = artifacts.get(entry->artifact_ref);
  if (!artifact) {
    throw Error(ErrorCode::ArtifactMissing, "artifact '" + entry->artifact_ref + "' is missing",
                {{"artifact_ref", entry->artifact_ref}});
  }
  executor.load(entry->model_id, *artifact);

  auto record = profile_model(executor, entry->model_id, workload, mc, device->second);
  registry.attach_profile(record.model_id, record.device_id, record.profile);
  if (!config.profiles_path.empty()) append_profile_record(config.profiles_path, record);

  if (g.json()) {
    out << nlohmann::json(record).dump(2) << '\n';
  } else {
    const auto& p = record.profile;
    print_table(out, {{"model_id", "device_id", "accuracy", "latency_ms", "energy_mj", "memory_bytes"},
                      {record.model_id, record.device_id, num(p.accuracy), num(p.latency_ms),
                       num(p.energy_mj), std::to_string(p.memory_bytes)}});
  }
  return kExitOk;
}

// --- select --------------------------------------------------------------

struct SelectFlags {
  std::string scenario;
  std::string task;
  std::optional<std::string> objective;
  std::optional<double> min_accuracy;
  std::optional<double> max_latency;
  std::optional<double> max_energy;
  std::optional<std::uint64_t> max_memory;
  std::optional<std::string> device_id;
};

int cmd_select(const Globals& g, const SelectFlags& f, std::ostream& out) {
  SelectionQuery q;
  auto scenario = parse_scenario(f.scenario);
  if (!scenario) throw Error(ErrorCode::InvalidArgument, "unknown scenario '" + f.scenario + "'");
  q.scenario = *scenario;
  q.task = f.task;
  q.min_accuracy = f.min_accuracy;
  q.max_latency_ms = f.max_latency;
  q.max_energy_mj = f.max_energy;
  q.max_memory_bytes = f.max_memory;

  auto config = config_for(g);
  if (f.objective) {
    auto o = parse_objective(*f.objective);
    if (!o) throw Error(ErrorCode::InvalidArgument, "unknown objective '" + *f.objective + "'");
    q.objective = *o;
  } else {
    q.objective = unconstrained_objective(q, config.default_objective);
  }
  q.device_id = f.device_id.value_or(config.device_id);
  q.validate();

  auto registry = Registry::load(config.registry_path);
  auto result = select(q, registry, config.device_catalog());
  if (g.json()) {
    out << nlohmann::json(result).dump(2) << '\n';
  } else {
    print_table(out, {{"model_id", "package_id", "version", "objective", "objective_value",
                       "feasible_count"},
                      {result.model_id, result.package_id, std::to_string(result.version),
                       std::string(to_string(result.objective)), num(result.objective_value),
                       std::to_string(result.feasible_count)}});
  }
  return kExitOk;
}

// --- ingest --------------------------------------------------------------

struct IngestFlags {
  std::string sensor_id;
  std::optional<std::string> timestamp;
  std::optional<std::string> file;
  std::optional<std::string> data;
  std::string content_type = "application/octet-stream";
};

int cmd_ingest(const Globals& g, const IngestFlags& f, std::ostream& out) {
  SensorRecord record;
  record.sensor_id = f.sensor_id;
  record.content_type = f.content_type;
  record.timestamp_ms = now_ms();
  if (f.timestamp && *f.timestamp != "present_time") {
    try {
      std::size_t used = 0;
      record.timestamp_ms = std::stoll(*f.timestamp, &used);
      if (used != f.timestamp->size()) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidArgument, "timestamp must be epoch milliseconds or present_time",
                  {{"timestamp", *f.timestamp}});
    }
  }
  record.payload = f.file ? read_file(*f.file) : f.data.value_or("");

  auto config = config_for(g);
  DatastoreOptions options;
  options.ring_capacity = config.ring_capacity;
  options.data_dir = config.data_dir;
  Datastore store(options);
  store.ingest(record);

  if (g.json()) {
    out << nlohmann::json{{"sensor_id", record.sensor_id},
                          {"timestamp", record.timestamp_ms},
                          {"bytes", record.payload.size()}}
               .dump(2)
        << '\n';
  } else {
    print_table(out, {{"sensor_id", "timestamp", "bytes"},
                      {record.sensor_id, std::to_string(record.timestamp_ms),
                       std::to_string(record.payload.size())}});
  }
  return kExitOk;
}

// --- simulate ------------------------------------------------------------

struct SimulateFlags {
  std::string fixture_path;
  std::string flow;
  std::optional<std::string> report_path;
};

int cmd_simulate(const Globals& g, const SimulateFlags& f, std::ostream& out) {
  auto flow = parse_dataflow(f.flow);
  if (!flow) throw Error(ErrorCode::InvalidArgument, "unknown flow '" + f.flow + "'");
  auto fixture = load_fixture(f.fixture_path);
  auto report = run_dataflow(*flow, fixture);
  nlohmann::json doc = report;
  if (f.report_path) write_file_atomic(*f.report_path, doc.dump(2) + "\n");
  if (g.json()) {
    out << doc.dump(2) << '\n';
  } else {
    out << format_report_table(report);
  }
  return kExitOk;
}

// --- stats ---------------------------------------------------------------

struct StatsFlags {
  std::optional<std::string> url;
};

int cmd_stats(const Globals& g, const StatsFlags& f, std::ostream& out) {
  std::string url;
  if (f.url) {
    url = *f.url;
  } else {
    auto config = config_for(g);
    url = "http://" + config.bind_address + ":" + std::to_string(config.port);
  }
  httplib::Client client(url);
  client.set_connection_timeout(5);
  auto res = client.Get("/stats");
  if (!res) {
    throw Error(ErrorCode::Io, "cannot reach " + url + ": " + httplib::to_string(res.error()),
                {{"url", url}});
  }
  if (res->status != 200) {
    throw Error(ErrorCode::Io, url + "/stats answered HTTP " + std::to_string(res->status),
                {{"url", url}, {"status", res->status}});
  }
  auto doc = nlohmann::json::parse(res->body, nullptr, false);
  if (doc.is_discarded()) throw Error(ErrorCode::Io, url + "/stats returned malformed JSON");
  if (g.json()) {
    out << doc.dump(2) << '\n';
  } else {
    Table rows{{"key", "value"}};
    flatten(doc, "", rows);
    print_table(out, rows);
  }
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"openei: edge model serving, selection and data service"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  Globals g;
  app.add_option("--config", g.config_path, "Config file (JSON)")->envname("OPENEI_CONFIG");
  app.add_option("--output", g.output, "Output format")
      ->check(CLI::IsMember({"table", "json"}))
      ->capture_default_str();

  ServeFlags serve;
  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP service until SIGINT/SIGTERM");
  serve_cmd->add_option("--port", serve.port, "Override the configured port (0 = any)")
      ->check(CLI::Range(0, 65535));
  serve_cmd->add_option("--bind", serve.bind, "Override the configured bind address");
  serve_cmd->add_option("--port-file", serve.port_file, "Write the bound port to this file");

  RegisterFlags reg;
  auto* reg_cmd = app.add_subcommand("register", "Add a model version and its artifact");
  reg_cmd->add_option("--model", reg.model_id, "Model id")->required();
  reg_cmd->add_option("--scenario", reg.scenario, "vehicles|safety|home|health")->required();
  reg_cmd->add_option("--task", reg.task, "Algorithm/task name")->required();
  reg_cmd->add_option("--package", reg.package_id, "Execution package")->capture_default_str();
  reg_cmd->add_option("--version", reg.version, "Version (default: latest + 1)")
      ->check(CLI::PositiveNumber);
  reg_cmd->add_option("--artifact", reg.artifact_path, "Artifact file")
      ->required()
      ->check(CLI::ExistingFile);
  reg_cmd->add_option("--declared-memory", reg.declared_memory, "Declared memory in bytes");

  ProfileFlags prof;
  auto* prof_cmd = app.add_subcommand("profile", "Measure a model's ALEM profile on a workload");
  prof_cmd->add_option("--model", prof.model_id, "Model id")->required();
  prof_cmd->add_option("--device", prof.device_id, "Device id (default: config device_id)");
  prof_cmd->add_option("--workload", prof.workload_path, "Workload JSON file")->required();
  prof_cmd->add_option("--warmup", prof.warmup, "Warm-up runs")->capture_default_str();
  prof_cmd->add_option("--runs", prof.runs, "Measured runs")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  SelectFlags sel;
  auto* sel_cmd = app.add_subcommand("select", "Pick a model for a scenario/task under constraints");
  sel_cmd->add_option("--scenario", sel.scenario, "vehicles|safety|home|health")->required();
  sel_cmd->add_option("--task", sel.task, "Algorithm/task name")->required();
  sel_cmd->add_option("--objective", sel.objective, "latency|accuracy|energy|memory")
      ->check(CLI::IsMember({"latency", "accuracy", "energy", "memory"}));
  sel_cmd->add_option("--min-accuracy", sel.min_accuracy, "Accuracy floor (0, 1]");
  sel_cmd->add_option("--max-latency", sel.max_latency, "Latency ceiling in ms");
  sel_cmd->add_option("--max-energy", sel.max_energy, "Energy ceiling in mJ");
  sel_cmd->add_option("--max-memory", sel.max_memory, "Memory ceiling in bytes");
  sel_cmd->add_option("--device", sel.device_id, "Device id (default: config device_id)");

  IngestFlags ing;
  auto* ing_cmd = app.add_subcommand("ingest", "Append one sensor record to the local datastore");
  ing_cmd->add_option("--sensor", ing.sensor_id, "Sensor id")->required();
  ing_cmd->add_option("--timestamp", ing.timestamp, "Epoch ms or present_time (default: now)");
  auto* file_opt = ing_cmd->add_option("--file", ing.file, "Payload file")->check(CLI::ExistingFile);
  auto* data_opt = ing_cmd->add_option("--data", ing.data, "Payload as a literal string");
  file_opt->excludes(data_opt);
  ing_cmd->add_option("--content-type", ing.content_type, "Payload media type")
      ->capture_default_str();

  SimulateFlags sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Run a collaboration data flow on a fixture");
  sim_cmd->add_option("--fixture", sim.fixture_path, "Fixture JSON file")->required();
  sim_cmd->add_option("--flow", sim.flow, "cloud_inference|edge_inference|edge_retrain")
      ->required()
      ->check(CLI::IsMember({"cloud_inference", "edge_inference", "edge_retrain"}));
  sim_cmd->add_option("--report", sim.report_path, "Also write the JSON report here");

  StatsFlags stats;
  auto* stats_cmd = app.add_subcommand("stats", "Show a running service's telemetry");
  stats_cmd->add_option("--url", stats.url, "Service base URL (default: from config)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*serve_cmd) return cmd_serve(g, serve, out);
    if (*reg_cmd) return cmd_register(g, reg, out);
    if (*prof_cmd) return cmd_profile(g, prof, out);
    if (*sel_cmd) return cmd_select(g, sel, out);
    if (*ing_cmd) return cmd_ingest(g, ing, out);
    if (*sim_cmd) return cmd_simulate(g, sim, out);
    if (*stats_cmd) return cmd_stats(g, stats, out);
  } catch (const Error& e) {
    if (g.json()) {
      err << e.to_json().dump(2) << '\n';
    } else {
      err << "error [" << to_string(e.code()) << "]: " << e.what() << '\n';
      if (!e.detail().empty() && !e.detail().is_null()) err << "  detail: " << e.detail().dump() << '\n';
    }
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace openei
