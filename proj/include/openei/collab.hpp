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
#include <functional>
#include <map>
#include <optional>
#include <queue>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "openei/artifact_store.hpp"
#include "openei/device.hpp"
#include "openei/executor.hpp"
#include "openei/registry.hpp"

namespace openei {

/// One-way link between two simulated nodes.
struct SimLink {
  double latency_ms = 0.0;
  double bandwidth_bytes_per_s = 1.0;  // may be +inf
  double loss_rate = 0.0;              // per attempt

  void validate() const;
  /// bytes / bandwidth + latency, in milliseconds.
  double transfer_time_ms(std::uint64_t bytes) const noexcept;
};

void to_json(nlohmann::json& j, const SimLink& l);
void from_json(const nlohmann::json& j, SimLink& l);

/// Single-threaded discrete-event loop over a logical millisecond clock.
/// Events at equal times run in scheduling order.
class Simulator {
 public:
  using Handler = std::function<void()>;

  double now_ms() const noexcept { return now_ms_; }
  void schedule(double delay_ms, Handler handler);
  /// Runs until no events remain.
  void run();

 private:
  struct Event {
    double at_ms;
    std::uint64_t seq;
    Handler handler;
  };
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      return a.at_ms != b.at_ms ? a.at_ms > b.at_ms : a.seq > b.seq;
    }
  };

  double now_ms_ = 0.0;
  std::uint64_t seq_ = 0;
  std::priority_queue<Event, std::vector<Event>, Later> events_;
};

struct TransferOutcome {
  std::uint64_t bytes = 0;
  std::uint32_t attempts = 0;
  double elapsed_ms = 0.0;  // across all attempts
};

/// Seeded lossy transport. A dropped attempt costs its full transfer time
/// and is retried, up to max_attempts in total.
class SimNetwork {
 public:
  explicit SimNetwork(std::uint64_t seed = 1, std::uint32_t max_attempts = 3)
      : rng_(seed), max_attempts_(max_attempts) {}

  /// Throws SimulatedDrop once the retry budget is spent.
  TransferOutcome transfer(const SimLink& link, std::uint64_t bytes);

  std::uint32_t max_attempts() const noexcept { return max_attempts_; }

 private:
  std::mt19937_64 rng_;
  std::uint32_t max_attempts_;
};

/// A node's model-holding state.
struct NodeStore {
  std::string node_id;
  Registry& registry;
  ArtifactStore& artifacts;
};

struct TransferReport {
  std::string model_id;
  std::uint32_t version = 0;
  std::uint64_t bytes = 0;
  std::uint32_t attempts = 0;
  double transfer_time_ms = 0.0;
};

void to_json(nlohmann::json& j, const TransferReport& r);

/// Copies the latest cloud version (entry and artifact) to the edge.
/// Throws UnknownModel, ArtifactMissing, SimulatedDrop.
TransferReport sync_model(const NodeStore& cloud, NodeStore& edge, const std::string& model_id,
                          const SimLink& link, SimNetwork& network);

struct MergeWeight {
  std::string edge_id;
  std::uint64_t sample_count = 0;
};

/// Retrained versions waiting at the cloud, one per (model, edge).
class MergeStage {
 public:
  struct Update {
    std::string model_id;
    std::uint32_t version = 0;
    Payload artifact;
    MergeWeight weight;
  };

  void stage(Update update);
  std::vector<Update> staged(const std::string& model_id) const;
  void clear(const std::string& model_id);

 private:
  std::map<std::string, std::map<std::string, Update>> updates_;  // model -> edge -> update
};

/// Sends an edge's retrained version to the cloud's merge stage. Throws
/// UnknownModel, StaleVersion (cloud already at or past that version),
/// InvalidArgument (sample_count < 1), SimulatedDrop.
TransferReport upload_retrained(const NodeStore& edge, const NodeStore& cloud, MergeStage& stage,
                                const std::string& model_id, std::uint32_t version,
                                const MergeWeight& weight, const SimLink& link,
                                SimNetwork& network);

struct WeightedParams {
  ModelParams params;
  MergeWeight weight;
};

/// Sample-count-weighted parameter average. The result does not depend on
/// the order of `staged`, and coordinates on which every input agrees are
/// returned unchanged. Throws EmptyStage, ShapeMismatch, InvalidArgument.
ModelParams merge_models(std::vector<WeightedParams> staged);

/// Merges the staged reference-package updates for `model_id` into the
/// cloud's latest version and registers the result as a new version above
/// every version seen. Clears the stage on success.
ModelEntry merge_staged(NodeStore& cloud, MergeStage& stage, const std::string& model_id);

struct TaskAllocation {
  std::vector<std::pair<std::string, std::uint64_t>> shares;  // input order

  std::uint64_t total() const noexcept;
  std::uint64_t share_of(const std::string& edge_id) const;
};

/// Largest-remainder apportionment of `total_units` proportional to compute
/// capacity. Equal remainders favor the lexicographically smaller edge_id.
/// Throws NoCapacity when no edge has positive capacity, InvalidArgument for
/// negative capacities.
TaskAllocation split_task(std::uint64_t total_units, std::span<const DeviceSpec> edges);

enum class Dataflow { CloudInference, EdgeInference, EdgeRetrain };

std::string_view to_string(Dataflow flow) noexcept;
std::optional<Dataflow> parse_dataflow(std::string_view name) noexcept;

/// Simulation fixture: one cloud, one or more edges, links between them, a
/// model and a workload.
struct DataflowFixture {
  struct Node {
    std::string id;
    bool is_cloud = false;
    double compute_capacity = 1.0;
    double inference_ms = 0.0;  // per item
    double retrain_ms = 0.0;    // one local retraining run
  };
  struct Link {
    std::string from;
    std::string to;
    SimLink link;
  };

  std::uint64_t seed = 1;
  std::vector<Node> nodes;
  std::vector<Link> links;
  std::string model_id = "model";
  std::uint64_t model_size_bytes = 0;
  std::uint64_t items = 0;
  std::uint64_t input_bytes = 0;   // per item
  std::uint64_t result_bytes = 0;  // per item

  const Node& cloud() const;
  std::vector<const Node*> edges() const;
  /// Throws FixtureParse when no link joins the two nodes.
  const SimLink& link(const std::string& from, const std::string& to) const;
};

/// Throws FixtureParse.
DataflowFixture fixture_from_json(const nlohmann::json& doc);
DataflowFixture load_fixture(const std::string& path);

struct DataflowReport {
  Dataflow flow = Dataflow::EdgeInference;
  double total_latency_ms = 0.0;
  std::uint64_t bytes_moved = 0;
  std::uint64_t raw_data_bytes = 0;
  std::uint64_t result_bytes = 0;
  std::uint64_t model_bytes = 0;
  std::uint64_t transfers = 0;
  std::uint64_t retransmissions = 0;
  TaskAllocation allocation;  // edge_inference only
};

void to_json(nlohmann::json& j, const DataflowReport& r);
std::string format_report_table(const DataflowReport& report);

/// cloud_inference: the first edge ships each item to the cloud and waits
/// for the result. edge_inference: the model is downloaded to the edges,
/// items are split by compute capacity and run locally. edge_retrain: the
/// first edge retrains locally and uploads only the model.
DataflowReport run_dataflow(Dataflow flow, const DataflowFixture& fixture);

}  // namespace openei
