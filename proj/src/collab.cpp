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

#include "openei/collab.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>

#include "openei/error.hpp"
#include "openei/reference_executor.hpp"

namespace openei {

void SimLink::validate() const {
  if (!(latency_ms >= 0.0) || !std::isfinite(latency_ms)) {
    throw Error(ErrorCode::InvalidArgument, "link latency must be finite and >= 0");
  }
  if (!(bandwidth_bytes_per_s > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "link bandwidth must be positive");
  }
  if (!(loss_rate >= 0.0 && loss_rate <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "link loss_rate must lie in [0, 1]");
  }
}

double SimLink::transfer_time_ms(std::uint64_t bytes) const noexcept {
  return static_cast<double>(bytes) / bandwidth_bytes_per_s * 1000.0 + latency_ms;
}

void to_json(nlohmann::json& j, const SimLink& l) {
  j = {{"latency_ms", l.latency_ms}, {"loss_rate", l.loss_rate}};
  if (std::isinf(l.bandwidth_bytes_per_s)) {
    j["bandwidth_bytes_per_s"] = "inf";
  } else {
    j["bandwidth_bytes_per_s"] = l.bandwidth_bytes_per_s;
  }
}

void from_json(const nlohmann::json& j, SimLink& l) {
  l.latency_ms = j.value("latency_ms", 0.0);
  const auto& bw = j.at("bandwidth_bytes_per_s");
  if (bw.is_string()) {
    if (bw.get<std::string>() != "inf") throw Error(ErrorCode::InvalidArgument, "bandwidth must be a number or \"inf\"");
    l.bandwidth_bytes_per_s = std::numeric_limits<double>::infinity();
  } else {
    l.bandwidth_bytes_per_s = bw.get<double>();
  }
  l.loss_rate = j.value("loss_rate", 0.0);
  l.validate();
}

void Simulator::schedule(double delay_ms, Handler handler) {
  events_.push({now_ms_ + std::max(0.0, delay_ms), seq_++, std::move(handler)});
}

void Simulator::run() {
  while (!events_.empty()) {
    auto event = events_.top();
    events_.pop();
    now_ms_ = event.at_ms;
    event.handler();
  }
}

TransferOutcome SimNetwork::transfer(const SimLink& link, std::uint64_t bytes) {
  link.validate();
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  TransferOutcome out;
  out.bytes = bytes;
  const double per_attempt = link.transfer_time_ms(bytes);
  for (std::uint32_t attempt = 1; attempt <= max_attempts_; ++attempt) {
    out.attempts = attempt;
    out.elapsed_ms += per_attempt;
    if (!(coin(rng_) < link.loss_rate)) return out;
  }
  throw Error(ErrorCode::SimulatedDrop,
              "transfer of " + std::to_string(bytes) + " bytes dropped " +
                  std::to_string(max_attempts_) + " times",
              {{"bytes", bytes}, {"attempts", max_attempts_}});
}

void to_json(nlohmann::json& j, const TransferReport& r) {
  j = {{"model_id", r.model_id},
       {"version", r.version},
       {"bytes", r.bytes},
       {"attempts", r.attempts},
       {"transfer_time_ms", r.transfer_time_ms}};
}

namespace {

Payload artifact_or_throw(const NodeStore& node, const ModelEntry& entry) {
  auto bytes = node.artifacts.get(entry.artifact_ref);
  if (!bytes) {
    throw Error(ErrorCode::ArtifactMissing,
                node.node_id + " lacks artifact '" + entry.artifact_ref + "'",
                {{"artifact_ref", entry.artifact_ref}, {"node", node.node_id}});
  }
  return *bytes;
}

ModelEntry latest_or_throw(const NodeStore& node, const std::string& model_id) {
  auto entry = node.registry.get(model_id);
  if (!entry) {
    throw Error(ErrorCode::UnknownModel, node.node_id + " has no model '" + model_id + "'",
                {{"model_id", model_id}, {"node", node.node_id}});
  }
  return *entry;
}

}  // namespace

TransferReport sync_model(const NodeStore& cloud, NodeStore& edge, const std::string& model_id,
                          const SimLink& link, SimNetwork& network) {
  auto entry = latest_or_throw(cloud, model_id);
  auto bytes = artifact_or_throw(cloud, entry);
  auto outcome = network.transfer(link, bytes.size());
  edge.artifacts.put(entry.artifact_ref, bytes);
  edge.registry.upsert(entry);
  return {model_id, entry.version, outcome.bytes, outcome.attempts, outcome.elapsed_ms};
}

void MergeStage::stage(Update update) {
  auto model = update.model_id;
  auto edge = update.weight.edge_id;
  updates_[model].insert_or_assign(edge, std::move(update));
}

std::vector<MergeStage::Update> MergeStage::staged(const std::string& model_id) const {
  std::vector<Update> out;
  if (auto it = updates_.find(model_id); it != updates_.end()) {
    for (const auto& [edge, update] : it->second) out.push_back(update);
  }
  return out;
}

void MergeStage::clear(const std::string& model_id) { updates_.erase(model_id); }

TransferReport upload_retrained(const NodeStore& edge, const NodeStore& cloud, MergeStage& stage,
                                const std::string& model_id, std::uint32_t version,
                                const MergeWeight& weight, const SimLink& link,
                                SimNetwork& network) {
  if (weight.sample_count < 1) {
    throw Error(ErrorCode::InvalidArgument, "merge weight needs sample_count >= 1");
  }
  auto entry = edge.registry.get(model_id, version);
  if (!entry) {
    throw Error(ErrorCode::UnknownModel,
                edge.node_id + " has no " + model_id + " v" + std::to_string(version),
                {{"model_id", model_id}, {"version", version}});
  }
  if (auto cloud_entry = cloud.registry.get(model_id); cloud_entry && cloud_entry->version >= version) {
    throw Error(ErrorCode::StaleVersion,
                model_id + " v" + std::to_string(version) + " is not newer than cloud v" +
                    std::to_string(cloud_entry->version),
                {{"model_id", model_id}, {"version", version}, {"cloud_version", cloud_entry->version}});
  }
  auto bytes = artifact_or_throw(edge, *entry);
  auto outcome = network.transfer(link, bytes.size());
  stage.stage({model_id, version, std::move(bytes), weight});
  return {model_id, version, outcome.bytes, outcome.attempts, outcome.elapsed_ms};
}

ModelParams merge_models(std::vector<WeightedParams> staged) {
  if (staged.empty()) throw Error(ErrorCode::EmptyStage, "nothing staged to merge");
  for (const auto& s : staged) {
    if (s.weight.sample_count < 1) {
      throw Error(ErrorCode::InvalidArgument, "edge " + s.weight.edge_id + " has sample_count 0");
    }
    if (s.params.shape != staged.front().params.shape) {
      throw Error(ErrorCode::ShapeMismatch, "staged models differ in parameter shape");
    }
    std::size_t n = std::accumulate(s.params.shape.begin(), s.params.shape.end(), std::size_t{1},
                                    std::multiplies<>());
    if (n != s.params.values.size()) {
      throw Error(ErrorCode::ShapeMismatch, "parameter count does not match its shape");
    }
  }
  // Canonical summation order makes the result independent of input order.
  std::sort(staged.begin(), staged.end(), [](const WeightedParams& a, const WeightedParams& b) {
    return std::tie(a.weight.edge_id, a.weight.sample_count, a.params.values) <
           std::tie(b.weight.edge_id, b.weight.sample_count, b.params.values);
  });
  double total = 0.0;
  for (const auto& s : staged) total += static_cast<double>(s.weight.sample_count);

  ModelParams merged;
  merged.shape = staged.front().params.shape;
  merged.values.resize(staged.front().params.values.size());
  for (std::size_t i = 0; i < merged.values.size(); ++i) {
    const double first = staged.front().params.values[i];
    bool unanimous = true;
    double acc = 0.0;
    for (const auto& s : staged) {
      unanimous = unanimous && s.params.values[i] == first;
      acc += static_cast<double>(s.weight.sample_count) * s.params.values[i];
    }
    merged.values[i] = unanimous ? first : acc / total;
  }
  return merged;
}

ModelEntry merge_staged(NodeStore& cloud, MergeStage& stage, const std::string& model_id) {
  auto updates = stage.staged(model_id);
  if (updates.empty()) throw Error(ErrorCode::EmptyStage, "nothing staged for " + model_id);
  auto base_entry = latest_or_throw(cloud, model_id);
  auto base = ReferenceModel::from_artifact(artifact_or_throw(cloud, base_entry));

  std::vector<WeightedParams> staged;
  std::uint32_t top_version = base_entry.version;
  for (const auto& u : updates) {
    staged.push_back({ReferenceModel::from_artifact(u.artifact).params(), u.weight});
    top_version = std::max(top_version, u.version);
  }
  base.set_params(merge_models(std::move(staged)));

  ModelEntry merged = base_entry;
  merged.version = top_version + 1;
  merged.artifact_ref = model_id + "@v" + std::to_string(merged.version);
  merged.profiles.clear();
  cloud.artifacts.put(merged.artifact_ref, base.to_artifact());
  cloud.registry.register_model(merged);
  stage.clear(model_id);
  return merged;
}

std::uint64_t TaskAllocation::total() const noexcept {
  std::uint64_t sum = 0;
  for (const auto& [edge, share] : shares) sum += share;
  return sum;
}

std::uint64_t TaskAllocation::share_of(const std::string& edge_id) const {
  for (const auto& [edge, share] : shares) {
    if (edge == edge_id) return share;
  }
  throw Error(ErrorCode::InvalidArgument, "edge '" + edge_id + "' is not in the allocation");
}

TaskAllocation split_task(std::uint64_t total_units, std::span<const DeviceSpec> edges) {
  long double capacity = 0.0L;
  for (const auto& e : edges) {
    if (!(e.compute_capacity >= 0.0) || !std::isfinite(e.compute_capacity)) {
      throw Error(ErrorCode::InvalidArgument, "edge " + e.device_id + " has invalid capacity");
    }
    capacity += e.compute_capacity;
  }
  if (!(capacity > 0.0L)) throw Error(ErrorCode::NoCapacity, "no edge has compute capacity");

  const std::size_t n = edges.size();
  std::vector<std::uint64_t> share(n, 0);
  std::vector<long double> remainder(n, 0.0L);
  std::uint64_t assigned = 0;
  for (std::size_t i = 0; i < n; ++i) {
    long double quota = static_cast<long double>(total_units) * edges[i].compute_capacity / capacity;
    long double whole = std::floor(quota);
    share[i] = static_cast<std::uint64_t>(whole);
    remainder[i] = quota - whole;
    assigned += share[i];
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    // Remainders that differ only by rounding count as ties.
    if (std::fabs(remainder[a] - remainder[b]) > 1e-9L) return remainder[a] > remainder[b];
    return edges[a].device_id < edges[b].device_id;
  });
  // Rounding can leave the floors one unit over; undo from the smallest
  // remainders first.
  for (auto it = order.rbegin(); assigned > total_units && it != order.rend(); ++it) {
    if (share[*it] > 0) {
      --share[*it];
      --assigned;
    }
  }
  for (std::size_t k = 0; assigned < total_units; k = (k + 1) % n) {
    if (edges[order[k]].compute_capacity > 0.0) {
      ++share[order[k]];
      ++assigned;
    }
  }

  TaskAllocation out;
  for (std::size_t i = 0; i < n; ++i) out.shares.emplace_back(edges[i].device_id, share[i]);
  return out;
}

std::string_view to_string(Dataflow flow) noexcept {
  switch (flow) {
    case Dataflow::CloudInference: return "cloud_inference";
    case Dataflow::EdgeInference: return "edge_inference";
    case Dataflow::EdgeRetrain: return "edge_retrain";
  }
  return "?";
}

std::optional<Dataflow> parse_dataflow(std::string_view name) noexcept {
  if (name == "cloud_inference") return Dataflow::CloudInference;
  if (name == "edge_inference") return Dataflow::EdgeInference;
  if (name == "edge_retrain") return Dataflow::EdgeRetrain;
  return std::nullopt;
}

const DataflowFixture::Node& DataflowFixture::cloud() const {
  for (const auto& n : nodes) {
    if (n.is_cloud) return n;
  }
  throw Error(ErrorCode::FixtureParse, "fixture has no cloud node");
}

std::vector<const DataflowFixture::Node*> DataflowFixture::edges() const {
  std::vector<const Node*> out;
  for (const auto& n : nodes) {
    if (!n.is_cloud) out.push_back(&n);
  }
  return out;
}

const SimLink& DataflowFixture::link(const std::string& from, const std::string& to) const {
  for (const auto& l : links) {
    if (l.from == from && l.to == to) return l.link;
  }
  for (const auto& l : links) {
    if (l.from == to && l.to == from) return l.link;
  }
  throw Error(ErrorCode::FixtureParse, "fixture has no link between " + from + " and " + to);
}

DataflowFixture fixture_from_json(const nlohmann::json& doc) {
  DataflowFixture f;
  try {
    f.seed = doc.value("seed", std::uint64_t{1});
    for (const auto& n : doc.at("nodes")) {
      DataflowFixture::Node node;
      n.at("id").get_to(node.id);
      auto role = n.at("role").get<std::string>();
      if (role != "cloud" && role != "edge") {
        throw Error(ErrorCode::FixtureParse, "node " + node.id + " has unknown role '" + role + "'");
      }
      node.is_cloud = role == "cloud";
      node.compute_capacity = n.value("compute_capacity", 1.0);
      node.inference_ms = n.value("inference_ms", 0.0);
      node.retrain_ms = n.value("retrain_ms", 0.0);
      if (node.compute_capacity < 0.0 || node.inference_ms < 0.0 || node.retrain_ms < 0.0) {
        throw Error(ErrorCode::FixtureParse, "node " + node.id + " has a negative parameter");
      }
      f.nodes.push_back(std::move(node));
    }
    for (const auto& l : doc.value("links", nlohmann::json::array())) {
      f.links.push_back({l.at("from").get<std::string>(), l.at("to").get<std::string>(),
                         l.get<SimLink>()});
    }
    const auto& model = doc.at("model");
    f.model_id = model.value("id", f.model_id);
    model.at("size_bytes").get_to(f.model_size_bytes);
    const auto& workload = doc.at("workload");
    workload.at("items").get_to(f.items);
    workload.at("input_bytes").get_to(f.input_bytes);
    workload.at("result_bytes").get_to(f.result_bytes);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::FixtureParse, std::string("malformed fixture: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::FixtureParse) throw;
    throw Error(ErrorCode::FixtureParse, std::string("malformed fixture: ") + e.what());
  }
  if (f.nodes.empty()) throw Error(ErrorCode::FixtureParse, "fixture has no nodes");
  auto clouds = std::count_if(f.nodes.begin(), f.nodes.end(), [](const auto& n) { return n.is_cloud; });
  if (clouds != 1) throw Error(ErrorCode::FixtureParse, "fixture needs exactly one cloud node");
  if (f.edges().empty()) throw Error(ErrorCode::FixtureParse, "fixture has no edge nodes");
  for (const auto* e : f.edges()) f.link(e->id, f.cloud().id);
  return f;
}

DataflowFixture load_fixture(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::FixtureParse, "cannot open fixture " + path, {{"path", path}});
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::FixtureParse, "fixture " + path + ": " + e.what(), {{"path", path}});
  }
  return fixture_from_json(doc);
}

void to_json(nlohmann::json& j, const DataflowReport& r) {
  nlohmann::json shares = nlohmann::json::object();
  for (const auto& [edge, share] : r.allocation.shares) shares[edge] = share;
  j = {{"flow", std::string(to_string(r.flow))},
       {"total_latency_ms", r.total_latency_ms},
       {"bytes_moved", r.bytes_moved},
       {"raw_data_bytes", r.raw_data_bytes},
       {"result_bytes", r.result_bytes},
       {"model_bytes", r.model_bytes},
       {"transfers", r.transfers},
       {"retransmissions", r.retransmissions},
       {"allocation", shares}};
}

std::string format_report_table(const DataflowReport& r) {
  std::ostringstream out;
  auto row = [&](const std::string& key, const auto& value) {
    out << std::left << std::setw(18) << key << value << '\n';
  };
  row("flow", std::string(to_string(r.flow)));
  std::ostringstream latency;
  latency << std::fixed << std::setprecision(3) << r.total_latency_ms;
  row("total_latency_ms", latency.str());
  row("bytes_moved", r.bytes_moved);
  row("raw_data_bytes", r.raw_data_bytes);
  row("result_bytes", r.result_bytes);
  row("model_bytes", r.model_bytes);
  row("transfers", r.transfers);
  row("retransmissions", r.retransmissions);
  for (const auto& [edge, share] : r.allocation.shares) row("share " + edge, share);
  return out.str();
}

namespace {

enum class Traffic { RawData, Result, Model };

// Node-to-node messaging on top of the event loop, with byte accounting.
class Messenger {
 public:
  Messenger(Simulator& sim, SimNetwork& net, DataflowReport& report)
      : sim_(sim), net_(net), report_(report) {}

  void send(const SimLink& link, std::uint64_t bytes, Traffic kind, Simulator::Handler on_delivered) {
    auto outcome = net_.transfer(link, bytes);
    ++report_.transfers;
    report_.retransmissions += outcome.attempts - 1;
    report_.bytes_moved += bytes;
    switch (kind) {
      case Traffic::RawData: report_.raw_data_bytes += bytes; break;
      case Traffic::Result: report_.result_bytes += bytes; break;
      case Traffic::Model: report_.model_bytes += bytes; break;
    }
    sim_.schedule(outcome.elapsed_ms, std::move(on_delivered));
  }

 private:
  Simulator& sim_;
  SimNetwork& net_;
  DataflowReport& report_;
};

}  // namespace

DataflowReport run_dataflow(Dataflow flow, const DataflowFixture& fixture) {
  DataflowReport report;
  report.flow = flow;
  Simulator sim;
  SimNetwork net(fixture.seed);
  Messenger messenger(sim, net, report);
  const auto& cloud = fixture.cloud();
  const auto edges = fixture.edges();
  const auto& primary = *edges.front();

  switch (flow) {
    case Dataflow::CloudInference: {
      const auto& up = fixture.link(primary.id, cloud.id);
      const auto& down = fixture.link(cloud.id, primary.id);
      // One item in flight: upload, infer in the cloud, return the result.
      auto remaining = std::make_shared<std::uint64_t>(fixture.items);
      auto next = std::make_shared<std::function<void()>>();
      *next = [&, remaining, next] {
        if (*remaining == 0) return;
        --*remaining;
        messenger.send(up, fixture.input_bytes, Traffic::RawData, [&, next] {
          sim.schedule(cloud.inference_ms, [&, next] {
            messenger.send(down, fixture.result_bytes, Traffic::Result, [next] { (*next)(); });
          });
        });
      };
      sim.schedule(0.0, [next] { (*next)(); });
      sim.run();
      *next = nullptr;  // break the self-reference
      break;
    }
    case Dataflow::EdgeInference: {
      std::vector<DeviceSpec> specs;
      for (const auto* e : edges) {
        DeviceSpec d;
        d.device_id = e->id;
        d.compute_capacity = e->compute_capacity;
        specs.push_back(d);
      }
      report.allocation = split_task(fixture.items, specs);
      for (const auto* e : edges) {
        auto share = report.allocation.share_of(e->id);
        if (share == 0) continue;
        const auto& down = fixture.link(cloud.id, e->id);
        double work_ms = static_cast<double>(share) * e->inference_ms;
        messenger.send(down, fixture.model_size_bytes, Traffic::Model,
                       [&sim, work_ms] { sim.schedule(work_ms, [] {}); });
      }
      sim.run();
      break;
    }
    case Dataflow::EdgeRetrain: {
      const auto& up = fixture.link(primary.id, cloud.id);
      sim.schedule(primary.retrain_ms, [&] {
        messenger.send(up, fixture.model_size_bytes, Traffic::Model, [] {});
      });
      sim.run();
      break;
    }
  }
  report.total_latency_ms = sim.now_ms();
  return report;
}

}  // namespace openei
