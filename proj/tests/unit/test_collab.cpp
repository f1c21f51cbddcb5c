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

#include <doctest.h>

#include <algorithm>
#include <limits>
#include <random>

#include "openei/collab.hpp"
#include "openei/error.hpp"
#include "openei/reference_executor.hpp"
#include "oracles/oracles.hpp"
#include "support.hpp"

using namespace openei;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::Io;
}

SimLink sim_link(double latency_ms, double bandwidth, double loss = 0.0) {
  SimLink l;
  l.latency_ms = latency_ms;
  l.bandwidth_bytes_per_s = bandwidth;
  l.loss_rate = loss;
  return l;
}

struct Site {
  std::string id;
  Registry registry;
  ArtifactStore artifacts;
  NodeStore store() { return {id, registry, artifacts}; }
};

void install(Site& site, const std::string& model, std::uint32_t version, const ReferenceModel& m) {
  auto e = testing::entry(model);
  e.version = version;
  e.artifact_ref = model + "@v" + std::to_string(version);
  site.artifacts.put(e.artifact_ref, m.to_artifact());
  site.registry.upsert(e);
}

std::vector<DeviceSpec> edges(const std::vector<double>& caps) {
  std::vector<DeviceSpec> out;
  for (std::size_t i = 0; i < caps.size(); ++i) {
    auto d = testing::device("edge-" + std::to_string(i));
    d.compute_capacity = caps[i];
    out.push_back(d);
  }
  return out;
}

std::vector<std::uint64_t> shares(const TaskAllocation& a) {
  std::vector<std::uint64_t> out;
  for (const auto& [id, s] : a.shares) out.push_back(s);
  return out;
}

nlohmann::json base_fixture() {
  return nlohmann::json::parse(R"({
    "seed": 3,
    "nodes": [
      {"id": "cloud", "role": "cloud", "inference_ms": 4},
      {"id": "e1", "role": "edge", "compute_capacity": 1, "inference_ms": 10, "retrain_ms": 700}
    ],
    "links": [{"from": "e1", "to": "cloud", "latency_ms": 0, "bandwidth_bytes_per_s": "inf"}],
    "model": {"id": "det", "size_bytes": 1000},
    "workload": {"items": 25, "input_bytes": 5000, "result_bytes": 10}
  })");
}

}  // namespace

TEST_CASE("links: transfer time is size over bandwidth plus latency") {
  auto vgg = sim_link(50, 10.0 * 1024 * 1024);
  CHECK(vgg.transfer_time_ms(524288000) == doctest::Approx(50050.0));
  auto decimal = sim_link(50, 1e7);
  CHECK(decimal.transfer_time_ms(524288000) == doctest::Approx(52478.8));
  auto free = sim_link(0, std::numeric_limits<double>::infinity());
  CHECK(free.transfer_time_ms(1ull << 40) == 0.0);
  CHECK(code_of([] { sim_link(-1, 1).validate(); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([] { sim_link(0, 0).validate(); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([] { sim_link(0, 1, 1.5).validate(); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("simulator runs events in time then scheduling order") {
  Simulator sim;
  std::vector<int> order;
  sim.schedule(5, [&] { order.push_back(2); });
  sim.schedule(1, [&] {
    order.push_back(1);
    sim.schedule(4, [&] { order.push_back(3); });  // also at t=5, scheduled later
  });
  sim.schedule(0, [&] { order.push_back(0); });
  sim.run();
  CHECK(order == std::vector<int>{0, 1, 2, 3});
  CHECK(sim.now_ms() == 5.0);
}

TEST_CASE("lossy network retries up to its budget") {
  SimNetwork net(1);
  CHECK(code_of([&] { net.transfer(sim_link(1, 1000, 1.0), 10); }) == ErrorCode::SimulatedDrop);
  auto ok = net.transfer(sim_link(1, 1000, 0.0), 10);
  CHECK(ok.attempts == 1);
  CHECK(ok.elapsed_ms == doctest::Approx(11.0));

  // same seed, same outcomes
  SimNetwork a(42), b(42);
  for (int i = 0; i < 50; ++i) {
    std::uint32_t ta = 0, tb = 0;
    try { ta = a.transfer(sim_link(1, 1000, 0.5), 10).attempts; } catch (const Error&) { ta = 99; }
    try { tb = b.transfer(sim_link(1, 1000, 0.5), 10).attempts; } catch (const Error&) { tb = 99; }
    CHECK(ta == tb);
  }
}

TEST_CASE("model sync copies entry and artifact") {
  Site cloud{"cloud"}, edge{"edge"};
  install(cloud, "det", 3, testing::detector());
  SimNetwork net;
  auto c = cloud.store();
  auto e = edge.store();
  auto report = sync_model(c, e, "det", sim_link(0, std::numeric_limits<double>::infinity()), net);
  CHECK(report.version == 3);
  CHECK(report.transfer_time_ms == 0.0);
  CHECK(edge.registry.history() == cloud.registry.history());
  CHECK(edge.artifacts.get("det@v3") == cloud.artifacts.get("det@v3"));
  CHECK(code_of([&] { sync_model(c, e, "ghost", sim_link(0, 1), net); }) == ErrorCode::UnknownModel);
  cloud.artifacts.remove("det@v3");
  CHECK(code_of([&] { sync_model(c, e, "det", sim_link(0, 1), net); }) == ErrorCode::ArtifactMissing);
}

TEST_CASE("retrained uploads are staged per edge") {
  Site cloud{"cloud"}, e1{"e1"}, e2{"e2"};
  install(cloud, "det", 1, testing::detector());
  install(e1, "det", 2, testing::detector());
  install(e2, "det", 2, testing::detector());
  MergeStage stage;
  SimNetwork net;
  auto c = cloud.store();
  auto up = sim_link(5, 1e6);
  upload_retrained(e1.store(), c, stage, "det", 2, {"e1", 10}, up, net);
  upload_retrained(e2.store(), c, stage, "det", 2, {"e2", 30}, up, net);
  auto staged = stage.staged("det");
  REQUIRE(staged.size() == 2);
  CHECK(staged[0].weight.edge_id == "e1");
  CHECK(staged[1].weight.edge_id == "e2");

  install(cloud, "det", 2, testing::detector());
  Site behind{"e3"};
  install(behind, "det", 1, testing::detector());
  CHECK(code_of([&] { upload_retrained(behind.store(), c, stage, "det", 1, {"e3", 1}, up, net); }) ==
        ErrorCode::StaleVersion);
  install(e1, "det", 3, testing::detector());
  CHECK(code_of([&] { upload_retrained(e1.store(), c, stage, "det", 3, {"e1", 0}, up, net); }) ==
        ErrorCode::InvalidArgument);
}

TEST_CASE("weighted merge") {
  ModelParams a{{1}, {1.0}}, b{{1}, {3.0}};
  auto m = merge_models({{a, {"e1", 1}}, {b, {"e2", 3}}});
  CHECK(m.values == std::vector<double>{2.5});

  ModelParams x{{2, 2}, {0.1, 0.2, 0.3, 0.7}};
  CHECK(merge_models({{x, {"e1", 7}}, {x, {"e2", 13}}}).values == x.values);

  ModelParams two{{2}, {1, 2}}, three{{3}, {1, 2, 3}};
  CHECK(code_of([&] { merge_models({{two, {"a", 1}}, {three, {"b", 1}}}); }) == ErrorCode::ShapeMismatch);
  CHECK(code_of([] { merge_models({}); }) == ErrorCode::EmptyStage);

  std::mt19937 rng(12);
  std::vector<WeightedParams> in;
  for (int i = 0; i < 6; ++i) {
    ModelParams p{{4}, {}};
    for (int k = 0; k < 4; ++k) p.values.push_back(std::uniform_real_distribution<double>(-3, 3)(rng));
    in.push_back({p, {"edge-" + std::to_string(i), 1 + rng() % 50}});
  }
  auto ref = merge_models(in);
  for (int i = 0; i < 20; ++i) {
    std::shuffle(in.begin(), in.end(), rng);
    CHECK(merge_models(in).values == ref.values);
  }
}

TEST_CASE("merge_staged registers a new cloud version") {
  Site cloud{"cloud"}, e1{"e1"}, e2{"e2"};
  install(cloud, "det", 1, testing::detector());
  auto left = testing::detector();
  left.weights = {0, 0, 0, 0};
  auto right = testing::detector();
  right.weights = {4, 4, 4, 4};
  install(e1, "det", 2, left);
  install(e2, "det", 2, right);
  MergeStage stage;
  SimNetwork net;
  auto c = cloud.store();
  upload_retrained(e1.store(), c, stage, "det", 2, {"e1", 1}, sim_link(0, 1e9), net);
  upload_retrained(e2.store(), c, stage, "det", 2, {"e2", 3}, sim_link(0, 1e9), net);
  auto merged = merge_staged(c, stage, "det");
  CHECK(merged.version == 3);
  CHECK(stage.staged("det").empty());
  auto model = ReferenceModel::from_artifact(*cloud.artifacts.get(merged.artifact_ref));
  CHECK(model.weights == std::vector<double>{3, 3, 3, 3});
  CHECK(model.bias == std::vector<double>{0, 0});  // both agreed
  CHECK(code_of([&] { merge_staged(c, stage, "det"); }) == ErrorCode::EmptyStage);
}

TEST_CASE("split_task examples") {
  CHECK(shares(split_task(10, edges({1, 1}))) == std::vector<std::uint64_t>{5, 5});
  CHECK(shares(split_task(10, edges({3, 1}))) == std::vector<std::uint64_t>{8, 2});
  auto seven = split_task(7, edges({2, 3, 2}));
  CHECK(seven.total() == 7);
  std::string why;
  CHECK(oracle::largest_remainder_ok(7, {2, 3, 2}, {"edge-0", "edge-1", "edge-2"}, shares(seven), &why));
  CHECK(shares(split_task(3, edges({0, 1, 0}))) == std::vector<std::uint64_t>{0, 3, 0});
  CHECK(split_task(0, edges({1, 2})).total() == 0);
  CHECK(code_of([] { split_task(5, edges({0, 0})); }) == ErrorCode::NoCapacity);
  CHECK(code_of([] { split_task(5, {}); }) == ErrorCode::NoCapacity);
  CHECK(code_of([] { split_task(5, edges({1, -1})); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("split_task agrees with the largest-remainder checker") {
  std::mt19937 rng(77);
  for (int i = 0; i < 300; ++i) {
    std::size_t n = 1 + rng() % 8;
    std::vector<std::uint64_t> caps(n);
    std::vector<double> dcaps(n);
    std::vector<std::string> ids;
    for (std::size_t k = 0; k < n; ++k) {
      caps[k] = rng() % 6;
      dcaps[k] = static_cast<double>(caps[k]);
      ids.push_back("edge-" + std::to_string(k));
    }
    if (std::all_of(caps.begin(), caps.end(), [](auto c) { return c == 0; })) caps[0] = dcaps[0] = 1;
    std::uint64_t total = rng() % 1000;
    auto got = shares(split_task(total, edges(dcaps)));
    std::string why;
    CHECK_MESSAGE(oracle::largest_remainder_ok(total, caps, ids, got, &why), why);
  }
}

TEST_CASE("fixture parsing") {
  auto f = fixture_from_json(base_fixture());
  CHECK(f.cloud().id == "cloud");
  CHECK(f.edges().size() == 1);
  CHECK(f.link("cloud", "e1").latency_ms == 0.0);

  auto no_nodes = base_fixture();
  no_nodes["nodes"] = nlohmann::json::array();
  CHECK(code_of([&] { fixture_from_json(no_nodes); }) == ErrorCode::FixtureParse);
  auto no_link = base_fixture();
  no_link["links"] = nlohmann::json::array();
  CHECK(code_of([&] { fixture_from_json(no_link); }) == ErrorCode::FixtureParse);
  auto no_edge = base_fixture();
  no_edge["nodes"].erase(1);
  CHECK(code_of([&] { fixture_from_json(no_edge); }) == ErrorCode::FixtureParse);
  auto bad_role = base_fixture();
  bad_role["nodes"][1]["role"] = "fog";
  CHECK(code_of([&] { fixture_from_json(bad_role); }) == ErrorCode::FixtureParse);
  CHECK(code_of([] { load_fixture("/nonexistent/fixture.json"); }) == ErrorCode::FixtureParse);
}

TEST_CASE("dataflows: byte accounting and timing") {
  auto f = fixture_from_json(base_fixture());

  auto cloud = run_dataflow(Dataflow::CloudInference, f);
  CHECK(cloud.total_latency_ms == doctest::Approx(25 * 4.0));  // free link: cloud compute only
  CHECK(cloud.raw_data_bytes == 25 * 5000);
  CHECK(cloud.result_bytes == 25 * 10);
  CHECK(cloud.model_bytes == 0);
  CHECK(cloud.transfers == 50);

  auto edge = run_dataflow(Dataflow::EdgeInference, f);
  CHECK(edge.raw_data_bytes == 0);
  CHECK(edge.model_bytes == 1000);
  CHECK(edge.total_latency_ms == doctest::Approx(25 * 10.0));
  CHECK(edge.allocation.share_of("e1") == 25);

  auto retrain = run_dataflow(Dataflow::EdgeRetrain, f);
  CHECK(retrain.bytes_moved == 1000);
  CHECK(retrain.raw_data_bytes == 0);
  CHECK(retrain.total_latency_ms == doctest::Approx(700.0));
}

TEST_CASE("dataflows: slow link favors on-edge inference") {
  auto doc = base_fixture();
  doc["links"][0] = {{"from", "e1"}, {"to", "cloud"}, {"latency_ms", 30}, {"bandwidth_bytes_per_s", 1e5}};
  auto f = fixture_from_json(doc);
  auto cloud = run_dataflow(Dataflow::CloudInference, f);
  auto edge = run_dataflow(Dataflow::EdgeInference, f);
  // analytic: 25 * ((5000/1e5)s + 30 + 4 + (10/1e5)s + 30) vs 1000/1e5 s + 30 + 25*10
  CHECK(cloud.total_latency_ms == doctest::Approx(25 * (50 + 30 + 4 + 0.1 + 30)));
  CHECK(edge.total_latency_ms == doctest::Approx(10 + 30 + 250));
  CHECK(edge.total_latency_ms < cloud.total_latency_ms);
}

TEST_CASE("dataflow names and report output") {
  CHECK(parse_dataflow("edge_retrain") == Dataflow::EdgeRetrain);
  CHECK_FALSE(parse_dataflow("flow4").has_value());
  auto r = run_dataflow(Dataflow::EdgeInference, fixture_from_json(base_fixture()));
  nlohmann::json j = r;
  CHECK(j.at("flow") == "edge_inference");
  CHECK(j.at("allocation").at("e1") == 25);
  CHECK(format_report_table(r).find("raw_data_bytes") != std::string::npos);
}
