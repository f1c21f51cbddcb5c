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

#include <random>
#include <thread>

#include "openei/artifact_store.hpp"
#include "openei/error.hpp"
#include "openei/reference_executor.hpp"
#include "openei/registry.hpp"
#include "openei/runtime.hpp"
#include "oracles/oracles.hpp"
#include "support.hpp"

using namespace openei;

namespace {

struct Node {
  Registry registry;
  ArtifactStore artifacts;

  void install(const std::string& id, const ReferenceModel& m) {
    auto e = testing::entry(id);
    artifacts.put(e.artifact_ref, m.to_artifact());
    registry.register_model(e);
  }
};

std::unique_ptr<Runtime> runtime_for(Node& node, RuntimeOptions o = {}) {
  auto rt = std::make_unique<Runtime>(node.registry, node.artifacts, o);
  rt->add_executor(std::make_shared<ReferenceExecutor>());
  return rt;
}

InferenceTask task(const std::string& id, Priority p, const std::string& model = "det") {
  InferenceTask t;
  t.task_id = id;
  t.model_id = model;
  t.package_id = "reference";
  t.input = encode_features(std::vector<double>{0.2, 0.7});
  t.priority = p;
  return t;
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::Io;
}

}  // namespace

TEST_CASE("runtime: realtime overtakes queued normal tasks") {
  Node node;
  node.install("det", testing::detector());
  RuntimeOptions o;
  o.start_paused = true;
  auto rt = runtime_for(node, o);
  auto h1 = rt->submit(task("n1", Priority::Normal));
  auto h2 = rt->submit(task("n2", Priority::Normal));
  auto h3 = rt->submit(task("r1", Priority::Realtime));
  rt->resume();
  h1.get();
  h2.get();
  CHECK(h3.get().dispatch_index == 0);
  CHECK(rt->dispatch_log() == std::vector<std::string>{"r1", "n1", "n2"});
}

TEST_CASE("runtime: realtime waits only for the running task") {
  Node node;
  auto slow = testing::detector();
  slow.delay_ms = 40;
  node.install("slow", slow);
  node.install("det", testing::detector());
  auto rt = runtime_for(node);
  auto busy = rt->submit(task("busy", Priority::Normal, "slow"));
  while (rt->telemetry().dispatched[static_cast<int>(Priority::Normal)] == 0) {
    std::this_thread::sleep_for(std::chrono::milliseconds(1));
  }
  std::vector<TaskHandle> handles;
  for (int i = 0; i < 10; ++i) handles.push_back(rt->submit(task("n" + std::to_string(i), Priority::Normal)));
  handles.push_back(rt->submit(task("rt-a", Priority::Realtime)));
  handles.push_back(rt->submit(task("rt-b", Priority::Realtime)));
  for (auto& h : handles) h.get();
  busy.get();
  auto log = rt->dispatch_log();
  REQUIRE(log.size() == 13);
  CHECK(log[0] == "busy");
  CHECK(log[1] == "rt-a");
  CHECK(log[2] == "rt-b");
  CHECK(log[3] == "n0");
  CHECK(log[12] == "n9");
}

TEST_CASE("runtime: a single task on an idle runtime runs at once") {
  Node node;
  node.install("det", testing::detector());
  auto rt = runtime_for(node);
  auto r = rt->submit(task("", Priority::Low)).get();
  CHECK(r.output.label == "clear");
  CHECK(r.dispatch_index == 0);
  CHECK_FALSE(r.task_id.empty());
}

TEST_CASE("runtime: submission errors") {
  Node node;
  node.install("det", testing::detector());
  RuntimeOptions o;
  o.workers = 0;
  o.queue_capacity = 2;
  auto rt = runtime_for(node, o);
  auto bad = task("x", Priority::Normal);
  bad.package_id = "tensorflow";
  CHECK(code_of([&] { rt->submit(bad); }) == ErrorCode::UnknownPackage);
  rt->submit(task("a", Priority::Normal));
  rt->submit(task("b", Priority::Normal));
  CHECK(code_of([&] { rt->submit(task("c", Priority::Normal)); }) == ErrorCode::QueueFull);
  rt->shutdown(true);
  CHECK(code_of([&] { rt->submit(task("d", Priority::Normal)); }) == ErrorCode::ShuttingDown);
}

TEST_CASE("runtime: shutdown drains queued work") {
  Node node;
  node.install("det", testing::detector());
  RuntimeOptions o;
  o.start_paused = true;
  auto rt = runtime_for(node, o);
  auto h = rt->submit(task("queued", Priority::Normal));
  rt->shutdown(true);
  REQUIRE(h.ready());
  CHECK(h.get().output.label == "clear");
}

TEST_CASE("runtime: shutdown without drain fails queued work") {
  Node node;
  node.install("det", testing::detector());
  RuntimeOptions o;
  o.workers = 0;
  auto rt = runtime_for(node, o);
  auto h = rt->submit(task("queued", Priority::Normal));
  rt->shutdown(false);
  CHECK(code_of([&] { h.get(); }) == ErrorCode::ShuttingDown);
}

TEST_CASE("runtime: inference") {
  Node node;
  node.install("det", testing::detector());
  auto rt = runtime_for(node);
  auto w = testing::detector_workload(10);
  for (const auto& s : w.samples) {
    auto a = rt->run_inference("det", "reference", s.input);
    CHECK(a.label == s.label);
    CHECK(rt->run_inference("det", "reference", s.input) == a);
  }
  CHECK(code_of([&] { rt->run_inference("ghost", "reference", w.samples[0].input); }) ==
        ErrorCode::UnknownModel);
  CHECK(code_of([&] { rt->run_inference("det", "onnx", w.samples[0].input); }) ==
        ErrorCode::UnknownPackage);

  node.install("gone", testing::detector());
  node.artifacts.remove("gone@v1");
  CHECK(code_of([&] { rt->run_inference("gone", "reference", w.samples[0].input); }) ==
        ErrorCode::ArtifactMissing);
}

TEST_CASE("runtime: task failures surface through the handle") {
  Node node;
  node.install("det", testing::detector());
  auto rt = runtime_for(node);
  auto t = task("bad-input", Priority::High);
  t.input = "odd";  // not a multiple of 8 bytes
  auto h = rt->submit(t);
  CHECK(code_of([&] { h.get(); }) == ErrorCode::ExecutorFailure);
  CHECK(rt->telemetry().failed == 1);
}

TEST_CASE("runtime: deadlines") {
  Node node;
  auto slow = testing::detector();
  slow.delay_ms = 10;
  node.install("slow", slow);
  node.install("det", testing::detector());
  auto rt = runtime_for(node);
  auto t = task("late", Priority::Realtime, "slow");
  t.deadline_ms = 1.0;
  auto r = rt->submit(t).get();
  CHECK(r.deadline_missed);
  CHECK(r.run_ms >= 9.0);
  auto ok = task("fine", Priority::Normal);
  ok.deadline_ms = 5000.0;
  CHECK_FALSE(rt->submit(ok).get().deadline_missed);
  auto tel = rt->telemetry();
  CHECK(tel.deadline_misses[static_cast<int>(Priority::Realtime)] == 1);
  CHECK(tel.deadline_misses[static_cast<int>(Priority::Normal)] == 0);
}

TEST_CASE("runtime: retraining follows the gradient-descent oracle") {
  Node node;
  // start from w = (0, 0), b = 0; data from w* = (2, -1), b* = 0.5
  node.install("reg", ReferenceModel::linear_regressor({0.0, 0.0}, 0.0));
  auto rt = runtime_for(node);
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<std::vector<double>> xs;
  std::vector<double> ts;
  std::vector<std::pair<std::vector<double>, std::string>> rows;
  for (int i = 0; i < 40; ++i) {
    std::vector<double> x{u(rng), u(rng)};
    double t = 2 * x[0] - x[1] + 0.5;
    xs.push_back(x);
    ts.push_back(t);
    std::ostringstream label;
    label.precision(17);
    label << t;
    rows.push_back({x, label.str()});
  }
  auto data = testing::workload(rows, "train");
  RetrainConfig cfg;
  cfg.passes = 25;
  cfg.learning_rate = 0.3;
  auto result = rt->retrain("reg", "reference", data, cfg);
  auto expect = oracle::regression_losses({0.0, 0.0}, 0.0, xs, ts, 0.3, 25);
  REQUIRE(result.loss_curve.size() == expect.size());
  for (std::size_t i = 0; i < expect.size(); ++i) {
    CHECK(result.loss_curve[i] == doctest::Approx(expect[i]).epsilon(1e-9));
    if (i > 0) CHECK(result.loss_curve[i] < result.loss_curve[i - 1]);
  }
  CHECK(result.entry.version == 2);
  CHECK(result.entry.profiles.empty());
  CHECK(node.registry.get("reg")->version == 2);
  CHECK(result.sample_count == 40);

  cfg.passes = 0;
  CHECK(code_of([&] { rt->retrain("reg", "reference", data, cfg); }) == ErrorCode::InvalidArgument);

  node.install("fit", ReferenceModel::linear_regressor({2.0, -1.0}, 0.5));
  cfg.passes = 3;
  auto fit = rt->retrain("fit", "reference", data, cfg);
  CHECK(fit.loss_curve.back() - fit.loss_curve.front() <= 1e-15);
}

TEST_CASE("runtime: manual dispatch matches the reference queue") {
  std::mt19937 rng(8);
  Node node;
  node.install("det", testing::detector());
  for (int round = 0; round < 20; ++round) {
    RuntimeOptions o;
    o.workers = 0;
    auto rt = runtime_for(node, o);
    std::vector<oracle::Step> script;
    std::vector<TaskHandle> handles;
    for (int i = 0; i < 60; ++i) {
      if (rng() % 3 == 0) {
        script.push_back({true, {}});
        rt->run_next();
      } else {
        auto p = static_cast<Priority>(rng() % 4);
        std::string id = "t" + std::to_string(i);
        script.push_back({false, {id, static_cast<int>(p)}});
        handles.push_back(rt->submit(task(id, p)));
      }
    }
    while (rt->run_next()) {
    }
    CHECK(rt->dispatch_log() == oracle::run_script(script));
  }
}

TEST_CASE("PriorityFifo agrees with the list-scan reference") {
  std::mt19937 rng(21);
  for (int round = 0; round < 50; ++round) {
    PriorityFifo<std::string> q;
    std::vector<oracle::Job> jobs;
    for (int i = 0; i < 40; ++i) {
      int p = static_cast<int>(rng() % 4);
      q.push(static_cast<Priority>(p), "j" + std::to_string(i));
      jobs.push_back({"j" + std::to_string(i), p});
    }
    std::vector<std::string> got;
    q.drain([&](std::string s) { got.push_back(std::move(s)); });
    CHECK(got == oracle::dispatch_order(jobs));
  }
}

TEST_CASE("priority names") {
  CHECK(parse_priority("realtime") == Priority::Realtime);
  CHECK(parse_priority("low") == Priority::Low);
  CHECK_FALSE(parse_priority("urgent").has_value());
  CHECK(to_string(Priority::High) == "high");
}
