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

#include "openei/runtime.hpp"

#include "openei/error.hpp"

namespace openei {

using Clock = std::chrono::steady_clock;

std::string_view to_string(Priority priority) noexcept {
  switch (priority) {
    case Priority::Low: return "low";
    case Priority::Normal: return "normal";
    case Priority::High: return "high";
    case Priority::Realtime: return "realtime";
  }
  return "?";
}

std::optional<Priority> parse_priority(std::string_view name) noexcept {
  if (name == "low") return Priority::Low;
  if (name == "normal") return Priority::Normal;
  if (name == "high") return Priority::High;
  if (name == "realtime") return Priority::Realtime;
  return std::nullopt;
}

void to_json(nlohmann::json& j, const Telemetry& t) {
  nlohmann::json depth, dispatched, misses;
  for (std::size_t p = 0; p < kPriorityLevels; ++p) {
    auto name = std::string(to_string(static_cast<Priority>(p)));
    depth[name] = t.queue_depth[p];
    dispatched[name] = t.dispatched[p];
    misses[name] = t.deadline_misses[p];
  }
  j = {{"queue_depth", depth},
       {"dispatched", dispatched},
       {"deadline_misses", misses},
       {"failed", t.failed},
       {"inference_calls", t.inference_calls},
       {"inference_ms_mean",
        t.inference_calls ? t.inference_ms_total / static_cast<double>(t.inference_calls) : 0.0}};
}

Runtime::Runtime(Registry& registry, ArtifactStore& artifacts, RuntimeOptions options)
    : registry_(registry), artifacts_(artifacts), options_(options), paused_(options.start_paused) {
  for (std::size_t i = 0; i < options_.workers; ++i) {
    workers_.emplace_back([this] { worker_loop(); });
  }
}

Runtime::~Runtime() { shutdown(true); }

void Runtime::add_executor(std::shared_ptr<Executor> executor) {
  if (!executor) throw Error(ErrorCode::InvalidArgument, "null executor");
  auto pkg = std::make_unique<Package>();
  auto id = executor->package_id();
  pkg->executor = std::move(executor);
  std::lock_guard lock(packages_mutex_);
  packages_[id] = std::move(pkg);
}

bool Runtime::has_package(const std::string& package_id) const {
  std::lock_guard lock(packages_mutex_);
  return packages_.contains(package_id);
}

Runtime::Package& Runtime::package(const std::string& package_id) const {
  std::lock_guard lock(packages_mutex_);
  auto it = packages_.find(package_id);
  if (it == packages_.end()) {
    throw Error(ErrorCode::UnknownPackage, "no executor registered for package '" + package_id + "'",
                {{"package_id", package_id}});
  }
  return *it->second;
}

TaskHandle Runtime::submit(InferenceTask task) {
  package(task.package_id);  // UnknownPackage
  std::unique_lock lock(mutex_);
  if (!accepting_) throw Error(ErrorCode::ShuttingDown, "runtime is shutting down");
  if (queue_.size() >= options_.queue_capacity) {
    throw Error(ErrorCode::QueueFull,
                "task queue is full (" + std::to_string(options_.queue_capacity) + ")",
                {{"capacity", options_.queue_capacity}});
  }
  if (task.task_id.empty()) {
    task.task_id = "task-" + std::to_string(submitted_);
  }
  ++submitted_;
  Queued item{std::move(task), Clock::now(), {}};
  TaskHandle handle(item.task.task_id, item.promise.get_future());
  auto priority = item.task.priority;
  queue_.push(priority, std::move(item));
  lock.unlock();
  cv_.notify_one();
  return handle;
}

InferenceOutput Runtime::run_inference(const std::string& model_id, const std::string& package_id,
                                       const Payload& input) {
  auto& pkg = package(package_id);
  auto entry = registry_.get(model_id);
  if (!entry) {
    throw Error(ErrorCode::UnknownModel, "unknown model '" + model_id + "'", {{"model_id", model_id}});
  }
  if (entry->package_id != package_id) {
    throw Error(ErrorCode::UnknownModel,
                "model '" + model_id + "' is not registered for package '" + package_id + "'",
                {{"model_id", model_id}, {"package_id", package_id}});
  }
  InferenceOutput output;
  double elapsed_ms = 0.0;
  {
    std::lock_guard exec_lock(pkg.mutex);
    auto bytes = artifacts_.get(entry->artifact_ref);
    if (!bytes) {
      pkg.loaded_refs.erase(model_id);
      throw Error(ErrorCode::ArtifactMissing,
                  "artifact '" + entry->artifact_ref + "' for model '" + model_id + "' is missing",
                  {{"model_id", model_id}, {"artifact_ref", entry->artifact_ref}});
    }
    try {
      auto loaded = pkg.loaded_refs.find(model_id);
      if (loaded == pkg.loaded_refs.end() || loaded->second != entry->artifact_ref ||
          !pkg.executor->loaded(model_id)) {
        pkg.executor->load(model_id, *bytes);
        pkg.loaded_refs[model_id] = entry->artifact_ref;
      }
      auto start = Clock::now();
      output = pkg.executor->infer(model_id, input);
      elapsed_ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
    } catch (const Error&) {
      throw;
    } catch (const std::exception& e) {
      throw Error(ErrorCode::ExecutorFailure, std::string("executor failed: ") + e.what(),
                  {{"model_id", model_id}, {"package_id", package_id}});
    }
  }
  std::lock_guard lock(mutex_);
  ++stats_.inference_calls;
  stats_.inference_ms_total += elapsed_ms;
  return output;
}

RetrainResult Runtime::retrain(const std::string& model_id, const std::string& package_id,
                               const Workload& dataset, const RetrainConfig& config) {
  config.validate();
  auto& pkg = package(package_id);
  if (!pkg.executor->supports_retrain()) {
    throw Error(ErrorCode::RetrainUnsupported, "package '" + package_id + "' cannot retrain");
  }
  if (dataset.samples.empty()) throw Error(ErrorCode::EmptyDataset, "retraining dataset is empty");
  auto entry = registry_.get(model_id);
  if (!entry || entry->package_id != package_id) {
    throw Error(ErrorCode::UnknownModel,
                "model '" + model_id + "' is not registered for package '" + package_id + "'",
                {{"model_id", model_id}});
  }
  auto bytes = artifacts_.get(entry->artifact_ref);
  if (!bytes) {
    throw Error(ErrorCode::ArtifactMissing, "artifact '" + entry->artifact_ref + "' is missing",
                {{"artifact_ref", entry->artifact_ref}});
  }
  RetrainOutcome outcome;
  {
    std::lock_guard exec_lock(pkg.mutex);
    outcome = pkg.executor->retrain(*bytes, dataset, config);
  }
  RetrainResult result;
  result.entry = *entry;
  result.entry.version = entry->version + 1;
  result.entry.artifact_ref = model_id + "@v" + std::to_string(result.entry.version);
  result.entry.profiles.clear();  // measured on the old parameters
  result.loss_curve = std::move(outcome.loss_curve);
  result.sample_count = config.sample_count ? config.sample_count : dataset.samples.size();
  artifacts_.put(result.entry.artifact_ref, outcome.artifact);
  registry_.register_model(result.entry);
  return result;
}

void Runtime::pause() {
  std::lock_guard lock(mutex_);
  paused_ = true;
}

void Runtime::resume() {
  {
    std::lock_guard lock(mutex_);
    paused_ = false;
  }
  cv_.notify_all();
}

std::uint64_t Runtime::begin_dispatch_locked(const Queued& item) {
  ++in_flight_;
  ++stats_.dispatched[static_cast<std::size_t>(item.task.priority)];
  dispatch_log_.push_back(item.task.task_id);
  while (dispatch_log_.size() > options_.dispatch_log_capacity) dispatch_log_.pop_front();
  return next_dispatch_++;
}

void Runtime::dispatch(Queued item, std::uint64_t index) {
  auto start = Clock::now();
  TaskResult result;
  result.dispatch_index = index;
  result.task_id = item.task.task_id;
  result.priority = item.task.priority;
  result.queue_ms = std::chrono::duration<double, std::milli>(start - item.enqueued).count();
  try {
    result.output = run_inference(item.task.model_id, item.task.package_id, item.task.input);
    auto done = Clock::now();
    result.run_ms = std::chrono::duration<double, std::milli>(done - start).count();
    double total_ms = std::chrono::duration<double, std::milli>(done - item.enqueued).count();
    result.deadline_missed = item.task.deadline_ms && total_ms > *item.task.deadline_ms;
  } catch (...) {
    {
      std::lock_guard lock(mutex_);
      ++stats_.failed;
    }
    item.promise.set_exception(std::current_exception());
    return;
  }
  if (result.deadline_missed) {
    std::lock_guard lock(mutex_);
    ++stats_.deadline_misses[static_cast<std::size_t>(result.priority)];
  }
  item.promise.set_value(std::move(result));
}

bool Runtime::run_next() {
  std::unique_lock lock(mutex_);
  auto item = queue_.pop();
  if (!item) return false;
  auto index = begin_dispatch_locked(*item);
  lock.unlock();
  dispatch(std::move(*item), index);
  lock.lock();
  --in_flight_;
  idle_cv_.notify_all();
  return true;
}

void Runtime::worker_loop() {
  std::unique_lock lock(mutex_);
  for (;;) {
    cv_.wait(lock, [this] { return stopping_ || (!paused_ && !queue_.empty()); });
    if (queue_.empty() || (paused_ && !stopping_)) {
      if (stopping_) return;
      continue;
    }
    auto item = queue_.pop();
    auto index = begin_dispatch_locked(*item);
    lock.unlock();
    dispatch(std::move(*item), index);
    lock.lock();
    --in_flight_;
    idle_cv_.notify_all();
  }
}

void Runtime::shutdown(bool drain) {
  std::unique_lock lock(mutex_);
  accepting_ = false;
  if (!drain) {
    queue_.drain([](Queued q) {
      q.promise.set_exception(
          std::make_exception_ptr(Error(ErrorCode::ShuttingDown, "runtime shut down")));
    });
  }
  paused_ = false;
  lock.unlock();
  cv_.notify_all();
  if (workers_.empty()) {
    while (run_next()) {
    }
  }
  lock.lock();
  idle_cv_.wait(lock, [this] { return queue_.empty() && in_flight_ == 0; });
  stopping_ = true;
  lock.unlock();
  cv_.notify_all();
  for (auto& w : workers_) {
    if (w.joinable()) w.join();
  }
  workers_.clear();
}

Telemetry Runtime::telemetry() const {
  std::lock_guard lock(mutex_);
  Telemetry t = stats_;
  for (std::size_t p = 0; p < kPriorityLevels; ++p) {
    t.queue_depth[p] = queue_.size(static_cast<Priority>(p));
  }
  return t;
}

std::vector<std::string> Runtime::dispatch_log() const {
  std::lock_guard lock(mutex_);
  return {dispatch_log_.begin(), dispatch_log_.end()};
}

}  // namespace openei
