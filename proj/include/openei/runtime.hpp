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

#include <array>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "openei/artifact_store.hpp"
#include "openei/executor.hpp"
#include "openei/registry.hpp"

namespace openei {

/// realtime > high > normal > low
enum class Priority : int { Low = 0, Normal = 1, High = 2, Realtime = 3 };

inline constexpr std::size_t kPriorityLevels = 4;

std::string_view to_string(Priority priority) noexcept;
std::optional<Priority> parse_priority(std::string_view name) noexcept;

struct InferenceTask {
  std::string task_id;
  std::string model_id;
  std::string package_id;
  Payload input;
  Priority priority = Priority::Normal;
  std::optional<double> deadline_ms;  // measured from enqueue to completion
};

struct TaskResult {
  std::string task_id;
  Priority priority = Priority::Normal;
  InferenceOutput output;
  bool deadline_missed = false;
  double queue_ms = 0.0;
  double run_ms = 0.0;
  std::uint64_t dispatch_index = 0;  // 0-based position in dispatch order
};

/// Single-use completion handle.
class TaskHandle {
 public:
  TaskHandle() = default;
  TaskHandle(std::string task_id, std::future<TaskResult> future)
      : task_id_(std::move(task_id)), future_(std::move(future)) {}

  const std::string& task_id() const noexcept { return task_id_; }
  /// Blocks; rethrows the task's error.
  TaskResult get() { return future_.get(); }
  bool ready() const {
    return future_.wait_for(std::chrono::seconds(0)) == std::future_status::ready;
  }
  template <typename Rep, typename Period>
  bool wait_for(std::chrono::duration<Rep, Period> timeout) const {
    return future_.wait_for(timeout) == std::future_status::ready;
  }

 private:
  std::string task_id_;
  std::future<TaskResult> future_;
};

/// Priority-then-FIFO queue: pops the oldest item of the highest non-empty
/// priority level. Realtime items therefore overtake everything queued at a
/// lower level, and equal priorities keep submission order.
template <typename T>
class PriorityFifo {
 public:
  void push(Priority priority, T item) {
    levels_[static_cast<std::size_t>(priority)].push_back(std::move(item));
  }

  std::optional<T> pop() {
    for (std::size_t level = kPriorityLevels; level-- > 0;) {
      auto& q = levels_[level];
      if (!q.empty()) {
        T item = std::move(q.front());
        q.pop_front();
        return item;
      }
    }
    return std::nullopt;
  }

  std::size_t size() const noexcept {
    std::size_t n = 0;
    for (const auto& q : levels_) n += q.size();
    return n;
  }
  std::size_t size(Priority priority) const noexcept {
    return levels_[static_cast<std::size_t>(priority)].size();
  }
  bool empty() const noexcept { return size() == 0; }

  template <typename F>
  void drain(F&& fn) {
    while (auto item = pop()) fn(std::move(*item));
  }

 private:
  std::array<std::deque<T>, kPriorityLevels> levels_;
};

struct RuntimeOptions {
  /// Dispatcher threads. Zero means no threads: the owner drives dispatch
  /// with run_next().
  std::size_t workers = 1;
  std::size_t queue_capacity = 1024;
  bool start_paused = false;
  std::size_t dispatch_log_capacity = 65536;
};

struct Telemetry {
  std::array<std::size_t, kPriorityLevels> queue_depth{};
  std::array<std::uint64_t, kPriorityLevels> dispatched{};
  std::array<std::uint64_t, kPriorityLevels> deadline_misses{};
  std::uint64_t failed = 0;
  std::uint64_t inference_calls = 0;
  double inference_ms_total = 0.0;
};

void to_json(nlohmann::json& j, const Telemetry& t);

struct RetrainResult {
  ModelEntry entry;
  std::vector<double> loss_curve;
  std::uint64_t sample_count = 0;
};

/// On-edge package manager: owns the executors, the task queue and its
/// dispatchers. Dispatch is non-preemptive; calls into one executor
/// instance are serialized.
class Runtime {
 public:
  Runtime(Registry& registry, ArtifactStore& artifacts, RuntimeOptions options = {});
  ~Runtime();

  Runtime(const Runtime&) = delete;
  Runtime& operator=(const Runtime&) = delete;

  void add_executor(std::shared_ptr<Executor> executor);
  bool has_package(const std::string& package_id) const;

  /// Throws UnknownPackage, QueueFull, or ShuttingDown.
  TaskHandle submit(InferenceTask task);

  /// Synchronous inference on the caller's thread. Throws UnknownPackage,
  /// UnknownModel, ArtifactMissing, ExecutorFailure.
  InferenceOutput run_inference(const std::string& model_id, const std::string& package_id,
                                const Payload& input);

  /// Retrains the latest version and registers the result as version + 1.
  RetrainResult retrain(const std::string& model_id, const std::string& package_id,
                        const Workload& dataset, const RetrainConfig& config);

  void pause();
  void resume();
  /// Dispatches one queued task on the calling thread. Returns false when
  /// the queue is empty.
  bool run_next();
  /// Stops accepting work. With drain, queued tasks still run; otherwise
  /// they fail with ShuttingDown.
  void shutdown(bool drain = true);

  Telemetry telemetry() const;
  /// task_ids in dispatch order (most recent dispatch_log_capacity).
  std::vector<std::string> dispatch_log() const;

 private:
  struct Queued {
    InferenceTask task;
    std::chrono::steady_clock::time_point enqueued;
    std::promise<TaskResult> promise;
  };
  struct Package {
    std::shared_ptr<Executor> executor;
    std::mutex mutex;
    std::map<std::string, std::string> loaded_refs;  // model_id -> artifact_ref
  };

  Package& package(const std::string& package_id) const;
  void worker_loop();
  std::uint64_t begin_dispatch_locked(const Queued& item);
  void dispatch(Queued item, std::uint64_t index);

  Registry& registry_;
  ArtifactStore& artifacts_;
  RuntimeOptions options_;

  mutable std::mutex packages_mutex_;
  std::map<std::string, std::unique_ptr<Package>> packages_;

  mutable std::mutex mutex_;
  std::condition_variable cv_;
  std::condition_variable idle_cv_;
  PriorityFifo<Queued> queue_;
  bool paused_ = false;
  bool accepting_ = true;
  bool stopping_ = false;
  std::size_t in_flight_ = 0;
  std::uint64_t next_dispatch_ = 0;
  std::uint64_t submitted_ = 0;
  std::deque<std::string> dispatch_log_;
  Telemetry stats_;
  std::vector<std::thread> workers_;
};

}  // namespace openei
