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

// Independent reference implementations the tests compare the library
// against. Nothing here calls into openei; inputs and outputs are plain data.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace oracle {

// ---------------------------------------------------------------- selection

enum Dim { kLatency = 0, kAccuracy = 1, kEnergy = 2, kMemory = 3 };

struct Row {
  std::string id;
  std::string package;
  bool profiled = true;
  double accuracy = 0;
  double latency = 0;
  double energy = 0;
  std::uint64_t memory = 0;
};

struct Problem {
  Dim objective = kLatency;
  std::optional<double> min_accuracy, max_latency, max_energy;
  std::optional<std::uint64_t> max_memory;
  double device_energy = 0;
  std::uint64_t device_memory = 0;
};

struct Verdict {
  bool infeasible = true;
  std::string id;
  std::string package;
  double value = 0;
  std::size_t feasible = 0;
  std::size_t viol[4] = {0, 0, 0, 0};  // indexed by Dim
};

// Brute-force scan: test every row against every constraint, then keep the
// row with the smallest sort key.
inline Verdict scan(const std::vector<Row>& rows, const Problem& p) {
  Verdict v;
  const double e_cap = p.max_energy ? std::min(*p.max_energy, p.device_energy) : p.device_energy;
  const std::uint64_t m_cap = p.max_memory ? std::min(*p.max_memory, p.device_memory) : p.device_memory;
  using Key = std::tuple<double, double, double, double, double, std::string, std::string>;
  std::optional<std::pair<Key, const Row*>> best;
  for (const auto& r : rows) {
    if (!r.profiled) continue;
    bool bad_a = p.min_accuracy && r.accuracy < *p.min_accuracy;
    bool bad_l = p.max_latency && r.latency > *p.max_latency;
    bool bad_e = r.energy > e_cap;
    bool bad_m = r.memory > m_cap;
    v.viol[kAccuracy] += bad_a;
    v.viol[kLatency] += bad_l;
    v.viol[kEnergy] += bad_e;
    v.viol[kMemory] += bad_m;
    if (bad_a || bad_l || bad_e || bad_m) continue;
    ++v.feasible;
    // All dimensions as "smaller is better"; the objective goes first and
    // its own slot in the tie-break list is neutralized.
    double dims[4] = {r.latency, -r.accuracy, r.energy, static_cast<double>(r.memory)};
    double primary = dims[p.objective];
    double tb[4] = {dims[kAccuracy], dims[kLatency], dims[kEnergy], dims[kMemory]};
    const Dim order[4] = {kAccuracy, kLatency, kEnergy, kMemory};
    for (int i = 0; i < 4; ++i) {
      if (order[i] == p.objective) tb[i] = 0.0;
    }
    Key key{primary, tb[0], tb[1], tb[2], tb[3], r.id, r.package};
    if (!best || key < best->first) best = std::make_pair(key, &r);
  }
  if (best) {
    v.infeasible = false;
    v.id = best->second->id;
    v.package = best->second->package;
    const Row& r = *best->second;
    double dims[4] = {r.latency, r.accuracy, r.energy, static_cast<double>(r.memory)};
    v.value = dims[p.objective];
  }
  return v;
}

// ---------------------------------------------------------------- scheduler

// Reference dispatch order for a non-preemptive priority-then-FIFO queue:
// a plain list scan picking the highest priority, earliest arrival.
struct Job {
  std::string id;
  int priority;  // larger runs first
};

inline std::vector<std::string> dispatch_order(const std::vector<Job>& queued) {
  std::vector<std::pair<Job, std::size_t>> pending;
  for (std::size_t i = 0; i < queued.size(); ++i) pending.emplace_back(queued[i], i);
  std::vector<std::string> out;
  while (!pending.empty()) {
    std::size_t pick = 0;
    for (std::size_t i = 1; i < pending.size(); ++i) {
      if (pending[i].first.priority > pending[pick].first.priority) pick = i;
    }
    out.push_back(pending[pick].first.id);
    pending.erase(pending.begin() + static_cast<std::ptrdiff_t>(pick));
  }
  return out;
}

// Interleaved submit/dispatch script: each step either enqueues a job or
// dispatches one. Returns the dispatch order.
struct Step {
  bool dispatch;
  Job job;
};

inline std::vector<std::string> run_script(const std::vector<Step>& script) {
  std::vector<Job> queue;
  std::vector<std::string> order;
  auto pop = [&] {
    if (queue.empty()) return;
    auto head = dispatch_order(queue).front();
    order.push_back(head);
    queue.erase(std::find_if(queue.begin(), queue.end(), [&](const Job& j) { return j.id == head; }));
  };
  for (const auto& s : script) {
    if (s.dispatch) {
      pop();
    } else {
      queue.push_back(s.job);
    }
  }
  while (!queue.empty()) pop();
  return order;
}

// ---------------------------------------------------------------- history

struct Rec {
  std::string sensor;
  std::int64_t t;
  std::string payload;
};

// Stable filter of the raw ingest log, then a stable sort by timestamp.
inline std::vector<Rec> history(const std::vector<Rec>& log, const std::string& sensor,
                                std::int64_t start, std::int64_t end) {
  std::vector<Rec> out;
  for (const auto& r : log) {
    if (r.sensor == sensor && r.t >= start && r.t <= end) out.push_back(r);
  }
  std::stable_sort(out.begin(), out.end(), [](const Rec& a, const Rec& b) { return a.t < b.t; });
  return out;
}

// --------------------------------------------------------------- allocation

// Checks the largest-remainder properties of an allocation using exact
// rational arithmetic on integer capacities: conservation, |share - exact|
// < 1, zero-capacity edges get nothing, and the leftover goes to the
// largest remainders (ties to the smaller id).
inline bool largest_remainder_ok(std::uint64_t total, const std::vector<std::uint64_t>& caps,
                                 const std::vector<std::string>& ids,
                                 const std::vector<std::uint64_t>& shares, std::string* why) {
  auto fail = [&](const std::string& m) {
    if (why) *why = m;
    return false;
  };
  if (shares.size() != caps.size()) return fail("size");
  unsigned __int128 cap_sum = 0;
  std::uint64_t share_sum = 0;
  for (auto c : caps) cap_sum += c;
  for (auto s : shares) share_sum += s;
  if (share_sum != total) return fail("conservation");
  std::vector<unsigned __int128> floors(caps.size()), rems(caps.size());
  for (std::size_t i = 0; i < caps.size(); ++i) {
    unsigned __int128 num = static_cast<unsigned __int128>(total) * caps[i];
    floors[i] = num / cap_sum;
    rems[i] = num % cap_sum;
    if (caps[i] == 0 && shares[i] != 0) return fail("zero-capacity edge got work");
    if (shares[i] != floors[i] && shares[i] != floors[i] + 1) return fail("not within one of quota");
  }
  // Every edge that got the extra unit must outrank every edge that did not.
  for (std::size_t i = 0; i < caps.size(); ++i) {
    if (shares[i] != floors[i] + 1) continue;
    for (std::size_t j = 0; j < caps.size(); ++j) {
      if (shares[j] != floors[j] || caps[j] == 0 || i == j) continue;
      bool i_first = rems[i] > rems[j] || (rems[i] == rems[j] && ids[i] < ids[j]);
      if (!i_first) return fail("leftover unit assigned out of remainder order");
    }
  }
  return true;
}

// ------------------------------------------------------------------ URIs

struct UriCase {
  std::string text;       // some valid spelling
  std::string canonical;  // what format(parse(text)) must produce
};

inline const std::string& safe_chars() {
  static const std::string s =
      "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789-._~!$'()*+,;:@";
  return s;
}

inline std::string pct(unsigned char c, bool lower) {
  const char* hex = lower ? "0123456789abcdef" : "0123456789ABCDEF";
  return std::string{'%', hex[c >> 4], hex[c & 15]};
}

inline bool is_safe(unsigned char c) { return safe_chars().find(static_cast<char>(c)) != std::string::npos; }

inline std::string canon(const std::string& raw) {
  std::string out;
  for (unsigned char c : raw) out += is_safe(c) ? std::string(1, static_cast<char>(c)) : pct(c, false);
  return out;
}

// Encodes unsafe bytes always and safe bytes sometimes, in either hex case.
template <typename Rng>
std::string spell(const std::string& raw, Rng& rng) {
  std::bernoulli_distribution coin(0.15);
  std::string out;
  for (unsigned char c : raw) {
    if (!is_safe(c) || coin(rng)) {
      out += pct(c, coin(rng));
    } else {
      out.push_back(static_cast<char>(c));
    }
  }
  return out;
}

template <typename Rng>
std::string random_text(Rng& rng, std::size_t min_len, std::size_t max_len) {
  std::uniform_int_distribution<std::size_t> len(min_len, max_len);
  std::uniform_int_distribution<int> byte(0, 255);
  std::bernoulli_distribution mostly_safe(0.8);
  std::string out;
  std::size_t n = len(rng);
  for (std::size_t i = 0; i < n; ++i) {
    if (mostly_safe(rng)) {
      std::uniform_int_distribution<std::size_t> pick(0, safe_chars().size() - 1);
      out.push_back(safe_chars()[pick(rng)]);
    } else {
      out.push_back(static_cast<char>(byte(rng)));
    }
  }
  return out;
}

template <typename Rng>
UriCase random_uri(Rng& rng) {
  static const char* scenarios[] = {"vehicles", "safety", "home", "health"};
  static const char* types[] = {"realtime", "historical"};
  std::bernoulli_distribution coin(0.5);
  std::uniform_int_distribution<int> four(0, 3), two(0, 1), nargs(0, 4);
  std::uniform_int_distribution<int> port(1, 65535);

  UriCase c;
  std::string prefix_text, prefix_canon;
  if (coin(rng)) {
    std::string host = coin(rng) ? "10.0." + std::to_string(four(rng)) + ".7"
                                 : "edge-" + std::to_string(port(rng)) + ".local";
    std::string auth = host;
    if (coin(rng)) auth += ":" + std::to_string(port(rng));
    prefix_canon = "http://" + auth;
    prefix_text = (coin(rng) ? "http://" : "") + auth;
  }
  bool algorithms = coin(rng);
  std::string kind = algorithms ? "ei_algorithms" : "ei_data";
  std::string f3 = algorithms ? scenarios[four(rng)] : types[two(rng)];
  std::string f4 = random_text(rng, 1, 12);

  std::vector<std::pair<std::string, std::string>> args;
  int n = nargs(rng);
  for (int i = 0; i < n; ++i) args.emplace_back(random_text(rng, 1, 8), random_text(rng, 0, 10));
  // Some leading args go in a path segment, the rest in the query.
  std::uniform_int_distribution<int> split(0, n);
  int in_path = n == 0 ? 0 : split(rng);

  c.text = prefix_text + "/" + spell(kind, rng) + "/" + spell(f3, rng) + "/" + spell(f4, rng);
  c.canonical = prefix_canon + "/" + kind + "/" + f3 + "/" + canon(f4);
  auto join = [&](int from, int to) {
    std::string s;
    for (int i = from; i < to; ++i) {
      if (i > from) s += "&";
      s += spell(args[i].first, rng) + "=" + spell(args[i].second, rng);
    }
    return s;
  };
  if (in_path > 0) c.text += "/" + join(0, in_path);
  if (in_path < n) c.text += "?" + join(in_path, n);
  for (int i = 0; i < n; ++i) {
    c.canonical += (i == 0 ? "?" : "&") + canon(args[i].first) + "=" + canon(args[i].second);
  }
  return c;
}

// Turns a valid URI into one the grammar must reject.
template <typename Rng>
std::string break_uri(const std::string& valid, Rng& rng) {
  std::uniform_int_distribution<int> mode(0, 11);
  std::string s = valid;
  const std::size_t authority_from = s.rfind("http://", 0) == 0 ? 7 : 0;
  const auto path_at = s.find('/', authority_from);
  switch (mode(rng)) {
    case 0: return s.substr(0, path_at) + "/ei_bogus" + s.substr(s.find('/', path_at + 1));
    case 1: {  // drop field4 and everything after
      auto p3 = s.find('/', s.find('/', path_at + 1) + 1);
      return s.substr(0, p3);
    }
    case 2: {  // extra path segment
      auto q = s.find('?');
      std::string base = q == std::string::npos ? s : s.substr(0, q);
      return base + (std::count(base.begin() + static_cast<std::ptrdiff_t>(path_at), base.end(), '/') == 4
                         ? "/x/y=1"
                         : "/a=1/b=2");
    }
    case 3: return "ftp://host" + s.substr(path_at);
    case 4: return "http://host:99999" + s.substr(path_at);
    case 5: return "http://ho st" + s.substr(path_at);
    case 6: return s + (s.find('?') == std::string::npos ? "?novalue" : "&novalue");
    case 7: return s + (s.find('?') == std::string::npos ? "?=v" : "&=v");
    case 8: return s + "%G1";
    case 9: return s + "%4";
    case 10: return s.substr(0, path_at) + "/ei_algorithms/kitchen/" + "algo";
    default: return s.substr(0, path_at) + "/ei_data/yesterday/cam";
  }
}

// ---------------------------------------------------------------- training

// Full-batch gradient descent for a single-output linear regressor
// y = w.x + b on loss 0.5 * mean((y - t)^2). Returns the loss before the
// first step and after each step.
inline std::vector<double> regression_losses(std::vector<double> w, double b,
                                             const std::vector<std::vector<double>>& xs,
                                             const std::vector<double>& ts, double lr, int passes) {
  auto loss = [&] {
    double acc = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      double y = b;
      for (std::size_t k = 0; k < w.size(); ++k) y += w[k] * xs[i][k];
      acc += 0.5 * (y - ts[i]) * (y - ts[i]);
    }
    return acc / static_cast<double>(xs.size());
  };
  std::vector<double> curve{loss()};
  for (int p = 0; p < passes; ++p) {
    std::vector<double> gw(w.size(), 0.0);
    double gb = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      double y = b;
      for (std::size_t k = 0; k < w.size(); ++k) y += w[k] * xs[i][k];
      double r = y - ts[i];
      for (std::size_t k = 0; k < w.size(); ++k) gw[k] += r * xs[i][k];
      gb += r;
    }
    const double n = static_cast<double>(xs.size());
    for (std::size_t k = 0; k < w.size(); ++k) w[k] -= lr * gw[k] / n;
    b -= lr * gb / n;
    curve.push_back(loss());
  }
  return curve;
}

}  // namespace oracle
