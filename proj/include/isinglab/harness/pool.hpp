#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

#include "isinglab/dynamics/rng.hpp"
#include "isinglab/harness/checkpoint.hpp"

namespace isinglab {

struct PoolOptions {
  unsigned workers = 1;
  std::optional<std::filesystem::path> checkpoint;  // resume/append file
  double time_budget_s = 0;                           // 0: unlimited
};

struct PoolResult {
  std::vector<ResultRecord> records;  // sorted by replica id
  bool complete = true;               // false when the time budget ran out
};

// Runs replicas 0..n-1 of one task. Replica i gets seed replica_seed(task_seed, i);
// `work(i, seed)` returns its observables. Records already present in the
// checkpoint are reused, so an interrupted run resumes where it stopped.
inline PoolResult run_replicas(const std::string& task_key, std::uint64_t task_seed, std::uint64_t n,
                               const std::function<std::vector<double>(std::uint64_t, std::uint64_t)>& work,
                               const PoolOptions& opt = {}) {
  std::map<std::uint64_t, ResultRecord> done;
  std::optional<Checkpoint> ck;
  if (opt.checkpoint) {
    ck.emplace(*opt.checkpoint, task_key);
    done = ck->load();
    ck->open_for_append(done);
  }
  std::vector<std::uint64_t> todo;
  for (std::uint64_t i = 0; i < n; ++i)
    if (!done.count(i)) todo.push_back(i);

  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  std::atomic<std::size_t> next{0};
  std::atomic<bool> out_of_time{false};
  std::mutex mu;
  std::exception_ptr failure;
  auto worker = [&] {
    for (;;) {
      if (opt.time_budget_s > 0 &&
          std::chrono::duration<double>(clock::now() - start).count() > opt.time_budget_s) {
        out_of_time = true;
        return;
      }
      std::size_t k = next.fetch_add(1);
      if (k >= todo.size()) return;
      ResultRecord r;
      r.replica = todo[k];
      r.seed = replica_seed(task_seed, r.replica);
      auto t0 = clock::now();
      try {
        r.values = work(r.replica, r.seed);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure) failure = std::current_exception();
        next = todo.size();
        return;
      }
      r.wall_ms = std::chrono::duration<double, std::milli>(clock::now() - t0).count();
      std::lock_guard lock(mu);
      if (ck) ck->append(r);
      done[r.replica] = std::move(r);
    }
  };
  {
    std::vector<std::jthread> threads;
    for (unsigned w = 1; w < std::max(1u, opt.workers); ++w) threads.emplace_back(worker);
    worker();
  }
  if (failure) std::rethrow_exception(failure);
  PoolResult res;
  for (std::uint64_t i = 0; i < n; ++i) {
    auto it = done.find(i);
    if (it == done.end()) {
      res.complete = false;
      continue;
    }
    res.records.push_back(it->second);
  }
  if (out_of_time) res.complete = res.records.size() == n;
  return res;
}

}  // namespace isinglab
