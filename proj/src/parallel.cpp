// Copyright Contributors to the SplatSeg Project
// SPDX-License-Identifier: Apache-2.0

#include "splatseg/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

namespace splatseg {

namespace {

std::atomic<int> g_thread_count{0};

int env_thread_count() {
  const char* env = std::getenv("SPLATSEG_THREADS");
  if (env == nullptr) return 0;
  return std::max(0, std::atoi(env));
}

}  // namespace

int thread_count() {
  int n = g_thread_count.load(std::memory_order_relaxed);
  if (n > 0) return n;
  n = env_thread_count();
  if (n > 0) return n;
  n = static_cast<int>(std::thread::hardware_concurrency());
  return n > 0 ? n : 1;
}

void set_thread_count(int n) {
  g_thread_count.store(std::max(0, n), std::memory_order_relaxed);
}

void parallel_for(std::size_t count,
                  const std::function<void(std::size_t, std::size_t)>& fn) {
  if (count == 0) return;
  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(thread_count()), count);
  if (workers <= 1) {
    fn(0, count);
    return;
  }
  const std::size_t chunk = (count + workers - 1) / workers;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(count, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&fn, begin, end] { fn(begin, end); });
  }
  for (auto& t : pool) t.join();
}

}  // namespace splatseg
