// Copyright (c) 2026 Clarinet Authors
// SPDX-License-Identifier: Apache-2.0
#include "core/parallel.hpp"

#include <cstdlib>
#include <thread>
#include <vector>

namespace clar {

void parallel_for(int64_t n, int workers, const std::function<void(int64_t, int64_t)>& fn) {
  if (n <= 0) return;
  if (workers > n) workers = static_cast<int>(n);
  if (workers <= 1) {
    fn(0, n);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const int64_t chunk = (n + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const int64_t lo = w * chunk;
    const int64_t hi = std::min<int64_t>(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&fn, lo, hi] { fn(lo, hi); });
  }
  for (auto& t : pool) t.join();
}

int default_workers() {
  if (const char* env = std::getenv("CLARINET_WORKERS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

}  // namespace clar
