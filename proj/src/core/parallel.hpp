// Copyright (c) 2026 Clarinet Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>

namespace clar {

// Splits [0, n) into contiguous chunks and runs fn(begin, end) on each.
// workers <= 1 runs inline. Chunk boundaries depend only on (n, workers), so
// results are deterministic as long as chunks write disjoint data.
void parallel_for(int64_t n, int workers, const std::function<void(int64_t, int64_t)>& fn);

// CLARINET_WORKERS env var if set, otherwise hardware concurrency.
int default_workers();

}  // namespace clar
