// Copyright Contributors to the SplatSeg Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>

namespace splatseg {

// Worker count used by parallel loops. 0 = unset; falls back to the
// SPLATSEG_THREADS environment variable, then to the hardware count.
int thread_count();
void set_thread_count(int n);

// Runs fn(begin, end) over disjoint chunks of [0, count). Chunk boundaries
// depend only on count and the worker count the caller observes; callers that
// need thread-count-independent results must store per-index partials and
// reduce them themselves in index order.
void parallel_for(std::size_t count,
                  const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace splatseg
