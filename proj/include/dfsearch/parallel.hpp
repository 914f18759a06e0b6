#pragma once

#include <cstddef>
#include <functional>

namespace dfsearch {

/// Worker count: hardware concurrency, capped by DFSEARCH_THREADS when set.
unsigned worker_count();

/// Runs body(k) for k in [0, count) on up to worker_count() threads. Each
/// index runs exactly once; callers write results into per-index slots and
/// reduce afterwards in index order, so output does not depend on the thread
/// count. The first exception thrown (lowest index) is rethrown.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace dfsearch
