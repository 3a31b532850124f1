#pragma once

#include <cstddef>
#include <functional>

namespace gcoerce {

// Worker count for data-parallel loops: GCOERCE_THREADS if set, otherwise
// hardware concurrency, and never less than 1.
int thread_count();

// Run fn(begin, end) over disjoint chunks of [0, n) on thread_count()
// threads. Chunks are fixed by n and the thread count alone, so any
// reduction that combines per-chunk results in chunk order is deterministic.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace gcoerce
