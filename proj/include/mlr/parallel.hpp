#pragma once

#include <cstddef>
#include <functional>

namespace mlr {

// Number of worker threads: MLR_THREADS if set, else hardware concurrency.
unsigned worker_count();

// Calls fn(i) for i in [0, n). Each index is visited exactly once; callers
// write results into per-index slots so the outcome is schedule independent.
// Nested calls from inside a worker run serially.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

} // namespace mlr
