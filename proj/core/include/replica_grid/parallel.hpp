#pragma once

#include <cstddef>
#include <functional>

namespace replica_grid {

// Worker count to use for a request; values < 1 mean "all hardware threads".
int resolve_jobs(int requested);

// Calls fn(i) for i in [0, count) on up to `jobs` threads. Each index runs
// exactly once. If any call throws, the exception of the lowest failing index
// is rethrown after all workers stop.
void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& fn);

}  // namespace replica_grid
