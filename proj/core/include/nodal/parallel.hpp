#pragma once

#include <cstddef>
#include <functional>

namespace nodal {

// Worker cap: NODAL_THREADS if set, else hardware concurrency.
std::size_t worker_count();

// Runs fn(i) for i in [0, n).  Results must be written to per-index slots so
// the outcome does not depend on the schedule.  The first exception thrown by
// any worker is rethrown.  Calls nested inside a worker run serially.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace nodal
