#pragma once

#include <cstddef>
#include <functional>

namespace deformclass {

/// Worker count: DEFORMCLASS_THREADS if set (>= 1), else hardware concurrency.
std::size_t worker_count();

/// Runs body(i) for i in [0, n) on up to `threads` workers (0 = worker_count()).
/// Items are claimed dynamically; callers must write results by index so the
/// outcome does not depend on scheduling. The first exception is rethrown.
/// Calls made from inside a worker run serially on that worker.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body,
                  std::size_t threads = 0);

}  // namespace deformclass
