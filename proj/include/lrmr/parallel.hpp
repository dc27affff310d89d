#pragma once

#include <cstddef>
#include <functional>

namespace lrmr {

/// Worker count: LRMR_THREADS if set to a positive integer, otherwise the
/// hardware concurrency (at least 1).
std::size_t default_thread_count();

/// Runs body(i) for i in [0, count) on up to `threads` workers. Each index
/// runs exactly once; callers write results by index so aggregation order
/// stays fixed. The first exception thrown by a body is rethrown. Calls made
/// from inside a worker run serially.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body,
                  std::size_t threads = default_thread_count());

}  // namespace lrmr
