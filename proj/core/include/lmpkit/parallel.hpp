#pragma once

#include <cstddef>
#include <functional>

namespace lmpkit {

/// Worker cap: LMPKIT_THREADS when set to a positive integer, otherwise
/// the hardware concurrency (at least 1).
std::size_t default_worker_count();

/// Runs body(i) for i in [0, n) on up to `workers` threads. Each index is
/// visited exactly once; callers write results into per-index slots and
/// reduce in index order afterwards. The first exception thrown by any
/// body is rethrown on the calling thread.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& body);

}  // namespace lmpkit
