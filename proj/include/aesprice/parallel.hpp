#pragma once

#include <cstddef>
#include <functional>

namespace aesprice {

/// Name of the environment variable that sets the worker count.
inline constexpr const char* kThreadsEnvVar = "AESPRICE_THREADS";

/// Worker count from AESPRICE_THREADS, falling back to the number of cores.
std::size_t default_worker_count();

/// Splits [0, n) into contiguous chunks and runs body(begin, end) on up to
/// `workers` threads (0 = default_worker_count()). Blocks until all chunks finish;
/// the first exception thrown by any chunk is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body, std::size_t workers = 0);

}  // namespace aesprice
