#pragma once

#include <cstddef>
#include <functional>

namespace dopplerline {

/// Logical core count, at least 1.
int default_jobs();

/// Calls fn(k) for k in [0, n) on up to `jobs` threads. Results must be written to per-index slots.
/// If any call throws, the exception of the lowest failing index is rethrown after all threads finish.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn);

}  // namespace dopplerline
