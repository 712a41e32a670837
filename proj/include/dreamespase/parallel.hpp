#pragma once

#include <cstddef>
#include <functional>

namespace dreamespase {

/// Runs fn(0..n-1) on up to `threads` workers pulling indices in order.
/// Results must be written by index so the outcome never depends on the
/// thread count. The exception from the lowest failing index is rethrown.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

}  // namespace dreamespase
