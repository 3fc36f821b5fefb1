#pragma once

#include <cstddef>
#include <functional>

namespace ttsa {

/// Runs body(0..count-1) on up to `threads` workers pulling indices from a
/// shared atomic counter. Results must be written to per-index slots so the
/// outcome is independent of scheduling. The first exception thrown by any
/// worker is rethrown after all workers join. threads <= 1 runs inline.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& body);

}  // namespace ttsa
