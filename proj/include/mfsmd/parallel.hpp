#pragma once

#include <cstddef>
#include <functional>

namespace mfsmd {

/// Caps the worker count used by parallel_for; 0 restores the hardware default.
void set_thread_count(unsigned count);
unsigned thread_count();

/// Runs body(begin, end) over contiguous chunks of [0, n). Chunks are disjoint
/// and each index is handled by exactly one call, so results written per index
/// do not depend on the worker count.
void parallel_for(std::size_t n,
                  const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace mfsmd
