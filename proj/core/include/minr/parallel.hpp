#pragma once

#include <cstddef>
#include <functional>

namespace minr {

// Worker count: `requested` if non-zero, else $MINR_THREADS, else the
// hardware concurrency. Always >= 1 and capped by $MINR_THREADS when set.
std::size_t worker_threads(std::size_t requested = 0);

// Runs fn(0..n-1) on up to `threads` threads with static chunking. The first
// exception (lowest index) is rethrown after all workers join.
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn);

}  // namespace minr
