#pragma once

#include <cstddef>
#include <functional>

namespace costlens {

// Worker count: COSTLENS_THREADS if set to a positive integer, otherwise the
// hardware concurrency (at least 1).
unsigned worker_count();

// Runs body(begin, end) over contiguous chunks of [0, n). Chunk boundaries are
// multiples of `grain`, so per-chunk work that depends on the chunk start is
// identical for any worker count.
void parallel_for(std::size_t n, std::size_t grain,
                  const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace costlens
