// parallel.hpp — trajectory-level parallelism with results that do not depend
// on the number of worker threads.

#pragma once

#include <cstddef>
#include <functional>

namespace siwf {

// Explicit request if > 0, else the SIWF_THREADS environment variable, else
// the hardware concurrency (at least 1).
int resolve_threads(int requested);

// Calls fn(i) for i in [0, n) on `threads` workers. Each index runs exactly
// once; exceptions are rethrown on the caller (lowest failing index first).
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

}  // namespace siwf
