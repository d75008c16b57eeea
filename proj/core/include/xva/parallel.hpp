#pragma once

#include <cstddef>
#include <functional>

namespace xva {

/// Thread count used when a caller passes 0: the XVA_THREADS environment
/// variable if set to a positive integer, otherwise hardware concurrency.
unsigned default_thread_count();

/// Runs body(i) for i in [0, count) on up to `threads` threads (0 = default).
/// Indices are split into contiguous blocks; results must be written to
/// per-index slots so the outcome does not depend on the thread count.
/// The first exception thrown by any worker is rethrown on the caller.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body);

} // namespace xva
