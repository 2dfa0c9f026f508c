// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>

namespace mindriven {

/// Worker count: MINDRIVEN_THREADS when set, else the logical core count.
unsigned default_threads();

/// Runs fn(i) for i in [0, count) on up to `threads` workers (0 = default).
/// Work is handed out by an atomic counter; callers write results by index
/// so the outcome never depends on scheduling. The first exception thrown
/// by any task is rethrown after all workers finish.
void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t)>& fn);

}  // namespace mindriven
