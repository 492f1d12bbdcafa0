#pragma once

#include <cstddef>
#include <functional>

namespace truncchain {

/// Worker count taken from TRUNCCHAIN_THREADS, else hardware concurrency.
/// Results never depend on it: every parallel loop writes into per-index
/// slots and reductions run in index order afterwards.
unsigned default_threads();

/// Calls fn(i) for i in [0, count) over `threads` workers (0 = default).
void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t)>& fn);

}  // namespace truncchain
