#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>

namespace phasekit {

/// Worker count: PHASEKIT_THREADS if set and positive, else the hardware
/// concurrency, never less than 1.
unsigned worker_count();

/// Calls body(i) for i in [0, n). Iterations are split into contiguous
/// chunks; each index is visited exactly once, so writes to slot i are
/// deterministic. The first exception thrown by any worker is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

/// Independent substream seed for (master, stream), via splitmix64.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

}  // namespace phasekit
