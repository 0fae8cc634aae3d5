#pragma once

#include <cstddef>
#include <functional>

namespace ksdagg {

/// Worker cap from the KSDAGG_WORKERS environment variable, or the hardware
/// concurrency when unset. Always at least 1.
std::size_t default_worker_count();

/// Runs `body(i)` for i in [0, count) on up to `workers` threads.
///
/// Indices are handed out dynamically, so `body` must not depend on which
/// thread runs it. If any call throws, the exception raised by the smallest
/// failing index is rethrown after all workers stop.
void parallel_for(std::size_t count, std::size_t workers,
                  const std::function<void(std::size_t)>& body);

}  // namespace ksdagg
