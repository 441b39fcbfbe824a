#pragma once

#include <cstddef>
#include <functional>

namespace hetnet {

/// Worker cap: HETNET_THREADS if set and positive, else the logical core count.
std::size_t worker_count();

/// Runs fn(i) for i in [0, n) on up to worker_count() threads. Each index is
/// visited exactly once; callers write results into per-index slots.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace hetnet
