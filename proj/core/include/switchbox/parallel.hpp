#pragma once

#include <cstddef>
#include <functional>

namespace switchbox {

// Worker count: hardware concurrency capped by SWITCHBOX_THREADS (if set) and
// by any override installed with set_thread_limit.
std::size_t thread_count();

// 0 removes the override.
void set_thread_limit(std::size_t n);

// Runs body(begin, end) over a static partition of [0, n). Results must be written
// to per-index slots; callers reduce sequentially so sums never depend on the
// number of workers.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace switchbox
