#pragma once

#include <cstdint>
#include <functional>

namespace omfbm {

// Worker count used when a call passes threads <= 0. Starts at hardware_concurrency.
int default_threads();
void set_default_threads(int threads);

// Calls fn(begin, end) on consecutive chunks of [0, count). Chunks are handed out
// dynamically, so fn must write only to chunk-owned memory; any reduction is the
// caller's job and should walk chunks in index order to stay thread-count agnostic.
void parallel_chunks(std::int64_t count, std::int64_t chunk,
                     const std::function<void(std::int64_t, std::int64_t)>& fn, int threads = 0);

}  // namespace omfbm
