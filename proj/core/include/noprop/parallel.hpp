#pragma once

#include <cstdint>
#include <functional>

namespace noprop {

// Number of worker threads: the NOPROP_THREADS environment variable when set
// (clamped to >= 1), otherwise the hardware concurrency. A process-wide
// override takes precedence over both; tests use it to pin worker counts.
int worker_count();
void set_worker_override(int n); // n <= 0 clears the override

// Runs fn(chunk_index, begin, end) over [0, n_items) split into fixed-size
// chunks. Chunk boundaries depend only on n_items and chunk_size, never on
// the worker count, so per-chunk partial results merged in chunk order give
// identical floating-point output for any number of workers.
void parallel_chunks(std::int64_t n_items, std::int64_t chunk_size,
                     const std::function<void(std::int64_t, std::int64_t, std::int64_t)>& fn);

// Chunk size used for path-parallel estimators.
inline constexpr std::int64_t kPathChunk = 4096;

} // namespace noprop
