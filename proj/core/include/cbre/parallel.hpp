#pragma once

#include <cstddef>
#include <functional>

namespace cbre {

// Worker count: explicit override, else CBRELAB_THREADS, else hardware.
std::size_t thread_count();
void set_threads(std::size_t n);  // 0 restores the environment default

// Runs task(index) for index in [0, n) on a fixed-size chunk grid and passes
// each chunk's indices, in ascending chunk order, to reduce on the calling
// thread. Results are therefore independent of the worker count.
void parallel_chunks(std::size_t n, const std::function<void(std::size_t)>& task,
                     const std::function<void(std::size_t, std::size_t)>& reduce_range);

// Convenience: deterministic ordered sum of per-index contributions.
double parallel_sum(std::size_t n, const std::function<double(std::size_t)>& term);

}  // namespace cbre
