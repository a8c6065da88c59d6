#include "cbre/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

namespace cbre {

namespace {

constexpr std::size_t kChunk = 2048;

std::size_t g_override = 0;

std::size_t env_threads() {
    if (const char* s = std::getenv("CBRELAB_THREADS")) {
        const long v = std::atol(s);
        if (v > 0) return static_cast<std::size_t>(v);
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc > 0 ? hc : 1;
}

}  // namespace

std::size_t thread_count() { return g_override > 0 ? g_override : env_threads(); }

void set_threads(std::size_t n) { g_override = n; }

void parallel_chunks(std::size_t n, const std::function<void(std::size_t)>& task,
                     const std::function<void(std::size_t, std::size_t)>& reduce_range) {
    if (n == 0) return;
    const std::size_t n_chunks = (n + kChunk - 1) / kChunk;
    const std::size_t workers = std::min(thread_count(), n_chunks);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) task(i);
    } else {
        std::atomic<std::size_t> next{0};
        auto drain = [&] {
            for (;;) {
                const std::size_t c = next.fetch_add(1);
                if (c >= n_chunks) return;
                const std::size_t lo = c * kChunk;
                const std::size_t hi = std::min(lo + kChunk, n);
                for (std::size_t i = lo; i < hi; ++i) task(i);
            }
        };
        std::vector<std::thread> pool;
        pool.reserve(workers - 1);
        for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(drain);
        drain();
        for (auto& th : pool) th.join();
    }
    if (reduce_range) {
        for (std::size_t c = 0; c < n_chunks; ++c) {
            reduce_range(c * kChunk, std::min((c + 1) * kChunk, n));
        }
    }
}

double parallel_sum(std::size_t n, const std::function<double(std::size_t)>& term) {
    std::vector<double> buffer(n, 0.0);
    double total = 0.0;
    parallel_chunks(
        n, [&](std::size_t i) { buffer[i] = term(i); },
        [&](std::size_t lo, std::size_t hi) {
            for (std::size_t i = lo; i < hi; ++i) total += buffer[i];
        });
    return total;
}

}  // namespace cbre
