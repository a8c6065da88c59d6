#pragma once

#include <array>
#include <cstdint>

namespace cbre {

// Task families for substream derivation. Each (seed, kind, index) triple
// names one independent stream, so replica draws never depend on scheduling.
enum class StreamKind : std::uint32_t {
    env_path = 1,
    branching = 2,
    immigration = 3,
    analytic_env = 4,
    coupling_base = 5,
    coupling_diff = 6,
    scratch = 7,
};

// Counter-based stream (Philox 4x32-10, Salmon et al. 2011). Draws are a
// pure function of (seed, kind, index, draw position): replay is exact and
// streams can be handed to workers in any order.
class Stream {
public:
    Stream(std::uint64_t master_seed, StreamKind kind, std::uint64_t index);

    std::uint32_t next_u32();
    std::uint64_t next_u64();

    // Uniform on the open interval (0,1).
    double uniform();
    // Standard normal, Box-Muller with one cached spare.
    double normal();
    // Exponential with the given rate.
    double exponential(double rate);
    // Exact Poisson count via unit-exponential inter-arrivals. Cost O(mean).
    std::uint64_t poisson(double mean);

private:
    void refill();

    std::array<std::uint32_t, 4> counter_;
    std::array<std::uint32_t, 2> key_;
    std::array<std::uint32_t, 4> block_{};
    int pos_ = 4;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace cbre
