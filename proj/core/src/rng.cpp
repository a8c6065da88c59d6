#include "cbre/rng.hpp"

#include <cmath>
#include <limits>

#include "cbre/errors.hpp"

namespace cbre {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

inline void philox_round(std::array<std::uint32_t, 4>& c, const std::array<std::uint32_t, 2>& k) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kPhiloxM0, c[0], hi0, lo0);
    mulhilo(kPhiloxM1, c[2], hi1, lo1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
}

}  // namespace

Stream::Stream(std::uint64_t master_seed, StreamKind kind, std::uint64_t index) {
    key_[0] = static_cast<std::uint32_t>(master_seed);
    key_[1] = static_cast<std::uint32_t>(master_seed >> 32);
    counter_[0] = 0;
    counter_[1] = 0;
    counter_[2] = static_cast<std::uint32_t>(index);
    // Stream indices stay far below 2^56 in practice, so the kind tag owns
    // the top byte of the counter without collisions.
    counter_[3] = static_cast<std::uint32_t>(index >> 32) ^
                  (static_cast<std::uint32_t>(kind) << 24);
}

void Stream::refill() {
    std::array<std::uint32_t, 4> c = counter_;
    std::array<std::uint32_t, 2> k = key_;
    for (int round = 0; round < 10; ++round) {
        philox_round(c, k);
        k[0] += kWeyl0;
        k[1] += kWeyl1;
    }
    block_ = c;
    pos_ = 0;
    if (++counter_[0] == 0) ++counter_[1];
}

std::uint32_t Stream::next_u32() {
    if (pos_ >= 4) refill();
    return block_[static_cast<std::size_t>(pos_++)];
}

std::uint64_t Stream::next_u64() {
    const std::uint64_t lo = next_u32();
    const std::uint64_t hi = next_u32();
    return (hi << 32) | lo;
}

double Stream::uniform() {
    const std::uint64_t bits = next_u64() >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

double Stream::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
}

double Stream::exponential(double rate) {
    if (!(rate > 0.0)) throw InvalidArgument("exponential: rate must be > 0");
    return -std::log(uniform()) / rate;
}

std::uint64_t Stream::poisson(double mean) {
    if (mean < 0.0 || !std::isfinite(mean)) {
        throw InvalidArgument("poisson: mean must be finite and >= 0");
    }
    if (mean == 0.0) return 0;
    double sum = 0.0;
    std::uint64_t count = 0;
    // Arrival-time counting; exact and underflow-free for any mean.
    for (;;) {
        sum += -std::log(uniform());
        if (sum >= mean) return count;
        ++count;
        if (count > (1ull << 32)) throw NumericalDomainError("poisson: runaway count");
    }
}

}  // namespace cbre
