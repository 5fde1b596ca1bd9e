#pragma once

// Philox4x32-10 counter-based generator. Every (seed, stream, trial) triple
// maps to an independent block of random words, so Monte-Carlo results do not
// depend on how trials are split across threads.
//
// Uniform and normal conversions are written out here rather than taken from
// <random>, whose distributions are implementation-defined.

#include <array>
#include <cmath>
#include <cstdint>

#include "units.hpp"

namespace lutclock {

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

namespace detail {

inline constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
inline constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
inline constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
inline constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

constexpr void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

} // namespace detail

constexpr PhiloxCounter philox4x32_10(PhiloxCounter ctr, PhiloxKey key) {
    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0 = 0, lo0 = 0, hi1 = 0, lo1 = 0;
        detail::mulhilo(detail::kPhiloxM0, ctr[0], hi0, lo0);
        detail::mulhilo(detail::kPhiloxM1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += detail::kPhiloxW0;
        key[1] += detail::kPhiloxW1;
    }
    return ctr;
}

/// Stream of random words for one trial. Counter layout:
/// (block, stream, trial low word, trial high word).
class TrialRng {
public:
    TrialRng(std::uint64_t seed, std::uint64_t trial, std::uint32_t stream = 0)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          ctr_{0u, stream, static_cast<std::uint32_t>(trial),
               static_cast<std::uint32_t>(trial >> 32)} {}

    std::uint64_t next_u64() {
        if (pos_ >= 4) refill();
        const std::uint64_t hi = buf_[pos_];
        const std::uint64_t lo = buf_[pos_ + 1];
        pos_ += 2;
        return (hi << 32) | lo;
    }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform on (0, 1].
    double uniform_open_low() { return 1.0 - uniform(); }

    /// Standard normal via Box-Muller; the second variate is cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double r = std::sqrt(-2.0 * std::log(uniform_open_low()));
        const double a = kTwoPi * uniform();
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

private:
    void refill() {
        buf_ = philox4x32_10(ctr_, key_);
        ++ctr_[0];
        pos_ = 0;
    }

    PhiloxKey key_;
    PhiloxCounter ctr_;
    PhiloxCounter buf_{};
    int pos_ = 4;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace lutclock
