#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace ttsa {

/// Counter-based generator (Philox-4x32-10). A stream is addressed by
/// (seed, stream id); draws depend only on that address and the draw index,
/// so parallel replications are reproducible regardless of scheduling.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}

    std::uint32_t next_u32() {
        if (pos_ == 4) refill();
        return buf_[pos_++];
    }

    std::uint64_t next_u64() {
        const std::uint64_t lo = next_u32();
        const std::uint64_t hi = next_u32();
        return (hi << 32) | lo;
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform double in (0, 1]; safe as a log argument.
    double next_double_pos() {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    /// Standard normal via Box-Muller; consumes exactly two uniforms per pair.
    double next_gauss() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        const double r = std::sqrt(-2.0 * std::log(next_double_pos()));
        const double t = 2.0 * std::numbers::pi * next_double();
        cached_ = r * std::sin(t);
        have_cached_ = true;
        return r * std::cos(t);
    }

private:
    static std::uint32_t mul_hi(std::uint32_t a, std::uint32_t b) {
        return static_cast<std::uint32_t>((static_cast<std::uint64_t>(a) * b) >> 32);
    }
    static std::uint32_t mul_lo(std::uint32_t a, std::uint32_t b) {
        return static_cast<std::uint32_t>(static_cast<std::uint64_t>(a) * b);
    }

    void refill() {
        std::array<std::uint32_t, 4> c = {
            static_cast<std::uint32_t>(counter_),
            static_cast<std::uint32_t>(counter_ >> 32),
            static_cast<std::uint32_t>(stream_),
            static_cast<std::uint32_t>(stream_ >> 32),
        };
        std::uint32_t k0 = static_cast<std::uint32_t>(seed_);
        std::uint32_t k1 = static_cast<std::uint32_t>(seed_ >> 32);
        for (int round = 0; round < 10; ++round) {
            const std::uint32_t hi0 = mul_hi(0xD2511F53u, c[0]);
            const std::uint32_t lo0 = mul_lo(0xD2511F53u, c[0]);
            const std::uint32_t hi1 = mul_hi(0xCD9E8D57u, c[2]);
            const std::uint32_t lo1 = mul_lo(0xCD9E8D57u, c[2]);
            c = {hi1 ^ c[1] ^ k0, lo1, hi0 ^ c[3] ^ k1, lo0};
            k0 += 0x9E3779B9u;
            k1 += 0xBB67AE85u;
        }
        buf_ = c;
        pos_ = 0;
        ++counter_;
    }

    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t counter_ = 0;
    std::array<std::uint32_t, 4> buf_{};
    int pos_ = 4;
    double cached_ = 0.0;
    bool have_cached_ = false;
};

}  // namespace ttsa
