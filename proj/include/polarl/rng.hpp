#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace polarl {

// Counter-based PRNG (Philox4x32-10). A stream is (key, counter); the key is
// derived from a 64-bit seed and a 64-bit stream id, so workers can own
// provably disjoint streams and any draw is addressable as
// (seed, stream, block, lane). Integer output is identical across runs;
// float/gaussian output additionally goes through libm, which is stable on a
// given platform.
class RngStream {
public:
    RngStream() : RngStream(0, 0) {}

    RngStream(std::uint64_t seed, std::uint64_t stream_id) {
        const std::uint64_t k = mix64(mix64(seed ^ 0x9E3779B97F4A7C15ULL) ^ stream_id);
        key_[0] = static_cast<std::uint32_t>(k);
        key_[1] = static_cast<std::uint32_t>(k >> 32);
        ctr_hi_ = 0;
        ctr_lo_ = 0;
        buf_pos_ = 4;
    }

    /// Independent substream of this stream (same seed space, new id).
    RngStream substream(std::uint64_t sub_id) const {
        const std::uint64_t base =
            (static_cast<std::uint64_t>(key_[1]) << 32) | key_[0];
        RngStream s;
        const std::uint64_t k = mix64(base ^ mix64(sub_id ^ 0xD1B54A32D192ED03ULL));
        s.key_[0] = static_cast<std::uint32_t>(k);
        s.key_[1] = static_cast<std::uint32_t>(k >> 32);
        return s;
    }

    // Jump directly to a counter block. Used to give every Monte-Carlo trial
    // its own address space, independent of worker scheduling.
    void seek_block(std::uint64_t block_hi) {
        ctr_hi_ = block_hi;
        ctr_lo_ = 0;
        buf_pos_ = 4;
        have_spare_ = false;
    }

    std::uint32_t next_u32() {
        if (buf_pos_ >= 4) refill();
        return buf_[buf_pos_++];
    }

    std::uint64_t next_u64() {
        const std::uint64_t lo = next_u32();
        const std::uint64_t hi = next_u32();
        return (hi << 32) | lo;
    }

    /// Uniform in [0,1) with 53-bit resolution.
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform integer in [0, n). n must be >= 1.
    std::uint64_t uniform_below(std::uint64_t n) {
        // rejection sampling to kill modulo bias
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t v;
        do {
            v = next_u64();
        } while (v >= limit);
        return v % n;
    }

    /// Standard normal via Box-Muller (one value per call, pair cached).
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    static std::uint64_t mix64(std::uint64_t x) {
        // splitmix64 finalizer
        x += 0x9E3779B97F4A7C15ULL;
        x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
        x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
        return x ^ (x >> 31);
    }

private:
    void refill() {
        std::uint32_t c0 = static_cast<std::uint32_t>(ctr_lo_);
        std::uint32_t c1 = static_cast<std::uint32_t>(ctr_lo_ >> 32);
        std::uint32_t c2 = static_cast<std::uint32_t>(ctr_hi_);
        std::uint32_t c3 = static_cast<std::uint32_t>(ctr_hi_ >> 32);
        std::uint32_t k0 = key_[0];
        std::uint32_t k1 = key_[1];
        for (int round = 0; round < 10; ++round) {
            const std::uint64_t p0 = 0xD2511F53ULL * c0;
            const std::uint64_t p1 = 0xCD9E8D57ULL * c2;
            const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
            const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
            const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
            const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
            const std::uint32_t n0 = hi1 ^ c1 ^ k0;
            const std::uint32_t n1 = lo1;
            const std::uint32_t n2 = hi0 ^ c3 ^ k1;
            const std::uint32_t n3 = lo0;
            c0 = n0; c1 = n1; c2 = n2; c3 = n3;
            k0 += 0x9E3779B9U;
            k1 += 0xBB67AE85U;
        }
        buf_[0] = c0; buf_[1] = c1; buf_[2] = c2; buf_[3] = c3;
        buf_pos_ = 0;
        if (++ctr_lo_ == 0) ++ctr_hi_;  // 128-bit counter increment
    }

    std::array<std::uint32_t, 2> key_{};
    std::uint64_t ctr_hi_ = 0;
    std::uint64_t ctr_lo_ = 0;
    std::array<std::uint32_t, 4> buf_{};
    int buf_pos_ = 4;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace polarl
