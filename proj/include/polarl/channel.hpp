#pragma once

#include <cstdint>

#include "polarl/codec.hpp"
#include "polarl/rng.hpp"

namespace polarl {

/// BPSK-over-AWGN operating point. SNR is Es/N0 in dB with Es = 1.
struct ChannelSpec {
    double esn0_db = 0.0;
    std::uint64_t seed = 0;
};

/// Per-real-dimension noise variance: sigma^2 = 10^(-EsN0/10) / 2.
double noise_variance(double esn0_db);

/// Map bit b to symbol 1-2b, add N(0, sigma^2) noise, return llr_i = 2 y_i / sigma^2.
LlrWord bpsk_awgn_llr(const BitVec& codeword, const ChannelSpec& spec, RngStream& rng);

}  // namespace polarl
