#include <doctest.h>

#include <cmath>

#include "polarl/channel.hpp"

using namespace polarl;

TEST_CASE("noiseless limit keeps signs") {
    RngStream rng(1, 0);
    BitVec word{0, 1, 1, 0, 1, 0, 0, 1};
    const LlrWord llr = bpsk_awgn_llr(word, {60.0, 0}, rng);
    for (std::size_t i = 0; i < word.size(); ++i) {
        CHECK(std::signbit(llr.values[i]) == (word[i] == 1));
    }
}

TEST_CASE("llr mean at 0 dB is 2/sigma^2 = 4") {
    RngStream rng(2, 0);
    const BitVec zero(8, 0);
    double sum = 0.0;
    long count = 0;
    for (int i = 0; i < 100000 / 8; ++i) {
        const LlrWord llr = bpsk_awgn_llr(zero, {0.0, 0}, rng);
        for (double v : llr.values) {
            sum += v;
            ++count;
        }
    }
    CHECK(sum / count == doctest::Approx(4.0).epsilon(0.03));
}

TEST_CASE("fixed stream reproduces bit-identical words") {
    RngStream a(9, 77);
    RngStream b(9, 77);
    const BitVec word{1, 0, 0, 1};
    const LlrWord x = bpsk_awgn_llr(word, {1.5, 0}, a);
    const LlrWord y = bpsk_awgn_llr(word, {1.5, 0}, b);
    CHECK(x.values == y.values);
}

TEST_CASE("empirical noise variance within 1% of sigma^2") {
    const double esn0 = 2.0;
    const double sigma2 = noise_variance(esn0);
    RngStream rng(3, 1);
    const BitVec zero(64, 0);
    double sum = 0.0, sum2 = 0.0;
    long n = 0;
    for (int i = 0; i < 1000000 / 64; ++i) {
        const LlrWord llr = bpsk_awgn_llr(zero, {esn0, 0}, rng);
        for (double v : llr.values) {
            // invert llr = 2 y / sigma^2, noise = y - 1
            const double noise = v * sigma2 / 2.0 - 1.0;
            sum += noise;
            sum2 += noise * noise;
            ++n;
        }
    }
    const double var = sum2 / n - (sum / n) * (sum / n);
    CHECK(var == doctest::Approx(sigma2).epsilon(0.01));
}
