#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "polarl/channel.hpp"
#include "polarl/construction.hpp"
#include "polarl/rng.hpp"

using namespace polarl;

namespace {

// sampled density evolution: propagate LLR samples through exact check and
// variable combines, reliability = -P(L <= 0) per leaf
std::vector<double> sampled_de(int n_bits, double design_snr_db, int samples, RngStream& rng) {
    const double sigma2 = noise_variance(design_snr_db);
    const double mean = 2.0 / sigma2;
    const double std = std::sqrt(2.0 * mean);
    std::vector<std::vector<double>> level{std::vector<double>(samples)};
    for (auto& v : level[0]) v = mean + std * rng.gaussian();

    while (static_cast<int>(level.size()) < n_bits) {
        std::vector<std::vector<double>> next;
        for (auto& node : level) {
            // pair each sample with a uniformly shuffled partner
            std::vector<double> partner = node;
            for (int i = samples - 1; i > 0; --i) {
                std::swap(partner[i], partner[rng.uniform_below(i + 1)]);
            }
            std::vector<double> check(samples), var(samples);
            for (int i = 0; i < samples; ++i) {
                const double a = node[i];
                const double b = partner[i];
                const double t = std::tanh(a / 2.0) * std::tanh(b / 2.0);
                check[i] = 2.0 * std::atanh(std::clamp(t, -1.0 + 1e-15, 1.0 - 1e-15));
                var[i] = a + b;
            }
            next.push_back(std::move(check));
            next.push_back(std::move(var));
        }
        level = std::move(next);
    }
    std::vector<double> out;
    out.reserve(n_bits);
    for (auto& node : level) {
        long errors = 0;
        for (double v : node) {
            if (v <= 0.0) ++errors;
        }
        out.push_back(-static_cast<double>(errors) / samples);
    }
    return out;
}

double kendall_tau(const std::vector<double>& a, const std::vector<double>& b) {
    const int n = static_cast<int>(a.size());
    int concordant = 0, discordant = 0;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const double x = a[i] - a[j];
            const double y = b[i] - b[j];
            if (x * y > 0) ++concordant;
            else if (x * y < 0) ++discordant;
        }
    }
    return static_cast<double>(concordant - discordant) / (n * (n - 1) / 2);
}

bool dominates(int j, int i) {  // j covers i bitwise
    return (i & j) == i;
}

}  // namespace

TEST_CASE("dega recursion base and first level") {
    const Reliability r1 = dega_reliability(1, 2.0);
    CHECK(r1.values[0] == doctest::Approx(2.0 / noise_variance(2.0)));

    const Reliability r2 = dega_reliability(2, 2.0);
    CHECK(r2.values[0] < r2.values[1]);  // check-node leaf is less reliable
    CHECK(r2.values[1] == doctest::Approx(2.0 * r1.values[0]));
}

TEST_CASE("dega ordering matches sampled density evolution at N=8") {
    RngStream rng(21, 0);
    const Reliability ga = dega_reliability(8, 2.0);
    const std::vector<double> mc = sampled_de(8, 2.0, 1000000, rng);
    CHECK(kendall_tau(ga.values, mc) >= 0.95);
}

TEST_CASE("binary domination holds exhaustively up to N=64") {
    for (double snr : {0.0, 2.0, 5.0}) {
        for (int n : {2, 4, 8, 16, 32, 64}) {
            const Reliability r = dega_reliability(n, snr);
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j < n; ++j) {
                    if (i != j && dominates(j, i)) {
                        CHECK(r.values[j] >= r.values[i]);
                    }
                }
            }
        }
    }
}

TEST_CASE("dega_construct edge rates and tie direction") {
    CHECK(dega_construct(8, 8, 2.0).mask == BitVec(8, 0));
    CHECK(dega_construct(8, 0, 2.0).mask == BitVec(8, 1));

    const Construction c = dega_construct(8, 4, 2.0);
    CHECK(c.info_length() == 4);
    // frozen set must respect domination: no frozen index dominates an info index
    for (int i = 0; i < 8; ++i) {
        for (int j = 0; j < 8; ++j) {
            if (c.mask[j] == 1 && c.mask[i] == 0) {
                CHECK_FALSE(dominates(j, i));
            }
        }
    }
}

TEST_CASE("extract_subsequence filters by index, keeping order") {
    const NestedSequence seq{{0, 1, 2, 4, 3, 5, 6, 7}};
    const NestedSequence sub = extract_subsequence(seq, 4);
    CHECK(sub.order == std::vector<int>{0, 1, 2, 3});
    CHECK(extract_subsequence(seq, 8).order == seq.order);

    RngStream rng(5, 0);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<int> perm(16);
        for (int i = 0; i < 16; ++i) perm[i] = i;
        for (int i = 15; i > 0; --i) {
            std::swap(perm[i], perm[rng.uniform_below(i + 1)]);
        }
        const NestedSequence sub8 = extract_subsequence(NestedSequence{perm}, 8);
        CHECK(is_permutation_of_range(sub8.order));
        CHECK(sub8.length() == 8);
    }
}

TEST_CASE("code_from_sequence takes the last K entries as info") {
    const NestedSequence seq{{3, 1, 0, 2}};
    const Construction c = code_from_sequence(seq, 2);
    CHECK(c.mask == BitVec{0, 1, 0, 1});  // info {0,2}, frozen {3,1}

    CHECK(code_from_sequence(seq, 0).mask == BitVec(4, 1));

    // nesting by construction: frozen sets shrink as K grows
    for (int k = 0; k < 4; ++k) {
        const Construction big = code_from_sequence(seq, k);
        const Construction small = code_from_sequence(seq, k + 1);
        for (int i = 0; i < 4; ++i) {
            if (small.mask[i]) CHECK(big.mask[i] == 1);
        }
    }
}

TEST_CASE("sequence_from_trajectory keeps order and validates") {
    CHECK(sequence_from_trajectory({2, 0, 1, 3}).order == std::vector<int>{2, 0, 1, 3});
    CHECK_THROWS_AS(sequence_from_trajectory({0, 0, 1, 2}), std::invalid_argument);
    CHECK_THROWS_AS(sequence_from_trajectory({0, 1, 2, 4}), std::invalid_argument);
}

TEST_CASE("sequence file round trip") {
    const NestedSequence seq{{3, 1, 0, 2}};
    std::stringstream ss;
    write_sequence(seq, ss);
    CHECK(ss.str() == "N=4\n3 1 0 2\n");
    const NestedSequence back = read_sequence(ss);
    CHECK(back.order == seq.order);

    std::stringstream bad("N=4\n0 1 2 2\n");
    CHECK_THROWS(read_sequence(bad));
}
