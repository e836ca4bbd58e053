#pragma once

// Test-only reference implementations, kept independent of the library's
// decoding/encoding path.

#include <cmath>
#include <vector>

#include "polarl/codec.hpp"

namespace polarl::test {

// F^{kron n} built by explicit Kronecker products; row-major, F=[[1,0],[1,1]]
inline std::vector<BitVec> kronecker_generator(int n_bits) {
    std::vector<BitVec> g{{1}};
    int size = 1;
    while (size < n_bits) {
        std::vector<BitVec> next(2 * size, BitVec(2 * size, 0));
        for (int r = 0; r < size; ++r) {
            for (int c = 0; c < size; ++c) {
                // F (x) G = [[G, 0], [G, G]]
                next[r][c] = g[r][c];
                next[r + size][c] = g[r][c];
                next[r + size][c + size] = g[r][c];
            }
        }
        g.swap(next);
        size *= 2;
    }
    return g;
}

inline BitVec matvec_gf2(const BitVec& u, const std::vector<BitVec>& g) {
    const int n = static_cast<int>(u.size());
    BitVec x(n, 0);
    for (int r = 0; r < n; ++r) {
        if (!u[r]) continue;
        for (int c = 0; c < n; ++c) x[c] ^= g[r][c];
    }
    return x;
}

// generator-matrix encoder: zeros at frozen rows, info bits on the rest
inline BitVec oracle_encode(const BitVec& info, const Construction& c) {
    BitVec u(c.n_bits, 0);
    int next = 0;
    for (int i = 0; i < c.n_bits; ++i) {
        if (c.mask[i] == 0) u[i] = info[next++];
    }
    return matvec_gf2(u, kronecker_generator(c.n_bits));
}

// exhaustive maximum-likelihood decoding: the BPSK-AWGN likelihood of a
// codeword is monotone in the correlation sum (1-2x_i) * llr_i
inline BitVec ml_decode(const LlrWord& llr, const Construction& c, double* best_metric = nullptr) {
    const int k = c.info_length();
    BitVec best_info;
    double best = -1e300;
    for (long w = 0; w < (1L << k); ++w) {
        BitVec info(k);
        for (int b = 0; b < k; ++b) info[b] = static_cast<std::uint8_t>((w >> b) & 1);
        const BitVec x = oracle_encode(info, c);
        double corr = 0.0;
        for (int i = 0; i < c.n_bits; ++i) {
            corr += (x[i] ? -1.0 : 1.0) * llr.values[i];
        }
        if (corr > best) {
            best = corr;
            best_info = info;
        }
    }
    if (best_metric) *best_metric = best;
    return best_info;
}

}  // namespace polarl::test
