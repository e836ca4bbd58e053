#include "polarl/construction.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "polarl/channel.hpp"

namespace polarl {

namespace {
// Trifonov-style two-segment approximation, breakpoint at x = 10.
constexpr double kPhiBreak = 10.0;
}  // namespace

double dega_phi(double x) {
    if (x < 0) throw std::invalid_argument("dega_phi: negative mean");
    if (x < kPhiBreak) {
        return std::min(1.0, std::exp(-0.4527 * std::pow(x, 0.86) + 0.0218));
    }
    return std::sqrt(M_PI / x) * std::exp(-x / 4.0) * (1.0 - 10.0 / (7.0 * x));
}

double dega_phi_inv(double y) {
    // The two segments disagree by ~2% at the breakpoint; route each target
    // value to the segment that can reach it and park the gap on the
    // breakpoint itself, which keeps the inverse weakly monotone.
    const double lo_val = dega_phi(kPhiBreak);                      // segment 2 side
    const double hi_val = std::exp(-0.4527 * std::pow(kPhiBreak, 0.86) + 0.0218);
    if (y >= 1.0) return 0.0;
    if (y <= 0.0) throw std::invalid_argument("dega_phi_inv: y must be in (0,1]");

    double lo, hi;
    if (y <= lo_val) {
        lo = kPhiBreak;
        hi = kPhiBreak * 2;
        while (dega_phi(hi) > y) hi *= 2;
    } else if (y < hi_val) {
        return kPhiBreak;
    } else {
        lo = 0.0;
        hi = kPhiBreak;
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (dega_phi(mid) > y) {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo < 1e-12 * std::max(1.0, hi)) break;
    }
    return 0.5 * (lo + hi);
}

double dega_check_transform(double m) {
    if (m <= 0) return 0.0;
    const double p = dega_phi(m);
    // 1 - (1-p)^2 without the cancellation that rounds tiny p to zero
    const double y = p * (2.0 - p);
    return dega_phi_inv(y);
}

Reliability dega_reliability(int n_bits, double design_snr_db) {
    if (!is_power_of_two(n_bits)) {
        throw std::invalid_argument("dega_reliability: N must be a power of two");
    }
    Reliability r;
    r.values.assign(1, 2.0 / noise_variance(design_snr_db));
    while (static_cast<int>(r.values.size()) < n_bits) {
        std::vector<double> next(r.values.size() * 2);
        for (std::size_t i = 0; i < r.values.size(); ++i) {
            const double m = r.values[i];
            // child order matches decoder recursion: check first, variable second
            next[2 * i] = dega_check_transform(m);
            next[2 * i + 1] = 2.0 * m;
        }
        r.values.swap(next);
    }
    return r;
}

Construction dega_construct(int n_bits, int info_len, double design_snr_db) {
    if (info_len < 0 || info_len > n_bits) {
        throw std::invalid_argument("dega_construct: K out of range");
    }
    const Reliability rel = dega_reliability(n_bits, design_snr_db);
    std::vector<int> idx(n_bits);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
        return rel.values[a] < rel.values[b];
    });
    BitVec mask(n_bits, 0);
    for (int i = 0; i < n_bits - info_len; ++i) mask[idx[i]] = 1;
    return Construction(n_bits, std::move(mask));
}

bool is_permutation_of_range(const std::vector<int>& v) {
    std::vector<char> seen(v.size(), 0);
    for (int x : v) {
        if (x < 0 || x >= static_cast<int>(v.size()) || seen[x]) return false;
        seen[x] = 1;
    }
    return true;
}

NestedSequence extract_subsequence(const NestedSequence& seq, int n_bits) {
    if (n_bits > seq.length()) {
        throw std::invalid_argument("extract_subsequence: N exceeds sequence length");
    }
    if (!is_power_of_two(n_bits)) {
        throw std::invalid_argument("extract_subsequence: N must be a power of two");
    }
    NestedSequence out;
    out.order.reserve(n_bits);
    for (int x : seq.order) {
        if (x < n_bits) out.order.push_back(x);
    }
    return out;
}

Construction code_from_sequence(const NestedSequence& seq, int info_len) {
    const int n = seq.length();
    if (info_len < 0 || info_len > n) {
        throw std::invalid_argument("code_from_sequence: K out of range");
    }
    if (!is_permutation_of_range(seq.order)) {
        throw std::invalid_argument("code_from_sequence: not a permutation");
    }
    BitVec mask(n, 0);
    for (int i = 0; i < n - info_len; ++i) mask[seq.order[i]] = 1;
    return Construction(n, std::move(mask));
}

NestedSequence sequence_from_trajectory(const std::vector<int>& actions) {
    if (!is_permutation_of_range(actions)) {
        throw std::invalid_argument("sequence_from_trajectory: actions are not a permutation");
    }
    return NestedSequence{actions};
}

void write_sequence(const NestedSequence& seq, std::ostream& os) {
    os << "N=" << seq.length() << "\n";
    for (int i = 0; i < seq.length(); ++i) {
        if (i) os << ' ';
        os << seq.order[i];
    }
    os << "\n";
}

NestedSequence read_sequence(std::istream& is) {
    std::string header;
    if (!std::getline(is, header) || header.rfind("N=", 0) != 0) {
        throw std::runtime_error("sequence file: expected first line \"N=<int>\"");
    }
    const int n = std::stoi(header.substr(2));
    NestedSequence seq;
    seq.order.reserve(n);
    int x;
    while (static_cast<int>(seq.order.size()) < n && (is >> x)) {
        seq.order.push_back(x);
    }
    if (seq.length() != n || !is_permutation_of_range(seq.order)) {
        throw std::runtime_error("sequence file: body is not a permutation of 0..N-1");
    }
    return seq;
}

void save_sequence(const NestedSequence& seq, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open for write: " + path);
    write_sequence(seq, f);
}

NestedSequence load_sequence(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open: " + path);
    return read_sequence(f);
}

void write_reliability_csv(const Reliability& rel, std::ostream& os) {
    os << "index,reliability\n";
    for (std::size_t i = 0; i < rel.values.size(); ++i) {
        os << i << ',' << rel.values[i] << "\n";
    }
}

}  // namespace polarl
