#include "polarl/codec.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>

namespace polarl {

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

Construction::Construction(int n, BitVec m) : n_bits(n), mask(std::move(m)) {
    if (!is_power_of_two(n_bits)) {
        throw std::invalid_argument("Construction: N must be a power of two");
    }
    if (static_cast<int>(mask.size()) != n_bits) {
        throw std::invalid_argument("Construction: mask length != N");
    }
    for (auto b : mask) {
        if (b > 1) throw std::invalid_argument("Construction: mask entries must be 0/1");
    }
}

int Construction::frozen_count() const {
    return static_cast<int>(std::count(mask.begin(), mask.end(), 1));
}

std::vector<int> Construction::info_positions() const {
    std::vector<int> pos;
    pos.reserve(info_length());
    for (int i = 0; i < n_bits; ++i) {
        if (mask[i] == 0) pos.push_back(i);
    }
    return pos;
}

BitVec polar_transform(const BitVec& u) {
    const int n = static_cast<int>(u.size());
    if (!is_power_of_two(n)) {
        throw std::invalid_argument("polar_transform: length must be a power of two");
    }
    BitVec x = u;
    for (int half = 1; half < n; half <<= 1) {
        for (int start = 0; start < n; start += 2 * half) {
            for (int i = start; i < start + half; ++i) {
                x[i] ^= x[i + half];
            }
        }
    }
    return x;
}

BitVec encode(const BitVec& info_bits, const Construction& c) {
    const int k = c.info_length();
    if (static_cast<int>(info_bits.size()) != k) {
        throw std::invalid_argument("encode: info word length != K");
    }
    BitVec u(c.n_bits, 0);
    int next = 0;
    for (int i = 0; i < c.n_bits; ++i) {
        if (c.mask[i] == 0) u[i] = info_bits[next++];
    }
    return polar_transform(u);
}

namespace {

// exact boxplus: 2*atanh(tanh(a/2)*tanh(b/2)), in stable log form
inline double llr_f(double a, double b) {
    const double s = (a < 0) == (b < 0) ? 1.0 : -1.0;
    const double m = std::min(std::fabs(a), std::fabs(b));
    return s * m + std::log1p(std::exp(-std::fabs(a + b))) -
           std::log1p(std::exp(-std::fabs(a - b)));
}

inline double llr_g(double a, double b, std::uint8_t u_left) {
    return u_left ? b - a : b + a;
}

inline double pm_step(double lambda, std::uint8_t u, PathMetricRule rule) {
    const double signed_llr = u ? -lambda : lambda;
    if (rule == PathMetricRule::Exact) {
        return std::log1p(std::exp(-signed_llr));
    }
    return signed_llr < 0 ? -signed_llr : 0.0;
}

// Per-path decoder memory, flat layout. llr holds stages 1..n (stage 0 is
// the shared channel word); bits[d] holds the left-child codeword of the
// active node at depth d.
struct PathState {
    std::vector<double> llr;     // sum of (N>>d) for d=1..n  == N-1
    std::vector<std::uint8_t> bits;  // sum of (N>>(d+1)) for d=0..n-1 == N-1
    BitVec u;
    double pm = 0.0;
};

struct Layout {
    int n_stages = 0;  // n = log2(N)
    int n = 0;
    std::vector<int> llr_off;   // llr_off[d] for d=1..n
    std::vector<int> bit_off;   // bit_off[d] for d=0..n-1

    explicit Layout(int N) : n(N) {
        n_stages = 0;
        while ((1 << n_stages) < N) ++n_stages;
        llr_off.assign(n_stages + 1, 0);
        int acc = 0;
        for (int d = 1; d <= n_stages; ++d) {
            llr_off[d] = acc;
            acc += N >> d;
        }
        bit_off.assign(std::max(n_stages, 1), 0);
        acc = 0;
        for (int d = 0; d < n_stages; ++d) {
            bit_off[d] = acc;
            acc += N >> (d + 1);
        }
    }
};

class SclDecoder {
public:
    SclDecoder(const LlrWord& llr, const Construction& c, int list_size,
               PathMetricRule rule, const SclStageHook& hook)
        : chan_(llr.values), c_(c), L_(list_size), rule_(rule), hook_(hook),
          lay_(c.n_bits) {}

    CandidateList run() {
        const int N = c_.n_bits;
        paths_.clear();
        paths_.push_back(make_path());

        for (int phi = 0; phi < N; ++phi) {
            compute_decision_llrs(phi);
            if (c_.mask[phi]) {
                extend_frozen(phi);
            } else {
                extend_info(phi);
            }
            update_partial_sums(phi);
            if (hook_) {
                std::vector<BitVec> prefixes;
                prefixes.reserve(paths_.size());
                for (const auto& p : paths_) {
                    prefixes.emplace_back(p.u.begin(), p.u.begin() + phi + 1);
                }
                hook_(phi, prefixes);
            }
        }

        CandidateList out;
        std::vector<int> order(paths_.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
            return paths_[a].pm < paths_[b].pm;
        });
        const auto info_pos = c_.info_positions();
        for (int idx : order) {
            Candidate cand;
            cand.path_metric = paths_[idx].pm;
            cand.info_word.reserve(info_pos.size());
            for (int p : info_pos) cand.info_word.push_back(paths_[idx].u[p]);
            out.entries.push_back(std::move(cand));
        }
        return out;
    }

private:
    PathState make_path() const {
        PathState p;
        p.llr.assign(lay_.n > 1 ? lay_.n - 1 : 0, 0.0);
        p.bits.assign(lay_.n > 1 ? lay_.n - 1 : 0, 0);
        p.u.assign(lay_.n, 0);
        return p;
    }

    inline const double* stage_llr_c(const PathState& p, int d) const {
        return d == 0 ? chan_.data() : p.llr.data() + lay_.llr_off[d];
    }

    // Recompute decision LLRs down to the leaf. Only stages whose direction
    // changed since the previous bit need refreshing.
    void compute_decision_llrs(int phi) {
        const int n = lay_.n_stages;
        if (n == 0) {
            decision_.assign(paths_.size(), chan_[0]);
            return;
        }
        int first = 0;
        if (phi > 0) {
            int t = 0;
            while (((phi >> t) & 1) == 0) ++t;  // trailing zeros
            first = n - 1 - t;
        }
        decision_.resize(paths_.size());
        for (std::size_t pi = 0; pi < paths_.size(); ++pi) {
            PathState& p = paths_[pi];
            for (int d = first; d < n; ++d) {
                const double* src = stage_llr_c(p, d);
                const int half = lay_.n >> (d + 1);
                const int dir = (phi >> (n - 1 - d)) & 1;
                double* dst = p.llr.data() + lay_.llr_off[d + 1];
                if (dir == 0) {
                    for (int i = 0; i < half; ++i) dst[i] = llr_f(src[i], src[i + half]);
                } else {
                    const std::uint8_t* left = p.bits.data() + lay_.bit_off[d];
                    for (int i = 0; i < half; ++i) dst[i] = llr_g(src[i], src[i + half], left[i]);
                }
            }
            decision_[pi] = p.llr[lay_.llr_off[n]];
        }
    }

    void extend_frozen(int phi) {
        for (std::size_t pi = 0; pi < paths_.size(); ++pi) {
            paths_[pi].u[phi] = 0;
            paths_[pi].pm += pm_step(decision_[pi], 0, rule_);
        }
    }

    void extend_info(int phi) {
        struct Ext {
            double pm;
            int parent;
            std::uint8_t bit;
        };
        std::vector<Ext> exts;
        exts.reserve(paths_.size() * 2);
        for (std::size_t pi = 0; pi < paths_.size(); ++pi) {
            const double lam = decision_[pi];
            exts.push_back({paths_[pi].pm + pm_step(lam, 0, rule_),
                            static_cast<int>(pi), 0});
            exts.push_back({paths_[pi].pm + pm_step(lam, 1, rule_),
                            static_cast<int>(pi), 1});
        }
        // stable sort keeps (parent order, bit 0 first) on metric ties
        std::stable_sort(exts.begin(), exts.end(),
                         [](const Ext& a, const Ext& b) { return a.pm < b.pm; });
        const std::size_t keep = std::min<std::size_t>(L_, exts.size());

        // count how many children each parent keeps so we can move instead
        // of copy when possible
        std::vector<int> uses(paths_.size(), 0);
        for (std::size_t i = 0; i < keep; ++i) ++uses[exts[i].parent];

        std::vector<PathState> next;
        next.reserve(keep);
        for (std::size_t i = 0; i < keep; ++i) {
            const Ext& e = exts[i];
            if (--uses[e.parent] > 0) {
                next.push_back(paths_[e.parent]);  // copy, sibling still pending
            } else {
                next.push_back(std::move(paths_[e.parent]));
            }
            next.back().u[phi] = e.bit;
            next.back().pm = e.pm;
        }
        paths_ = std::move(next);
    }

    // Fold the freshly decided leaf bit upward into stored partial sums.
    void update_partial_sums(int phi) {
        const int n = lay_.n_stages;
        if (n == 0) return;
        for (auto& p : paths_) {
            scratch_.assign(1, p.u[phi]);
            int d = n - 1;
            for (; d >= 0; --d) {
                const int dir = (phi >> (n - 1 - d)) & 1;
                std::uint8_t* stored = p.bits.data() + lay_.bit_off[d];
                const int sz = static_cast<int>(scratch_.size());
                if (dir == 0) {
                    std::memcpy(stored, scratch_.data(), sz);
                    break;
                }
                // finished a right child: parent codeword = [left^right, right]
                combined_.resize(2 * sz);
                for (int i = 0; i < sz; ++i) {
                    combined_[i] = stored[i] ^ scratch_[i];
                    combined_[i + sz] = scratch_[i];
                }
                scratch_.swap(combined_);
            }
        }
    }

    const std::vector<double>& chan_;
    const Construction& c_;
    int L_;
    PathMetricRule rule_;
    const SclStageHook& hook_;
    Layout lay_;
    std::vector<PathState> paths_;
    std::vector<double> decision_;
    std::vector<std::uint8_t> scratch_;
    std::vector<std::uint8_t> combined_;
};

}  // namespace

CandidateList scl_decode(const LlrWord& llr, const Construction& c, int list_size,
                         PathMetricRule rule, const SclStageHook& hook) {
    if (list_size < 1) throw std::invalid_argument("scl_decode: L must be >= 1");
    if (static_cast<int>(llr.values.size()) != c.n_bits) {
        throw std::invalid_argument("scl_decode: LLR length != N");
    }
    SclDecoder dec(llr, c, list_size, rule, hook);
    return dec.run();
}

BitVec select_pm(const CandidateList& list) {
    if (list.entries.empty()) throw std::invalid_argument("select_pm: empty list");
    std::size_t best = 0;
    for (std::size_t i = 1; i < list.entries.size(); ++i) {
        if (list.entries[i].path_metric < list.entries[best].path_metric) best = i;
    }
    return list.entries[best].info_word;
}

bool genie_success(const CandidateList& list, const BitVec& true_info) {
    for (const auto& e : list.entries) {
        if (e.info_word == true_info) return true;
    }
    return false;
}

}  // namespace polarl
