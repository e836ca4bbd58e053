#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

namespace polarl {

using BitVec = std::vector<std::uint8_t>;

/// A polar code of length N given by its frozen-position mask (1 = frozen).
struct Construction {
    int n_bits = 0;  // N, power of two
    BitVec mask;     // length N, entries in {0,1}

    Construction() = default;
    Construction(int n, BitVec m);

    int frozen_count() const;
    int info_length() const { return n_bits - frozen_count(); }

    /// Information positions in ascending index order.
    std::vector<int> info_positions() const;

    bool operator==(const Construction& other) const {
        return n_bits == other.n_bits && mask == other.mask;
    }
};

/// One SCL survivor: decoded info word plus its path metric.
struct Candidate {
    BitVec info_word;
    double path_metric = 0.0;
};

/// SCL output list, ascending by path metric.
struct CandidateList {
    std::vector<Candidate> entries;
};

/// Channel log-likelihood ratios, natural log, positive favours bit 0.
struct LlrWord {
    std::vector<double> values;
};

/// Path-metric accumulation rule. Penalty adds |llr| only on sign
/// disagreement; Exact adds log(1+exp(-(1-2u)*llr)) so the metric ordering
/// coincides with likelihood ordering.
enum class PathMetricRule { Penalty, Exact };

bool is_power_of_two(int n);

/// u * F^{kron n} over GF(2), F = [[1,0],[1,1]], natural (non-bit-reversed)
/// index order. Involution: applying it twice gives back u.
BitVec polar_transform(const BitVec& u);

/// Place info bits on unfrozen positions (ascending), zeros on frozen ones,
/// then apply the polar transform.
BitVec encode(const BitVec& info_bits, const Construction& c);

/// Per-stage instrumentation: called after each pruning step with the bit
/// index just decided and the surviving u-prefixes.
using SclStageHook =
    std::function<void(int bit_index, const std::vector<BitVec>& survivor_prefixes)>;

/// LLR-domain successive cancellation list decoding. Frozen bits are forced
/// to zero (with metric penalty); at each info bit both extensions are
/// spawned and the L best metrics survive. Deterministic: metric ties keep
/// the earlier-created path first.
CandidateList scl_decode(const LlrWord& llr, const Construction& c, int list_size,
                         PathMetricRule rule = PathMetricRule::Penalty,
                         const SclStageHook& hook = nullptr);

/// Smallest-path-metric entry of a sorted list (ties: lowest index).
BitVec select_pm(const CandidateList& list);

/// True iff the transmitted info word survived anywhere in the list.
bool genie_success(const CandidateList& list, const BitVec& true_info);

}  // namespace polarl
