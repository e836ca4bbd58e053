#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "polarl/codec.hpp"

namespace polarl {

/// Ordering of all N subchannels, frozen-first: order[0] is the first index
/// to freeze; the last K entries form the information set of the (N,K) code.
struct NestedSequence {
    std::vector<int> order;

    int length() const { return static_cast<int>(order.size()); }
};

/// Per-subchannel reliability metric, larger = more reliable.
struct Reliability {
    std::vector<double> values;
};

/// Mean-LLR density evolution under the Gaussian approximation, two-segment
/// phi. Root mean is 2/sigma^2 at the design SNR; each level doubles the mean
/// on the variable branch and applies the check transform on the other.
Reliability dega_reliability(int n_bits, double design_snr_db);

/// Freeze the N-K least reliable subchannels (ties freeze the lower index).
Construction dega_construct(int n_bits, int info_len, double design_snr_db);

// two-segment Gaussian-approximation helpers, exposed for oracle tests
double dega_phi(double x);
double dega_phi_inv(double y);
double dega_check_transform(double m);

/// Keep entries < n_bits, preserving order.
NestedSequence extract_subsequence(const NestedSequence& seq, int n_bits);

/// Mask freezing everything but the last K entries of the sequence.
Construction code_from_sequence(const NestedSequence& seq, int info_len);

/// Actions of one full episode, in the order taken (first action = first
/// frozen index). Rejects non-permutations.
NestedSequence sequence_from_trajectory(const std::vector<int>& actions);

bool is_permutation_of_range(const std::vector<int>& v);

// Sequence file format: first line "N=<int>", second line space-separated
// frozen-first indices.
void save_sequence(const NestedSequence& seq, const std::string& path);
NestedSequence load_sequence(const std::string& path);
void write_sequence(const NestedSequence& seq, std::ostream& os);
NestedSequence read_sequence(std::istream& is);

/// CSV export of per-subchannel reliabilities: header "index,reliability".
void write_reliability_csv(const Reliability& rel, std::ostream& os);

}  // namespace polarl
