#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <future>
#include <iosfwd>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>

#include "polarl/channel.hpp"
#include "polarl/codec.hpp"

namespace polarl {

enum class DecoderRule { SclPm, SclGenie };

const char* decoder_name(DecoderRule d);
std::optional<DecoderRule> decoder_from_name(const std::string& s);

/// Everything that pins down one reward measurement. The fingerprint of all
/// fields (plus the seed policy) keys the cache.
struct RewardSpec {
    DecoderRule decoder = DecoderRule::SclPm;
    int list_size = 8;
    ChannelSpec channel;
    long target_error_events = 1000;
    long max_trials = 1000000;
    double bler_floor = 0.0;  // <=0: use 1/max_trials
    PathMetricRule pm_rule = PathMetricRule::Penalty;

    double effective_floor() const {
        return bler_floor > 0.0 ? bler_floor : 1.0 / static_cast<double>(max_trials);
    }
    std::uint64_t fingerprint() const;
};

struct BlerEstimate {
    double bler = 0.0;
    long trials = 0;
    long error_events = 0;
    bool floored = false;
};

/// Concurrent memo table: (construction mask, spec fingerprint) -> reward.
/// get_or_compute runs the computation exactly once per key.
class RewardCache {
public:
    double get_or_compute(const Construction& c, std::uint64_t fingerprint,
                          const std::function<double()>& compute);
    std::size_t size() const;
    long hits() const { return hits_.load(); }
    long misses() const { return misses_.load(); }

private:
    struct Key {
        BitVec mask;
        std::uint64_t fp;
        bool operator==(const Key& o) const { return fp == o.fp && mask == o.mask; }
    };
    struct KeyHash {
        std::size_t operator()(const Key& k) const;
    };
    mutable std::mutex mu_;
    std::unordered_map<Key, std::shared_future<double>, KeyHash> map_;
    std::atomic<long> hits_{0};
    std::atomic<long> misses_{0};
};

std::uint64_t mask_hash(const Construction& c);

/// Monte-Carlo BLER: draw a uniform info word, encode, run the channel,
/// decode, judge by the decoder rule; repeat until target_error_events are
/// seen or max_trials is hit. Trials are chunked and each trial owns a fixed
/// counter block of `rng`, so the result is identical for any worker count.
/// With zero errors at the cap the estimate is floored.
BlerEstimate estimate_bler(const Construction& c, const RewardSpec& spec, RngStream rng,
                           int workers = 1, std::atomic<long>* trial_counter = nullptr);

/// r = -log10(BLER), memoized. Returns 0 without simulating when K = 0 or
/// when an SCL-Genie list can always hold the true word (K <= log2 L). The
/// Monte-Carlo substream is derived from (rng identity, mask hash, spec
/// fingerprint), making the reward a pure function of the state.
double reward(const Construction& c, const RewardSpec& spec, RewardCache& cache,
              const RngStream& rng, int workers = 1,
              std::atomic<long>* trial_counter = nullptr);

struct Esn0Result {
    double esn0_db = 0.0;
    bool resolved = false;
    int probes = 0;
};

/// Bisect EsN0 until the bracket is narrower than 0.05 dB around the SNR
/// where BLER crosses target_bler; the bracket is widened (up to a limit)
/// if it does not straddle the target. Probes share the per-state stream
/// derivation, so the search is deterministic.
Esn0Result find_esn0_at_bler(const Construction& c, const RewardSpec& spec,
                             double target_bler, std::pair<double, double> bracket,
                             const RngStream& rng, int workers = 1);

/// Which info lengths are simulated during training; others reward 0.
struct RewardSchedule {
    enum class Kind { All, Stride, Explicit };
    Kind kind = Kind::All;
    int stride = 1;
    std::set<int> ks;

    static RewardSchedule all() { return {}; }
    static RewardSchedule every(int stride);
    static RewardSchedule only(std::set<int> ks);
    bool contains(int info_len) const;
};

/// Environment-facing reward function: schedule filter + cache + evaluator.
class RewardFn {
public:
    RewardFn(RewardSpec spec, RewardSchedule schedule, RewardCache* cache,
             std::uint64_t global_seed, int workers = 1);

    double operator()(const Construction& c) const;
    long simulated_trials() const { return trials_.load(); }
    const RewardSpec& spec() const { return spec_; }

private:
    RewardSpec spec_;
    RewardSchedule schedule_;
    RewardCache* cache_;
    RngStream base_;
    int workers_;
    mutable std::atomic<long> trials_{0};
};

// BLER sweep CSV schema: N,K,decoder,L,esn0_db,trials,errors,bler
void write_bler_csv_header(std::ostream& os);
void write_bler_csv_row(std::ostream& os, const Construction& c, const RewardSpec& spec,
                        double esn0_db, const BlerEstimate& est);

}  // namespace polarl
