#include "polarl/evaluator.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <thread>
#include <vector>

namespace polarl {

namespace {

constexpr long kChunkTrials = 512;

std::uint64_t fnv1a(const void* data, std::size_t len, std::uint64_t h = 1469598103934665603ULL) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 1099511628211ULL;
    }
    return h;
}

std::uint64_t fnv1a_u64(std::uint64_t v, std::uint64_t h) { return fnv1a(&v, 8, h); }

BitVec random_info_word(RngStream& rng, int k) {
    BitVec w(k);
    int i = 0;
    while (i < k) {
        std::uint64_t bits = rng.next_u64();
        const int take = std::min(64, k - i);
        for (int b = 0; b < take; ++b) {
            w[i++] = static_cast<std::uint8_t>((bits >> b) & 1);
        }
    }
    return w;
}

struct ChunkResult {
    long trials = 0;
    long errors = 0;
};

ChunkResult run_chunk(const Construction& c, const RewardSpec& spec, RngStream base,
                      long first_trial, long n_trials) {
    ChunkResult res;
    res.trials = n_trials;
    const int k = c.info_length();
    for (long t = 0; t < n_trials; ++t) {
        RngStream rng = base;
        rng.seek_block(static_cast<std::uint64_t>(first_trial + t));
        const BitVec info = random_info_word(rng, k);
        const BitVec code = encode(info, c);
        const LlrWord llr = bpsk_awgn_llr(code, spec.channel, rng);
        const CandidateList list = scl_decode(llr, c, spec.list_size, spec.pm_rule);
        bool ok;
        if (spec.decoder == DecoderRule::SclPm) {
            ok = select_pm(list) == info;
        } else {
            ok = genie_success(list, info);
        }
        if (!ok) ++res.errors;
    }
    return res;
}

}  // namespace

const char* decoder_name(DecoderRule d) {
    return d == DecoderRule::SclPm ? "scl_pm" : "scl_genie";
}

std::optional<DecoderRule> decoder_from_name(const std::string& s) {
    if (s == "scl_pm") return DecoderRule::SclPm;
    if (s == "scl_genie") return DecoderRule::SclGenie;
    return std::nullopt;
}

std::uint64_t RewardSpec::fingerprint() const {
    std::uint64_t h = 1469598103934665603ULL;
    h = fnv1a_u64(static_cast<std::uint64_t>(decoder), h);
    h = fnv1a_u64(static_cast<std::uint64_t>(list_size), h);
    h = fnv1a_u64(std::bit_cast<std::uint64_t>(channel.esn0_db), h);
    h = fnv1a_u64(channel.seed, h);
    h = fnv1a_u64(static_cast<std::uint64_t>(target_error_events), h);
    h = fnv1a_u64(static_cast<std::uint64_t>(max_trials), h);
    h = fnv1a_u64(std::bit_cast<std::uint64_t>(effective_floor()), h);
    h = fnv1a_u64(static_cast<std::uint64_t>(pm_rule), h);
    return h;
}

std::size_t RewardCache::KeyHash::operator()(const Key& k) const {
    return static_cast<std::size_t>(fnv1a(k.mask.data(), k.mask.size(), k.fp ^ 0x517cc1b727220a95ULL));
}

double RewardCache::get_or_compute(const Construction& c, std::uint64_t fingerprint,
                                   const std::function<double()>& compute) {
    Key key{c.mask, fingerprint};
    std::promise<double> promise;
    std::shared_future<double> fut;
    bool owner = false;
    {
        std::lock_guard<std::mutex> lock(mu_);
        auto it = map_.find(key);
        if (it == map_.end()) {
            fut = promise.get_future().share();
            map_.emplace(std::move(key), fut);
            owner = true;
        } else {
            fut = it->second;
        }
    }
    if (owner) {
        misses_.fetch_add(1);
        const double v = compute();
        promise.set_value(v);
        return v;
    }
    hits_.fetch_add(1);
    return fut.get();
}

std::size_t RewardCache::size() const {
    std::lock_guard<std::mutex> lock(mu_);
    return map_.size();
}

std::uint64_t mask_hash(const Construction& c) {
    std::uint64_t h = fnv1a(c.mask.data(), c.mask.size());
    return fnv1a_u64(static_cast<std::uint64_t>(c.n_bits), h);
}

BlerEstimate estimate_bler(const Construction& c, const RewardSpec& spec, RngStream rng,
                           int workers, std::atomic<long>* trial_counter) {
    const int k = c.info_length();
    if (k < 1) throw std::invalid_argument("estimate_bler: K must be >= 1");
    if (spec.max_trials < spec.target_error_events) {
        throw std::invalid_argument("estimate_bler: max_trials < target_error_events");
    }
    workers = std::max(1, workers);

    const long n_chunks = (spec.max_trials + kChunkTrials - 1) / kChunkTrials;
    long done_chunks = 0;
    long cum_trials = 0;
    long cum_errors = 0;

    while (done_chunks < n_chunks && cum_errors < spec.target_error_events) {
        const long wave = std::min<long>(workers, n_chunks - done_chunks);
        std::vector<ChunkResult> results(wave);
        auto run_one = [&](long w) {
            const long chunk = done_chunks + w;
            const long first = chunk * kChunkTrials;
            const long n = std::min<long>(kChunkTrials, spec.max_trials - first);
            results[w] = run_chunk(c, spec, rng, first, n);
        };
        if (wave == 1) {
            run_one(0);
        } else {
            std::vector<std::thread> threads;
            threads.reserve(wave);
            for (long w = 0; w < wave; ++w) threads.emplace_back(run_one, w);
            for (auto& t : threads) t.join();
        }
        // fold in chunk order; discard whatever lies past the stopping chunk
        for (long w = 0; w < wave; ++w) {
            cum_trials += results[w].trials;
            cum_errors += results[w].errors;
            ++done_chunks;
            if (cum_errors >= spec.target_error_events) break;
        }
    }

    BlerEstimate est;
    est.trials = cum_trials;
    est.error_events = cum_errors;
    if (cum_errors == 0) {
        est.bler = spec.effective_floor();
        est.floored = true;
    } else {
        est.bler = static_cast<double>(cum_errors) / static_cast<double>(cum_trials);
    }
    if (trial_counter) trial_counter->fetch_add(cum_trials);
    return est;
}

namespace {

RngStream state_stream(const Construction& c, const RewardSpec& spec, const RngStream& rng) {
    return rng.substream(RngStream::mix64(mask_hash(c)) ^ spec.fingerprint());
}

int int_log2(int v) {
    int n = 0;
    while ((1 << (n + 1)) <= v) ++n;
    return n;
}

}  // namespace

double reward(const Construction& c, const RewardSpec& spec, RewardCache& cache,
              const RngStream& rng, int workers, std::atomic<long>* trial_counter) {
    const int k = c.info_length();
    if (k == 0) return 0.0;
    if (spec.decoder == DecoderRule::SclGenie && k <= int_log2(spec.list_size)) {
        return 0.0;  // list always holds the true word
    }
    return cache.get_or_compute(c, spec.fingerprint(), [&] {
        const BlerEstimate est = estimate_bler(c, spec, state_stream(c, spec, rng),
                                               workers, trial_counter);
        return -std::log10(est.bler);
    });
}

Esn0Result find_esn0_at_bler(const Construction& c, const RewardSpec& spec,
                             double target_bler, std::pair<double, double> bracket,
                             const RngStream& rng, int workers) {
    if (!(target_bler > 0.0 && target_bler < 1.0)) {
        throw std::invalid_argument("find_esn0_at_bler: target must be in (0,1)");
    }
    Esn0Result res;
    double lo = bracket.first;
    double hi = bracket.second;
    if (lo > hi) std::swap(lo, hi);

    auto bler_at = [&](double esn0_db) {
        RewardSpec probe = spec;
        probe.channel.esn0_db = esn0_db;
        ++res.probes;
        return estimate_bler(c, probe, state_stream(c, probe, rng), workers).bler;
    };

    double bler_lo = bler_at(lo);
    if (bler_lo == target_bler) {  // degenerate: already on target
        res.esn0_db = lo;
        res.resolved = true;
        return res;
    }
    double bler_hi = bler_at(hi);
    // BLER decreases in SNR; widen until lo is above target and hi below
    constexpr int kMaxWiden = 6;
    constexpr double kWidenStep = 2.0;
    for (int i = 0; i < kMaxWiden && bler_lo < target_bler; ++i) {
        lo -= kWidenStep;
        bler_lo = bler_at(lo);
    }
    for (int i = 0; i < kMaxWiden && bler_hi > target_bler; ++i) {
        hi += kWidenStep;
        bler_hi = bler_at(hi);
    }
    if (bler_lo < target_bler || bler_hi > target_bler) {
        res.resolved = false;
        res.esn0_db = 0.5 * (lo + hi);
        return res;
    }
    while (hi - lo > 0.05) {
        const double mid = 0.5 * (lo + hi);
        if (bler_at(mid) > target_bler) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    res.esn0_db = 0.5 * (lo + hi);
    res.resolved = true;
    return res;
}

RewardSchedule RewardSchedule::every(int stride) {
    RewardSchedule s;
    s.kind = Kind::Stride;
    s.stride = std::max(1, stride);
    return s;
}

RewardSchedule RewardSchedule::only(std::set<int> ks) {
    RewardSchedule s;
    s.kind = Kind::Explicit;
    s.ks = std::move(ks);
    return s;
}

bool RewardSchedule::contains(int info_len) const {
    switch (kind) {
        case Kind::All: return true;
        case Kind::Stride: return info_len % stride == 0;
        case Kind::Explicit: return ks.count(info_len) > 0;
    }
    return true;
}

RewardFn::RewardFn(RewardSpec spec, RewardSchedule schedule, RewardCache* cache,
                   std::uint64_t global_seed, int workers)
    : spec_(spec), schedule_(std::move(schedule)), cache_(cache),
      base_(global_seed, 0x7265776172646673ULL), workers_(workers) {}

double RewardFn::operator()(const Construction& c) const {
    const int k = c.info_length();
    if (k == 0 || !schedule_.contains(k)) return 0.0;
    return reward(c, spec_, *cache_, base_, workers_, &trials_);
}

void write_bler_csv_header(std::ostream& os) {
    os << "N,K,decoder,L,esn0_db,trials,errors,bler\n";
}

void write_bler_csv_row(std::ostream& os, const Construction& c, const RewardSpec& spec,
                        double esn0_db, const BlerEstimate& est) {
    os << c.n_bits << ',' << c.info_length() << ',' << decoder_name(spec.decoder) << ','
       << spec.list_size << ',' << esn0_db << ',' << est.trials << ',' << est.error_events
       << ',' << est.bler << "\n";
}

}  // namespace polarl
