#include <doctest.h>

#include <atomic>
#include <cmath>
#include <sstream>
#include <thread>

#include "polarl/construction.hpp"
#include "polarl/evaluator.hpp"

using namespace polarl;

namespace {

RewardSpec quick_spec(DecoderRule rule, double esn0, long events = 50, long cap = 20000) {
    RewardSpec s;
    s.decoder = rule;
    s.list_size = 8;
    s.channel = {esn0, 0};
    s.target_error_events = events;
    s.max_trials = cap;
    return s;
}

}  // namespace

TEST_CASE("noiseless channel floors the estimate") {
    const Construction c = dega_construct(8, 4, 2.0);
    RewardSpec spec = quick_spec(DecoderRule::SclPm, 60.0, 10, 2000);
    const BlerEstimate est = estimate_bler(c, spec, RngStream(1, 1));
    CHECK(est.floored);
    CHECK(est.error_events == 0);
    CHECK(est.trials == 2000);
    CHECK(est.bler == doctest::Approx(1.0 / 2000));
}

TEST_CASE("genie with L >= 2^K never errs") {
    const Construction c(8, BitVec(8, 0));  // K = 8, nothing frozen
    RewardSpec spec = quick_spec(DecoderRule::SclGenie, 0.0, 10, 1000);
    spec.list_size = 256;
    const BlerEstimate est = estimate_bler(c, spec, RngStream(2, 1));
    CHECK(est.floored);
    CHECK(est.bler == doctest::Approx(1.0 / 1000));
}

TEST_CASE("estimate is identical for any worker count") {
    const Construction c = dega_construct(16, 8, 1.0);
    RewardSpec spec = quick_spec(DecoderRule::SclPm, 1.0, 100, 50000);
    const BlerEstimate a = estimate_bler(c, spec, RngStream(3, 9), 1);
    const BlerEstimate b = estimate_bler(c, spec, RngStream(3, 9), 4);
    CHECK(a.bler == b.bler);
    CHECK(a.trials == b.trials);
    CHECK(a.error_events == b.error_events);
}

TEST_CASE("SC estimate agrees with an independent straight-line simulation") {
    // same Monte-Carlo physics, written independently: sequential loop,
    // disjoint seed space, no chunking
    const Construction c = dega_construct(8, 4, 3.0);
    RewardSpec spec = quick_spec(DecoderRule::SclPm, 3.0, 2000, 2000000);
    spec.list_size = 1;
    const BlerEstimate est = estimate_bler(c, spec, RngStream(5, 0), 2);

    RngStream rng(99, 1234);  // disjoint stream
    long errors = 0;
    const long trials = 40000;
    for (long t = 0; t < trials; ++t) {
        BitVec info(4);
        for (auto& b : info) b = static_cast<std::uint8_t>(rng.next_u32() & 1);
        const LlrWord llr = bpsk_awgn_llr(encode(info, c), spec.channel, rng);
        const CandidateList list = scl_decode(llr, c, 1);
        if (select_pm(list) != info) ++errors;
    }
    const double oracle = static_cast<double>(errors) / trials;
    const double sigma = std::sqrt(oracle * (1 - oracle) / trials +
                                   est.bler * (1 - est.bler) / est.trials);
    CHECK(std::fabs(est.bler - oracle) <= 3.0 * sigma);
}

TEST_CASE("genie never loses to pm on shared noise") {
    const Construction c = dega_construct(32, 16, 2.0);
    // force both rules through the exact same trials: fixed trial budget
    RewardSpec pm = quick_spec(DecoderRule::SclPm, 2.0, 2000, 2000);
    RewardSpec genie = pm;
    genie.decoder = DecoderRule::SclGenie;
    const BlerEstimate p = estimate_bler(c, pm, RngStream(7, 3));
    const BlerEstimate g = estimate_bler(c, genie, RngStream(7, 3));
    CHECK(p.trials == g.trials);
    CHECK(g.error_events <= p.error_events);
}

TEST_CASE("reward: formula, genie shortcut, and cache transparency") {
    RewardCache cache;
    std::atomic<long> trials{0};

    const Construction c = dega_construct(8, 3, 2.0);
    RewardSpec genie = quick_spec(DecoderRule::SclGenie, 2.0);
    // K=3 <= log2(8): footnote rule, no simulation at all
    CHECK(reward(c, genie, cache, RngStream(11, 0), 1, &trials) == 0.0);
    CHECK(trials.load() == 0);
    CHECK(cache.size() == 0);

    const Construction c2 = dega_construct(8, 4, 2.0);
    RewardSpec pm = quick_spec(DecoderRule::SclPm, 2.0, 50, 5000);
    const double r1 = reward(c2, pm, cache, RngStream(11, 0), 1, &trials);
    const long trials_after_first = trials.load();
    CHECK(trials_after_first > 0);
    const double r2 = reward(c2, pm, cache, RngStream(11, 0), 1, &trials);
    CHECK(r1 == r2);
    CHECK(trials.load() == trials_after_first);  // cache hit, no second run
    CHECK(cache.hits() == 1);

    // reward equals -log10(bler) of the same estimate
    const std::uint64_t sid = RngStream::mix64(mask_hash(c2)) ^ pm.fingerprint();
    const BlerEstimate est = estimate_bler(c2, pm, RngStream(11, 0).substream(sid));
    CHECK(r1 == doctest::Approx(-std::log10(est.bler)).epsilon(1e-12));

    // zero info length: reward 0 by definition
    const Construction all_frozen(8, BitVec(8, 1));
    CHECK(reward(all_frozen, pm, cache, RngStream(11, 0), 1, &trials) == 0.0);
}

TEST_CASE("higher measured BLER gives strictly smaller reward") {
    RewardCache cache;
    RewardSpec pm = quick_spec(DecoderRule::SclPm, 1.0, 100, 40000);
    const Construction good = dega_construct(16, 8, 1.0);
    // intentionally bad code: freeze the most reliable half
    BitVec bad_mask(16, 0);
    const Construction inverse = dega_construct(16, 8, 1.0);
    for (int i = 0; i < 16; ++i) bad_mask[i] = inverse.mask[i] ? 0 : 1;
    const Construction bad(16, bad_mask);
    const double r_good = reward(good, pm, cache, RngStream(13, 0));
    const double r_bad = reward(bad, pm, cache, RngStream(13, 0));
    CHECK(r_good > r_bad);
}

TEST_CASE("cache computes exactly once under concurrency") {
    RewardCache cache;
    std::atomic<int> computed{0};
    const Construction c = dega_construct(8, 4, 2.0);
    auto compute = [&] {
        computed.fetch_add(1);
        std::this_thread::sleep_for(std::chrono::milliseconds(10));
        return 1.25;
    };
    std::vector<std::thread> threads;
    std::vector<double> results(8, 0.0);
    for (int i = 0; i < 8; ++i) {
        threads.emplace_back(
            [&, i] { results[i] = cache.get_or_compute(c, 42, compute); });
    }
    for (auto& t : threads) t.join();
    CHECK(computed.load() == 1);
    for (double r : results) CHECK(r == 1.25);
}

TEST_CASE("bisection: degenerate endpoint, monotonicity, grid oracle") {
    const Construction c = dega_construct(16, 8, 2.0);
    RewardSpec spec = quick_spec(DecoderRule::SclPm, 0.0, 200, 40000);
    spec.list_size = 1;
    RngStream base(17, 0);

    SUBCASE("left endpoint already on target returns it") {
        RewardSpec probe = spec;
        probe.channel.esn0_db = 1.0;
        const std::uint64_t sid = RngStream::mix64(mask_hash(c)) ^ probe.fingerprint();
        const double bler_at_lo = estimate_bler(c, probe, base.substream(sid)).bler;
        const Esn0Result res = find_esn0_at_bler(c, spec, bler_at_lo, {1.0, 6.0}, base);
        CHECK(res.resolved);
        CHECK(res.esn0_db == 1.0);
    }

    SUBCASE("target 1e-2 needs at least the SNR of target 1e-1") {
        const Esn0Result strict = find_esn0_at_bler(c, spec, 1e-2, {-2.0, 8.0}, base);
        const Esn0Result loose = find_esn0_at_bler(c, spec, 1e-1, {-2.0, 8.0}, base);
        REQUIRE(strict.resolved);
        REQUIRE(loose.resolved);
        CHECK(strict.esn0_db >= loose.esn0_db);
    }

    SUBCASE("agrees with a dense 0.1 dB grid sweep") {
        const Construction c32 = dega_construct(32, 16, 2.0);
        RewardSpec s32 = quick_spec(DecoderRule::SclPm, 0.0, 200, 40000);
        const Esn0Result res = find_esn0_at_bler(c32, s32, 1e-2, {0.0, 5.0}, base);
        REQUIRE(res.resolved);
        double crossing = 5.0;
        for (double e = 0.0; e <= 5.0; e += 0.1) {
            RewardSpec probe = s32;
            probe.channel.esn0_db = e;
            const std::uint64_t sid =
                RngStream::mix64(mask_hash(c32)) ^ probe.fingerprint();
            if (estimate_bler(c32, probe, base.substream(sid)).bler <= 1e-2) {
                crossing = e;
                break;
            }
        }
        CHECK(std::fabs(res.esn0_db - crossing) <= 0.1);
    }

    SUBCASE("impossible bracket reports unresolved") {
        const Esn0Result res = find_esn0_at_bler(c, spec, 1e-30, {0.0, 1.0}, base);
        CHECK_FALSE(res.resolved);
    }
}

TEST_CASE("reward schedule filters info lengths") {
    CHECK(RewardSchedule::all().contains(3));
    const RewardSchedule every4 = RewardSchedule::every(4);
    CHECK(every4.contains(8));
    CHECK_FALSE(every4.contains(9));
    const RewardSchedule some = RewardSchedule::only({2, 5});
    CHECK(some.contains(5));
    CHECK_FALSE(some.contains(4));
}

TEST_CASE("bler csv schema") {
    std::ostringstream os;
    write_bler_csv_header(os);
    const Construction c = dega_construct(8, 4, 2.0);
    RewardSpec spec = quick_spec(DecoderRule::SclPm, 2.0, 10, 1000);
    BlerEstimate est;
    est.bler = 0.125;
    est.trials = 80;
    est.error_events = 10;
    write_bler_csv_row(os, c, spec, 2.0, est);
    CHECK(os.str() == "N,K,decoder,L,esn0_db,trials,errors,bler\n8,4,scl_pm,8,2,80,10,0.125\n");
}
