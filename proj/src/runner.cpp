#include "polarl/runner.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>

namespace polarl {

namespace fs = std::filesystem;

namespace {

std::ofstream open_out(const std::string& dir, const std::string& name) {
    fs::create_directories(dir);
    std::ofstream f(fs::path(dir) / name);
    if (!f) throw std::runtime_error("cannot open for write: " + dir + "/" + name);
    return f;
}

void write_curve_csv(std::ostream& os, const std::vector<LearningCurvePoint>& curve) {
    os << "timestep,episode,episode_reward\n";
    os << std::setprecision(17);
    for (const auto& p : curve) {
        os << p.timestep << ',' << p.episode << ',' << p.reward << "\n";
    }
}

}  // namespace

TaskResult run_train(const ExperimentConfig& cfg, const std::string& out_dir,
                     std::ostream* log) {
    fs::create_directories(out_dir);
    RewardCache cache;
    const bool integrated = cfg.mode == "integrated";
    if (log) {
        *log << "training N=" << cfg.task.n_bits << " mode=" << cfg.mode
             << " timesteps=" << cfg.task.ppo.total_timesteps << "\n";
    }
    auto trajectories = open_out(out_dir, "trajectories.csv");
    trajectories << "episode,step,action,reward\n" << std::setprecision(17);
    TaskConfig task = cfg.task;
    task.trajectory_sink = [&trajectories](long episode, int step, int action, double r) {
        trajectories << episode << ',' << step << ',' << action << ',' << r << "\n";
    };
    TaskResult result = integrated ? train_integrated(task, cache) : train_rl(task, cache);

    {
        auto f = open_out(out_dir, "learning_curve.csv");
        write_curve_csv(f, result.curve);
    }
    save_checkpoint((fs::path(out_dir) / "final.net").string(), result.net);
    save_sequence(result.sequence, (fs::path(out_dir) / "sequence.txt").string());
    if (integrated) {
        save_population_archive((fs::path(out_dir) / "ga_populations.txt").string(),
                                result.ga_populations);
        save_checkpoint((fs::path(out_dir) / "pretrained.net").string(),
                        result.pretrained_net);
    }
    if (log) {
        *log << "episodes=" << result.curve.size()
             << " simulated_trials=" << result.simulated_trials
             << " cache_hits=" << result.cache_hits << "\n";
    }
    return result;
}

ComparisonReport run_compare(const ExperimentConfig& cfg, const NestedSequence& seq,
                             const std::string& out_dir, std::ostream* log) {
    if (seq.length() != cfg.task.n_bits) {
        throw std::runtime_error("run_compare: sequence length != code.N");
    }
    std::vector<int> ks = cfg.compare.k_values;
    if (ks.empty()) {
        for (int k = 4; k <= cfg.task.n_bits - 4; k += 4) ks.push_back(k);
    }
    std::sort(ks.begin(), ks.end());

    RewardSpec spec = cfg.task.reward_spec;
    RngStream base(cfg.task.seed, 0x62697365637400ULL);

    ComparisonReport report;
    for (int k : ks) {
        ComparisonRow row;
        row.info_len = k;
        const Construction learned = code_from_sequence(seq, k);
        const Construction baseline =
            dega_construct(cfg.task.n_bits, k, spec.channel.esn0_db);
        const Esn0Result l = find_esn0_at_bler(learned, spec, cfg.compare.target_bler,
                                               cfg.compare.bracket, base, cfg.task.workers);
        const Esn0Result b = find_esn0_at_bler(baseline, spec, cfg.compare.target_bler,
                                               cfg.compare.bracket, base, cfg.task.workers);
        row.esn0_learned_db = l.esn0_db;
        row.esn0_baseline_db = b.esn0_db;
        row.learned_resolved = l.resolved;
        row.baseline_resolved = b.resolved;
        row.delta_db = b.esn0_db - l.esn0_db;
        report.rows.push_back(row);
        if (log) {
            *log << "K=" << k << " learned=" << row.esn0_learned_db
                 << " dega=" << row.esn0_baseline_db << " delta=" << row.delta_db
                 << (row.learned_resolved && row.baseline_resolved ? "" : " (unresolved)")
                 << "\n";
        }
    }

    {
        auto f = open_out(out_dir, "report.csv");
        write_comparison_csv(f, report);
    }
    {
        auto f = open_out(out_dir, "plot.dat");
        f << "# K delta_db\n" << std::setprecision(17);
        for (const auto& r : report.rows) f << r.info_len << ' ' << r.delta_db << "\n";
    }
    return report;
}

void write_comparison_csv(std::ostream& os, const ComparisonReport& report) {
    os << "K,esn0_learned_db,esn0_baseline_db,delta_db,status\n";
    os << std::setprecision(17);
    for (const auto& r : report.rows) {
        os << r.info_len << ',' << r.esn0_learned_db << ',' << r.esn0_baseline_db << ','
           << r.delta_db << ','
           << (r.learned_resolved && r.baseline_resolved ? "ok" : "unresolved") << "\n";
    }
}

void run_eval(const ExperimentConfig& cfg, const Construction& c, std::ostream& os) {
    std::vector<double> grid = cfg.eval.esn0_grid;
    if (grid.empty()) grid.push_back(cfg.task.reward_spec.channel.esn0_db);
    RngStream base(cfg.task.seed, 0x6576616c00ULL);
    write_bler_csv_header(os);
    for (double esn0 : grid) {
        RewardSpec spec = cfg.task.reward_spec;
        spec.channel.esn0_db = esn0;
        const std::uint64_t sid = RngStream::mix64(mask_hash(c)) ^ spec.fingerprint();
        const BlerEstimate est =
            estimate_bler(c, spec, base.substream(sid), cfg.task.workers);
        write_bler_csv_row(os, c, spec, esn0, est);
    }
}

std::map<int, GaPopulation> run_ga(const ExperimentConfig& cfg, const std::string& out_dir,
                                   std::ostream* log) {
    RewardCache cache;
    RewardSpec spec = cfg.task.reward_spec;
    RewardFn reward_fn(spec, RewardSchedule::all(), &cache, cfg.task.seed, cfg.task.workers);
    FitnessFn fitness = [&](const Construction& c) { return reward_fn(c); };
    RngStream root(cfg.task.seed, 0);
    RngStream ga_rng = root.substream(stream_id::kGenetic);

    std::map<int, GaPopulation> pops;
    for (int k = 1; k <= cfg.task.n_bits - 1; ++k) {
        if (!cfg.task.schedule.contains(k)) continue;
        GaConfig ga = cfg.task.ga;
        ga.fitness_spec = spec;
        RngStream kr = ga_rng.substream(static_cast<std::uint64_t>(k));
        pops.emplace(k, ga_evolve(cfg.task.n_bits, k, ga, fitness, kr));
        if (log) {
            *log << "K=" << k << " best_fitness=" << pops.at(k).best().fitness << "\n";
        }
    }
    save_population_archive((fs::path(out_dir) / "ga_populations.txt").string(), pops);
    return pops;
}

Construction resolve_construction(const ExperimentConfig& cfg, const std::string& spec) {
    const int n = cfg.task.n_bits;
    if (spec.rfind("mask:", 0) == 0) {
        return Construction(n, mask_from_hex(spec.substr(5), n));
    }
    const int k = cfg.eval.info_len;
    if (k < 0) {
        throw std::runtime_error(
            "eval: config field \"eval.k\" is required for sequence or dega inputs");
    }
    if (spec == "dega") {
        return dega_construct(n, k, cfg.task.reward_spec.channel.esn0_db);
    }
    return code_from_sequence(load_sequence(spec), k);
}

}  // namespace polarl
