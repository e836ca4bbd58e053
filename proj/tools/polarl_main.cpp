#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "polarl/runner.hpp"

namespace fs = std::filesystem;
using namespace polarl;

namespace {

struct CommonOpts {
    std::string config_path;
    std::string output_override;
    std::uint64_t seed_override = 0;
    bool has_seed_override = false;
    int workers = 1;
};

ExperimentConfig load(const CommonOpts& opts) {
    ExperimentConfig cfg = load_config(opts.config_path);
    if (opts.has_seed_override) {
        cfg.task.seed = opts.seed_override;
        cfg.task.reward_spec.channel.seed = opts.seed_override;
    }
    if (!opts.output_override.empty()) cfg.output_dir = opts.output_override;
    cfg.task.workers = std::max(1, opts.workers);
    return cfg;
}

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "experiment config (JSON)")
        ->required();
    cmd->add_option("--seed", opts.seed_override, "override channel.seed")
        ->each([&](const std::string&) { opts.has_seed_override = true; });
    cmd->add_option("--workers", opts.workers, "Monte-Carlo worker threads");
    cmd->add_option("--output", opts.output_override, "override output directory");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"nested polar code construction by reinforcement learning"};
    app.require_subcommand(1);

    CommonOpts train_opts, compare_opts, eval_opts, ga_opts;
    std::string compare_seq, eval_input, export_ckpt, export_out, compare_baseline = "dega";

    CLI::App* train = app.add_subcommand("train", "train a construction policy");
    add_common(train, train_opts);

    CLI::App* compare = app.add_subcommand(
        "compare", "relative EsN0 of a nested sequence vs the DE/GA baseline");
    add_common(compare, compare_opts);
    compare->add_option("sequence", compare_seq, "nested sequence file")->required();
    compare->add_option("--baseline", compare_baseline, "baseline construction (dega)");

    CLI::App* eval = app.add_subcommand("eval", "BLER sweep of one construction");
    add_common(eval, eval_opts);
    eval->add_option("input", eval_input,
                     "sequence file, \"mask:<hex>\", or \"dega\"")
        ->required();

    CLI::App* ga = app.add_subcommand("ga", "evolve genetic populations per scheduled K");
    add_common(ga, ga_opts);

    CLI::App* exp = app.add_subcommand("export-sequence",
                                       "greedy sequence from a policy checkpoint");
    exp->add_option("checkpoint", export_ckpt, "policy checkpoint (.net)")->required();
    exp->add_option("--output", export_out, "sequence file (default: stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (train->parsed()) {
            const ExperimentConfig cfg = load(train_opts);
            run_train(cfg, cfg.output_dir, &std::cout);
        } else if (compare->parsed()) {
            if (compare_baseline != "dega") {
                std::cerr << "error: unsupported baseline \"" << compare_baseline << "\"\n";
                return 2;
            }
            const ExperimentConfig cfg = load(compare_opts);
            run_compare(cfg, load_sequence(compare_seq), cfg.output_dir, &std::cout);
        } else if (eval->parsed()) {
            const ExperimentConfig cfg = load(eval_opts);
            const Construction c = resolve_construction(cfg, eval_input);
            fs::create_directories(cfg.output_dir);
            std::ofstream f(fs::path(cfg.output_dir) / "bler.csv");
            run_eval(cfg, c, f);
            std::ifstream back(fs::path(cfg.output_dir) / "bler.csv");
            std::cout << back.rdbuf();
        } else if (ga->parsed()) {
            const ExperimentConfig cfg = load(ga_opts);
            fs::create_directories(cfg.output_dir);
            run_ga(cfg, cfg.output_dir, &std::cout);
        } else if (exp->parsed()) {
            const Checkpoint ck = load_checkpoint(export_ckpt);
            const NestedSequence seq = greedy_sequence(ck.net, ck.net.input_dim());
            if (export_out.empty()) {
                write_sequence(seq, std::cout);
            } else {
                save_sequence(seq, export_out);
            }
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
