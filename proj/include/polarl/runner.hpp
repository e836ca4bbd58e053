#pragma once

#include <iosfwd>
#include <string>

#include "polarl/config.hpp"

namespace polarl {

/// Train per config and write all artifacts under out_dir:
/// learning_curve.csv, trajectories.csv, final.net, sequence.txt, and for
/// integrated mode also ga_populations.txt and pretrained.net. All files
/// are deterministic functions of (config, seed).
TaskResult run_train(const ExperimentConfig& cfg, const std::string& out_dir,
                     std::ostream* log = nullptr);

struct ComparisonRow {
    int info_len = 0;
    double esn0_learned_db = 0.0;
    double esn0_baseline_db = 0.0;
    double delta_db = 0.0;  // baseline - learned; positive = learned better
    bool learned_resolved = false;
    bool baseline_resolved = false;
};

struct ComparisonReport {
    std::vector<ComparisonRow> rows;
};

/// Relative-EsN0 comparison of a nested sequence against per-K DE/GA at the
/// configured target BLER. Bracket failures mark the row unresolved and the
/// run continues. Writes report.csv and plot.dat under out_dir.
ComparisonReport run_compare(const ExperimentConfig& cfg, const NestedSequence& seq,
                             const std::string& out_dir, std::ostream* log = nullptr);

/// BLER sweep of one construction over eval.esn0_grid; CSV to `os`.
void run_eval(const ExperimentConfig& cfg, const Construction& c, std::ostream& os);

/// Genetic populations for every scheduled K; archive to out_dir.
std::map<int, GaPopulation> run_ga(const ExperimentConfig& cfg, const std::string& out_dir,
                                   std::ostream* log = nullptr);

/// "mask:<hex>" literal, "dega" baseline, or a sequence file path; the
/// info length comes from eval.k.
Construction resolve_construction(const ExperimentConfig& cfg, const std::string& spec);

void write_comparison_csv(std::ostream& os, const ComparisonReport& report);

}  // namespace polarl
