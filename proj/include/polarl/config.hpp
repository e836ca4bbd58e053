#pragma once

#include <string>
#include <utility>
#include <vector>

#include "polarl/agents.hpp"

namespace polarl {

struct CompareConfig {
    std::vector<int> k_values;
    double target_bler = 1e-2;
    std::pair<double, double> bracket{-2.0, 8.0};
};

struct EvalConfig {
    std::vector<double> esn0_grid;
    int info_len = -1;
};

/// Parsed experiment document. The JSON schema is sectioned:
/// code / channel / evaluator / ppo / ga / compare / eval plus mode, output.
/// Unknown keys are rejected with their full path.
struct ExperimentConfig {
    std::string mode = "rl";  // "rl" | "integrated"
    TaskConfig task;
    CompareConfig compare;
    EvalConfig eval;
    std::string output_dir = "out";
};

/// Parse from JSON text. Throws ConfigError with a byte-precise position
/// for syntax errors and a key path for schema errors.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);

/// Canonical serialization; parse(serialize(c)) reproduces every setting.
std::string serialize_config(const ExperimentConfig& cfg);

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace polarl
