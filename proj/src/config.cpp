#include "polarl/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace polarl {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& msg) { throw ConfigError("config: " + msg); }

void check_keys(const json& obj, const std::string& path,
                const std::set<std::string>& allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!allowed.count(it.key())) {
            fail("unknown key \"" + (path.empty() ? it.key() : path + "." + it.key()) + "\"");
        }
    }
}

template <typename T>
T require(const json& obj, const std::string& path, const std::string& key) {
    if (!obj.contains(key)) fail("missing required field \"" + path + key + "\"");
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        fail("field \"" + path + key + "\" has the wrong type");
    }
}

template <typename T>
T get_or(const json& obj, const std::string& path, const std::string& key, T fallback) {
    if (!obj.contains(key)) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        fail("field \"" + path + key + "\" has the wrong type");
    }
}

RewardSchedule parse_schedule(const json& v, const std::string& path) {
    if (v.is_string()) {
        if (v.get<std::string>() == "all") return RewardSchedule::all();
        fail("field \"" + path + "\": expected \"all\", a stride integer, or a K array");
    }
    if (v.is_number_integer()) {
        const int stride = v.get<int>();
        if (stride < 1) fail("field \"" + path + "\": stride must be >= 1");
        return stride == 1 ? RewardSchedule::all() : RewardSchedule::every(stride);
    }
    if (v.is_array()) {
        std::set<int> ks;
        for (const auto& e : v) {
            if (!e.is_number_integer()) fail("field \"" + path + "\": K array must hold integers");
            ks.insert(e.get<int>());
        }
        return RewardSchedule::only(std::move(ks));
    }
    fail("field \"" + path + "\": expected \"all\", a stride integer, or a K array");
}

json schedule_to_json(const RewardSchedule& s) {
    switch (s.kind) {
        case RewardSchedule::Kind::All: return json("all");
        case RewardSchedule::Kind::Stride: return json(s.stride);
        case RewardSchedule::Kind::Explicit: return json(s.ks);
    }
    return json("all");
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        fail(std::string("syntax error: ") + e.what());
    }
    if (!doc.is_object()) fail("top level must be an object");
    check_keys(doc, "",
               {"mode", "code", "channel", "evaluator", "ppo", "ga", "compare", "eval",
                "output"});

    ExperimentConfig cfg;
    cfg.mode = get_or<std::string>(doc, "", "mode", "rl");
    if (cfg.mode != "rl" && cfg.mode != "integrated") {
        fail("field \"mode\" must be \"rl\" or \"integrated\"");
    }
    cfg.output_dir = get_or<std::string>(doc, "", "output", "out");

    if (!doc.contains("code")) fail("missing required section \"code\"");
    {
        const json& code = doc.at("code");
        check_keys(code, "code", {"N", "L", "decoder"});
        cfg.task.n_bits = require<int>(code, "code.", "N");
        if (!is_power_of_two(cfg.task.n_bits)) fail("field \"code.N\" must be a power of two");
        cfg.task.reward_spec.list_size = get_or<int>(code, "code.", "L", 8);
        if (cfg.task.reward_spec.list_size < 1) fail("field \"code.L\" must be >= 1");
        const std::string dec = get_or<std::string>(code, "code.", "decoder", "scl_pm");
        const auto rule = decoder_from_name(dec);
        if (!rule) fail("field \"code.decoder\" must be \"scl_pm\" or \"scl_genie\"");
        cfg.task.reward_spec.decoder = *rule;
    }

    if (!doc.contains("channel")) fail("missing required section \"channel\"");
    {
        const json& ch = doc.at("channel");
        check_keys(ch, "channel", {"esn0_db", "seed"});
        cfg.task.reward_spec.channel.esn0_db = require<double>(ch, "channel.", "esn0_db");
        cfg.task.seed = get_or<std::uint64_t>(ch, "channel.", "seed", 1);
        cfg.task.reward_spec.channel.seed = cfg.task.seed;
    }

    if (doc.contains("evaluator")) {
        const json& ev = doc.at("evaluator");
        check_keys(ev, "evaluator",
                   {"error_events", "max_trials", "reward_schedule", "bler_floor", "pm_rule"});
        cfg.task.reward_spec.target_error_events =
            get_or<long>(ev, "evaluator.", "error_events", 1000);
        cfg.task.reward_spec.max_trials = get_or<long>(ev, "evaluator.", "max_trials", 1000000);
        cfg.task.reward_spec.bler_floor = get_or<double>(ev, "evaluator.", "bler_floor", 0.0);
        if (ev.contains("reward_schedule")) {
            cfg.task.schedule = parse_schedule(ev.at("reward_schedule"),
                                               "evaluator.reward_schedule");
        }
        const std::string pm = get_or<std::string>(ev, "evaluator.", "pm_rule", "penalty");
        if (pm == "penalty") {
            cfg.task.reward_spec.pm_rule = PathMetricRule::Penalty;
        } else if (pm == "exact") {
            cfg.task.reward_spec.pm_rule = PathMetricRule::Exact;
        } else {
            fail("field \"evaluator.pm_rule\" must be \"penalty\" or \"exact\"");
        }
        if (cfg.task.reward_spec.target_error_events < 1) {
            fail("field \"evaluator.error_events\" must be >= 1");
        }
        if (cfg.task.reward_spec.max_trials < cfg.task.reward_spec.target_error_events) {
            fail("field \"evaluator.max_trials\" must be >= error_events");
        }
    }

    if (doc.contains("ppo")) {
        const json& p = doc.at("ppo");
        check_keys(p, "ppo",
                   {"gamma", "lambda", "clip_epsilon", "beta_c", "beta_e", "lr", "batch_size",
                    "rollout_steps", "update_epochs", "total_timesteps",
                    "normalize_advantages", "hidden_dim"});
        auto& ppo = cfg.task.ppo;
        ppo.gamma = get_or<double>(p, "ppo.", "gamma", ppo.gamma);
        ppo.lambda = get_or<double>(p, "ppo.", "lambda", ppo.lambda);
        ppo.clip_epsilon = get_or<double>(p, "ppo.", "clip_epsilon", ppo.clip_epsilon);
        ppo.beta_c = get_or<double>(p, "ppo.", "beta_c", ppo.beta_c);
        ppo.beta_e = get_or<double>(p, "ppo.", "beta_e", ppo.beta_e);
        ppo.lr = get_or<double>(p, "ppo.", "lr", ppo.lr);
        ppo.batch_size = get_or<int>(p, "ppo.", "batch_size", ppo.batch_size);
        ppo.rollout_steps = get_or<int>(p, "ppo.", "rollout_steps", ppo.rollout_steps);
        ppo.update_epochs = get_or<int>(p, "ppo.", "update_epochs", ppo.update_epochs);
        ppo.total_timesteps = get_or<long>(p, "ppo.", "total_timesteps", ppo.total_timesteps);
        ppo.normalize_advantages =
            get_or<bool>(p, "ppo.", "normalize_advantages", ppo.normalize_advantages);
        cfg.task.hidden_dim = get_or<int>(p, "ppo.", "hidden_dim", 0);
        if (!(ppo.gamma >= 0.0 && ppo.gamma < 1.0)) fail("field \"ppo.gamma\" must be in [0,1)");
        if (!(ppo.lambda >= 0.0 && ppo.lambda <= 1.0)) {
            fail("field \"ppo.lambda\" must be in [0,1]");
        }
        if (!(ppo.clip_epsilon > 0.0)) fail("field \"ppo.clip_epsilon\" must be > 0");
        if (ppo.batch_size < 1) fail("field \"ppo.batch_size\" must be >= 1");
    }

    if (doc.contains("ga")) {
        const json& g = doc.at("ga");
        check_keys(g, "ga",
                   {"population_size", "generations", "mutation_swaps", "crossover_rate",
                    "elitism_count", "seed_with_dega"});
        auto& ga = cfg.task.ga;
        ga.population_size = get_or<int>(g, "ga.", "population_size", ga.population_size);
        ga.generations = get_or<int>(g, "ga.", "generations", ga.generations);
        ga.mutation_swaps = get_or<int>(g, "ga.", "mutation_swaps", ga.mutation_swaps);
        ga.crossover_rate = get_or<double>(g, "ga.", "crossover_rate", ga.crossover_rate);
        ga.elitism_count = get_or<int>(g, "ga.", "elitism_count", ga.elitism_count);
        ga.seed_with_dega = get_or<bool>(g, "ga.", "seed_with_dega", ga.seed_with_dega);
        if (ga.population_size < 2) fail("field \"ga.population_size\" must be >= 2");
        if (ga.elitism_count >= ga.population_size) {
            fail("field \"ga.elitism_count\" must be < population_size");
        }
        if (!(ga.crossover_rate >= 0.0 && ga.crossover_rate <= 1.0)) {
            fail("field \"ga.crossover_rate\" must be in [0,1]");
        }
    }

    if (doc.contains("compare")) {
        const json& c = doc.at("compare");
        check_keys(c, "compare", {"k_values", "target_bler", "bracket"});
        cfg.compare.k_values = get_or<std::vector<int>>(c, "compare.", "k_values", {});
        cfg.compare.target_bler = get_or<double>(c, "compare.", "target_bler", 1e-2);
        const auto br = get_or<std::vector<double>>(c, "compare.", "bracket", {-2.0, 8.0});
        if (br.size() != 2) fail("field \"compare.bracket\" must be [lo, hi]");
        cfg.compare.bracket = {br[0], br[1]};
        if (!(cfg.compare.target_bler > 0.0 && cfg.compare.target_bler < 1.0)) {
            fail("field \"compare.target_bler\" must be in (0,1)");
        }
    }

    if (doc.contains("eval")) {
        const json& e = doc.at("eval");
        check_keys(e, "eval", {"esn0_grid", "k"});
        cfg.eval.esn0_grid = get_or<std::vector<double>>(e, "eval.", "esn0_grid", {});
        cfg.eval.info_len = get_or<int>(e, "eval.", "k", -1);
    }

    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("config: cannot open: " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str());
}

std::string serialize_config(const ExperimentConfig& cfg) {
    json doc;
    doc["mode"] = cfg.mode;
    doc["output"] = cfg.output_dir;
    doc["code"] = {{"N", cfg.task.n_bits},
                   {"L", cfg.task.reward_spec.list_size},
                   {"decoder", decoder_name(cfg.task.reward_spec.decoder)}};
    doc["channel"] = {{"esn0_db", cfg.task.reward_spec.channel.esn0_db},
                      {"seed", cfg.task.seed}};
    doc["evaluator"] = {
        {"error_events", cfg.task.reward_spec.target_error_events},
        {"max_trials", cfg.task.reward_spec.max_trials},
        {"bler_floor", cfg.task.reward_spec.bler_floor},
        {"reward_schedule", schedule_to_json(cfg.task.schedule)},
        {"pm_rule", cfg.task.reward_spec.pm_rule == PathMetricRule::Exact ? "exact" : "penalty"}};
    doc["ppo"] = {{"gamma", cfg.task.ppo.gamma},
                  {"lambda", cfg.task.ppo.lambda},
                  {"clip_epsilon", cfg.task.ppo.clip_epsilon},
                  {"beta_c", cfg.task.ppo.beta_c},
                  {"beta_e", cfg.task.ppo.beta_e},
                  {"lr", cfg.task.ppo.lr},
                  {"batch_size", cfg.task.ppo.batch_size},
                  {"rollout_steps", cfg.task.ppo.rollout_steps},
                  {"update_epochs", cfg.task.ppo.update_epochs},
                  {"total_timesteps", cfg.task.ppo.total_timesteps},
                  {"normalize_advantages", cfg.task.ppo.normalize_advantages},
                  {"hidden_dim", cfg.task.hidden_dim}};
    doc["ga"] = {{"population_size", cfg.task.ga.population_size},
                 {"generations", cfg.task.ga.generations},
                 {"mutation_swaps", cfg.task.ga.mutation_swaps},
                 {"crossover_rate", cfg.task.ga.crossover_rate},
                 {"elitism_count", cfg.task.ga.elitism_count},
                 {"seed_with_dega", cfg.task.ga.seed_with_dega}};
    doc["compare"] = {{"k_values", cfg.compare.k_values},
                      {"target_bler", cfg.compare.target_bler},
                      {"bracket", {cfg.compare.bracket.first, cfg.compare.bracket.second}}};
    doc["eval"] = {{"esn0_grid", cfg.eval.esn0_grid}, {"k", cfg.eval.info_len}};
    return doc.dump(2) + "\n";
}

}  // namespace polarl
