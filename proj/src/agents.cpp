#include "polarl/agents.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace polarl {

namespace {

int sample_from_pmf(const Eigen::VectorXd& pmf, RngStream& rng) {
    const double u = rng.uniform();
    double cum = 0.0;
    int last_positive = -1;
    for (Eigen::Index i = 0; i < pmf.size(); ++i) {
        const double p = pmf[i];
        if (p <= 0.0) continue;
        last_positive = static_cast<int>(i);
        cum += p;
        if (u < cum) return static_cast<int>(i);
    }
    if (last_positive < 0) throw std::runtime_error("sample_from_pmf: no legal action");
    return last_positive;  // u landed in the rounding tail
}

Eigen::VectorXd to_vec(const std::vector<double>& v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

void shuffle_indices(std::vector<int>& idx, RngStream& rng) {
    for (std::size_t i = idx.size(); i > 1; --i) {
        const std::size_t j = rng.uniform_below(i);
        std::swap(idx[i - 1], idx[j]);
    }
}

}  // namespace

RolloutBatch collect_rollout(RlEnv& env, std::vector<double>& obs,
                             const PolicyValueNet& net, int n_steps, RngStream& rng) {
    if (n_steps < 1) throw std::invalid_argument("collect_rollout: n_steps >= 1");
    const int n = env.dim();
    RolloutBatch batch;
    batch.states.resize(n_steps, n);
    batch.actions.resize(n_steps);
    batch.rewards.resize(n_steps);
    batch.logp_old.resize(n_steps);
    batch.value_old.resize(n_steps);
    batch.done.resize(n_steps);

    if (obs.empty()) obs = env.reset();
    bool last_done = false;
    for (int t = 0; t < n_steps; ++t) {
        const Eigen::VectorXd state = to_vec(obs);
        const PolicyOutput pol = forward(net, state);
        const int action = sample_from_pmf(pol.pmf, rng);
        const RlEnv::Step step = env.step(action);

        batch.states.row(t) = state.transpose();
        batch.actions[t] = action;
        batch.rewards[t] = step.reward;
        batch.logp_old[t] = pol.logp[action];
        batch.value_old[t] = pol.value;
        batch.done[t] = step.done ? 1 : 0;
        last_done = step.done;
        obs = step.done ? env.reset() : step.state;
    }
    batch.bootstrap_value = last_done ? 0.0 : forward(net, to_vec(obs)).value;
    return batch;
}

GaeResult gae(const RolloutBatch& batch, double gamma, double lambda) {
    const long t_max = batch.size();
    GaeResult out;
    out.advantages.resize(t_max);
    out.returns.resize(t_max);
    double next_adv = 0.0;
    double next_value = batch.bootstrap_value;
    for (long t = t_max - 1; t >= 0; --t) {
        if (batch.done[t]) {
            next_adv = 0.0;
            next_value = 0.0;  // episodes always terminate; bootstrap 0
        }
        const double delta = batch.rewards[t] + gamma * next_value - batch.value_old[t];
        out.advantages[t] = delta + gamma * lambda * next_adv;
        next_adv = out.advantages[t];
        next_value = batch.value_old[t];
    }
    out.returns = out.advantages + batch.value_old;
    return out;
}

UpdateMetrics ppo_update(PolicyValueNet& net, AdamOptimizer& opt, const RolloutBatch& batch,
                         const GaeResult& adv, const PpoConfig& cfg, RngStream& rng) {
    const long t_max = batch.size();
    Eigen::VectorXd advantages = adv.advantages;
    if (cfg.normalize_advantages && t_max > 1) {
        const double mean = advantages.mean();
        const double var = (advantages.array() - mean).square().sum() / t_max;
        advantages = (advantages.array() - mean) / (std::sqrt(var) + 1e-8);
    }

    PpoLossSpec loss_spec{cfg.clip_epsilon, cfg.beta_c, cfg.beta_e};
    UpdateMetrics metrics;
    std::vector<int> idx(t_max);
    std::iota(idx.begin(), idx.end(), 0);

    for (int epoch = 0; epoch < cfg.update_epochs; ++epoch) {
        shuffle_indices(idx, rng);
        for (long start = 0; start < t_max; start += cfg.batch_size) {
            const long b = std::min<long>(cfg.batch_size, t_max - start);
            PpoBatchView view;
            view.states.resize(b, net.input_dim());
            view.actions.resize(b);
            view.advantages.resize(b);
            view.returns.resize(b);
            view.logp_old.resize(b);
            for (long i = 0; i < b; ++i) {
                const int s = idx[start + i];
                view.states.row(i) = batch.states.row(s);
                view.actions[i] = batch.actions[s];
                view.advantages[i] = advantages[s];
                view.returns[i] = adv.returns[s];
                view.logp_old[i] = batch.logp_old[s];
            }
            NetGradients grads = NetGradients::zeros_like(net);
            const double loss = ppo_loss(net, view, loss_spec, &grads);
            if (!std::isfinite(loss)) {
                std::ostringstream msg;
                msg << "ppo_update: non-finite loss " << loss << " at epoch " << epoch
                    << ", minibatch offset " << start;
                throw std::runtime_error(msg.str());
            }
            opt.step(net, grads, cfg.lr);
            metrics.mean_loss += loss;
            ++metrics.minibatches;
        }
    }
    if (metrics.minibatches > 0) metrics.mean_loss /= metrics.minibatches;
    return metrics;
}

TrainResult train_rl_core(PolicyValueNet& net, AdamOptimizer& opt, RlEnv& env,
                          const PpoConfig& cfg, RngStream& rollout_rng,
                          RngStream& shuffle_rng) {
    TrainResult result;
    std::vector<double> obs;
    long steps_done = 0;
    long episode_index = 0;
    double episode_reward = 0.0;

    while (steps_done < cfg.total_timesteps) {
        const int n_steps =
            static_cast<int>(std::min<long>(cfg.rollout_steps, cfg.total_timesteps - steps_done));
        RolloutBatch batch = collect_rollout(env, obs, net, n_steps, rollout_rng);
        for (long t = 0; t < batch.size(); ++t) {
            episode_reward += batch.rewards[t];
            ++steps_done;
            if (batch.done[t]) {
                result.curve.push_back({steps_done, episode_index, episode_reward});
                ++episode_index;
                episode_reward = 0.0;
            }
        }
        const GaeResult adv = gae(batch, cfg.gamma, cfg.lambda);
        ppo_update(net, opt, batch, adv, cfg, shuffle_rng);
    }
    return result;
}

std::vector<PretrainExample> generate_examples(
    const std::map<int, std::vector<Construction>>& populations_by_size) {
    std::vector<PretrainExample> examples;
    // intuition 1: unwind one set bit of a good state
    for (const auto& [size, states] : populations_by_size) {
        (void)size;
        for (const auto& st : states) {
            for (int n = 0; n < st.n_bits; ++n) {
                if (st.mask[n] == 1) {
                    PretrainExample ex;
                    ex.state = st.mask;
                    ex.state[n] = 0;
                    ex.action_label = n;
                    examples.push_back(std::move(ex));
                }
            }
        }
    }
    // intuition 2: actions recorded by good states one bit larger
    for (const auto& [size, smaller] : populations_by_size) {
        const auto it = populations_by_size.find(size + 1);
        if (it == populations_by_size.end()) continue;
        for (const auto& s : smaller) {
            for (const auto& d : it->second) {
                for (int n = 0; n < s.n_bits; ++n) {
                    if (d.mask[n] == 1 && s.mask[n] == 0) {
                        examples.push_back({s.mask, n});
                    }
                }
            }
        }
    }
    return examples;
}

double pretrain(PolicyValueNet& net, const std::vector<PretrainExample>& examples,
                const PretrainConfig& cfg, RngStream& rng) {
    if (examples.empty()) throw std::invalid_argument("pretrain: no examples");
    const int n = net.input_dim();
    AdamOptimizer opt(net);
    PretrainLossSpec loss_spec{cfg.beta_entropy};

    std::vector<int> idx(examples.size());
    std::iota(idx.begin(), idx.end(), 0);
    double epoch_loss = 0.0;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        shuffle_indices(idx, rng);
        epoch_loss = 0.0;
        long minibatches = 0;
        for (std::size_t start = 0; start < idx.size(); start += cfg.batch_size) {
            const long b = static_cast<long>(
                std::min<std::size_t>(cfg.batch_size, idx.size() - start));
            PretrainBatchView view;
            view.states.resize(b, n);
            view.labels.resize(b);
            for (long i = 0; i < b; ++i) {
                const auto& ex = examples[idx[start + i]];
                for (int j = 0; j < n; ++j) view.states(i, j) = ex.state[j];
                view.labels[i] = ex.action_label;
            }
            NetGradients grads = NetGradients::zeros_like(net);
            epoch_loss += pretrain_loss(net, view, loss_spec, &grads);
            ++minibatches;
            opt.step(net, grads, cfg.lr);
        }
        if (minibatches > 0) epoch_loss /= minibatches;
    }
    return epoch_loss;
}

NestedSequence greedy_sequence(const PolicyValueNet& net, int n_bits) {
    std::vector<int> actions;
    actions.reserve(n_bits);
    Eigen::VectorXd state = Eigen::VectorXd::Zero(n_bits);
    for (int step = 0; step < n_bits; ++step) {
        const PolicyOutput pol = forward(net, state);
        Eigen::Index best;
        pol.pmf.maxCoeff(&best);
        actions.push_back(static_cast<int>(best));
        state[best] = 1.0;
    }
    return sequence_from_trajectory(actions);
}

int default_hidden_dim(int n_bits) { return n_bits == 256 ? 1024 : 2 * n_bits; }

namespace {

TaskResult run_task(const TaskConfig& cfg, RewardCache& cache, bool integrated) {
    TaskResult result;
    const int hidden = cfg.hidden_dim > 0 ? cfg.hidden_dim : default_hidden_dim(cfg.n_bits);
    RngStream root(cfg.seed, 0);
    RngStream init_rng = root.substream(stream_id::kNetInit);
    RngStream rollout_rng = root.substream(stream_id::kRollout);
    RngStream shuffle_rng = root.substream(stream_id::kShuffle);

    result.net = PolicyValueNet::initialized(cfg.n_bits, hidden, init_rng);

    RewardSpec spec = cfg.reward_spec;
    spec.channel.seed = cfg.seed;
    RewardFn reward_fn(spec, cfg.schedule, &cache, cfg.seed, cfg.workers);

    if (integrated && cfg.ga.generations >= 0) {
        RngStream ga_rng = root.substream(stream_id::kGenetic);
        RngStream pre_rng = root.substream(stream_id::kPretrain);
        FitnessFn fitness = [&](const Construction& c) { return reward_fn(c); };
        std::map<int, std::vector<Construction>> by_size;
        for (int k = 1; k <= cfg.n_bits - 1; ++k) {
            if (!cfg.schedule.contains(k)) continue;
            GaConfig ga = cfg.ga;
            ga.fitness_spec = spec;
            RngStream kr = ga_rng.substream(static_cast<std::uint64_t>(k));
            GaPopulation pop = ga_evolve(cfg.n_bits, k, ga, fitness, kr);
            auto& states = by_size[cfg.n_bits - k];  // key: frozen-set size
            for (const auto& m : pop.members) states.push_back(m.construction);
            result.ga_populations.emplace(k, std::move(pop));
        }
        const auto examples = generate_examples(by_size);
        if (!examples.empty()) {
            PretrainConfig pre;
            pre.lr = cfg.ppo.lr;
            pre.batch_size = cfg.ppo.batch_size;
            pretrain(result.net, examples, pre, pre_rng);
            result.net.reinit_value_head();
        }
        result.pretrained_net = result.net;
    }

    PolarConstructionEnv base_env(cfg.n_bits,
                                  [&](const Construction& c) { return reward_fn(c); });
    TrajectoryLoggingEnv env(base_env, cfg.trajectory_sink);
    AdamOptimizer opt(result.net);
    TrainResult train = train_rl_core(result.net, opt, env, cfg.ppo, rollout_rng, shuffle_rng);
    result.curve = std::move(train.curve);
    result.sequence = greedy_sequence(result.net, cfg.n_bits);
    result.simulated_trials = reward_fn.simulated_trials();
    result.cache_hits = cache.hits();
    return result;
}

}  // namespace

TaskResult train_rl(const TaskConfig& cfg, RewardCache& cache) {
    return run_task(cfg, cache, false);
}

TaskResult train_integrated(const TaskConfig& cfg, RewardCache& cache) {
    return run_task(cfg, cache, true);
}

}  // namespace polarl
