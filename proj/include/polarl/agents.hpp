#pragma once

#include <map>
#include <vector>

#include "polarl/construction.hpp"
#include "polarl/evaluator.hpp"
#include "polarl/genetic.hpp"
#include "polarl/mdp.hpp"
#include "polarl/neural.hpp"

namespace polarl {

struct PpoConfig {
    double gamma = 0.2;
    double lambda = 0.95;
    double clip_epsilon = 0.2;
    double beta_c = 0.5;
    double beta_e = 0.0;
    double lr = 3e-4;
    int batch_size = 64;  // minibatch size per gradient step
    int rollout_steps = 256;
    int update_epochs = 4;
    long total_timesteps = 100000;
    bool normalize_advantages = true;
};

/// Time-ordered rollout records plus the bootstrap value of the state the
/// rollout stopped in (0 when it stopped exactly at an episode end).
struct RolloutBatch {
    Eigen::MatrixXd states;  // T x N, observed before each action
    std::vector<int> actions;
    Eigen::VectorXd rewards;
    Eigen::VectorXd logp_old;
    Eigen::VectorXd value_old;
    std::vector<std::uint8_t> done;
    double bootstrap_value = 0.0;

    long size() const { return static_cast<long>(actions.size()); }
};

/// Sample n_steps actions from the masked policy, stepping (and resetting)
/// the environment. `obs` carries the current observation across calls;
/// empty means the environment needs a reset first.
RolloutBatch collect_rollout(RlEnv& env, std::vector<double>& obs,
                             const PolicyValueNet& net, int n_steps, RngStream& rng);

/// Generalized advantage estimation: delta_t = r_t + g*V(s_{t+1}) - V(s_t),
/// A_t = delta_t + g*l*A_{t+1}, reset at episode boundaries; returns are
/// advantages plus the old values.
struct GaeResult {
    Eigen::VectorXd advantages;
    Eigen::VectorXd returns;
};
GaeResult gae(const RolloutBatch& batch, double gamma, double lambda);

struct UpdateMetrics {
    double mean_loss = 0.0;
    long minibatches = 0;
};

/// update_epochs passes of shuffled minibatches through the clipped PPO
/// loss; Adam applied per minibatch. Throws on a non-finite loss.
UpdateMetrics ppo_update(PolicyValueNet& net, AdamOptimizer& opt, const RolloutBatch& batch,
                         const GaeResult& adv, const PpoConfig& cfg, RngStream& rng);

struct LearningCurvePoint {
    long timestep = 0;
    long episode = 0;
    double reward = 0.0;
};

struct TrainResult {
    std::vector<LearningCurvePoint> curve;
};

/// Core PPO loop: collect, estimate advantages, update, until
/// total_timesteps are consumed. One curve point per completed episode.
TrainResult train_rl_core(PolicyValueNet& net, AdamOptimizer& opt, RlEnv& env,
                          const PpoConfig& cfg, RngStream& rollout_rng,
                          RngStream& shuffle_rng);

/// One demonstration pair: a state and the action that leads toward a known
/// good state. The labelled bit is clear in the state.
struct PretrainExample {
    BitVec state;
    int action_label = -1;
};

/// Demonstration pairs from per-size populations of good states
/// (key = number of set bits). For every good state each set bit yields a
/// (state minus bit -> bit) pair; additionally every pair of states at
/// adjacent sizes yields (smaller state -> each extra bit of the larger).
/// Duplicates are kept; they carry empirical action frequency.
std::vector<PretrainExample> generate_examples(
    const std::map<int, std::vector<Construction>>& populations_by_size);

struct PretrainConfig {
    int epochs = 20;
    double beta_entropy = 1.0;
    double lr = 3e-4;
    int batch_size = 64;
};

/// Supervised pretraining of the policy (cross entropy minus entropy bonus)
/// on shuffled minibatches. Returns the final mean epoch loss.
double pretrain(PolicyValueNet& net, const std::vector<PretrainExample>& examples,
                const PretrainConfig& cfg, RngStream& rng);

/// Greedy (argmax) rollout of one full episode; the action order is the
/// learned nested sequence.
NestedSequence greedy_sequence(const PolicyValueNet& net, int n_bits);

// fixed substream ids so training is reproducible from one global seed
namespace stream_id {
constexpr std::uint64_t kNetInit = 1;
constexpr std::uint64_t kRollout = 2;
constexpr std::uint64_t kShuffle = 3;
constexpr std::uint64_t kGenetic = 4;
constexpr std::uint64_t kPretrain = 5;
}  // namespace stream_id

/// Full nested-construction training task (what the CLI runs).
struct TaskConfig {
    int n_bits = 32;
    int hidden_dim = 0;  // 0 -> 1024 when N = 256, else 2N
    std::uint64_t seed = 1;
    int workers = 1;
    bool integrated = false;
    RewardSpec reward_spec;
    RewardSchedule schedule;
    PpoConfig ppo;
    GaConfig ga;
    TrajectorySink trajectory_sink;  // optional transition log
};

int default_hidden_dim(int n_bits);

struct TaskResult {
    PolicyValueNet net;
    PolicyValueNet pretrained_net;  // integrated mode only (empty otherwise)
    std::vector<LearningCurvePoint> curve;
    NestedSequence sequence;
    std::map<int, GaPopulation> ga_populations;  // by info length
    long simulated_trials = 0;
    long cache_hits = 0;
};

/// Plain PPO on the construction MDP.
TaskResult train_rl(const TaskConfig& cfg, RewardCache& cache);

/// Alg-style integrated pipeline: genetic populations -> demonstration
/// examples -> supervised pretraining -> PPO with the pretrained policy
/// (value head fresh). With ga.generations < 0 the prior stages are skipped
/// and this reduces to plain PPO.
TaskResult train_integrated(const TaskConfig& cfg, RewardCache& cache);

}  // namespace polarl
