#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "polarl/codec.hpp"

namespace polarl {

/// Partial nested construction: mask support is the frozen set built so far.
struct EnvState {
    Construction construction;
    int step_index = 0;  // number of frozen indices == popcount(mask)
};

struct Transition {
    EnvState state;
    int action = -1;
    double reward = 0.0;
    EnvState next_state;
    bool done = false;
};

using ConstructionRewardFn = std::function<double(const Construction&)>;

EnvState mdp_reset(int n_bits);
std::vector<int> legal_actions(const EnvState& s);
Transition mdp_step(const EnvState& s, int action, const ConstructionRewardFn& reward_fn);

/// Minimal episodic interface shared by the construction task and test
/// environments. States are 0/1 vectors; a set bit marks an illegal action.
class RlEnv {
public:
    virtual ~RlEnv() = default;
    virtual int dim() const = 0;
    virtual std::vector<double> reset() = 0;
    struct Step {
        std::vector<double> state;
        double reward = 0.0;
        bool done = false;
    };
    virtual Step step(int action) = 0;
};

using EnvFactory = std::function<std::unique_ptr<RlEnv>()>;

/// Row sink for the trajectory log (episode, step, action, reward).
using TrajectorySink = std::function<void(long episode, int step, int action, double reward)>;

/// Pass-through wrapper that reports every transition to a sink.
class TrajectoryLoggingEnv : public RlEnv {
public:
    TrajectoryLoggingEnv(RlEnv& inner, TrajectorySink sink)
        : inner_(inner), sink_(std::move(sink)) {}

    int dim() const override { return inner_.dim(); }
    std::vector<double> reset() override {
        step_ = 0;
        return inner_.reset();
    }
    Step step(int action) override {
        Step s = inner_.step(action);
        if (sink_) sink_(episode_, step_, action, s.reward);
        ++step_;
        if (s.done) {
            ++episode_;
            step_ = 0;
        }
        return s;
    }

private:
    RlEnv& inner_;
    TrajectorySink sink_;
    long episode_ = 0;
    int step_ = 0;
};

/// The nested-construction MDP: freeze one subchannel per step, reward is
/// the performance of the code just formed, episode ends after N steps.
class PolarConstructionEnv : public RlEnv {
public:
    PolarConstructionEnv(int n_bits, ConstructionRewardFn reward_fn);

    int dim() const override { return n_bits_; }
    std::vector<double> reset() override;
    Step step(int action) override;

    const EnvState& state() const { return state_; }

private:
    int n_bits_;
    ConstructionRewardFn reward_fn_;
    EnvState state_;
};

}  // namespace polarl
