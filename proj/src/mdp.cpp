#include "polarl/mdp.hpp"

#include <stdexcept>

namespace polarl {

EnvState mdp_reset(int n_bits) {
    if (!is_power_of_two(n_bits)) {
        throw std::invalid_argument("mdp_reset: N must be a power of two");
    }
    EnvState s;
    s.construction = Construction(n_bits, BitVec(n_bits, 0));
    s.step_index = 0;
    return s;
}

std::vector<int> legal_actions(const EnvState& s) {
    std::vector<int> acts;
    acts.reserve(s.construction.n_bits - s.step_index);
    for (int i = 0; i < s.construction.n_bits; ++i) {
        if (s.construction.mask[i] == 0) acts.push_back(i);
    }
    return acts;
}

Transition mdp_step(const EnvState& s, int action, const ConstructionRewardFn& reward_fn) {
    const int n = s.construction.n_bits;
    if (action < 0 || action >= n) {
        throw std::invalid_argument("mdp_step: action out of range");
    }
    if (s.construction.mask[action] != 0) {
        throw std::invalid_argument("mdp_step: action already frozen");
    }
    Transition t;
    t.state = s;
    t.action = action;
    t.next_state = s;
    t.next_state.construction.mask[action] = 1;
    t.next_state.step_index = s.step_index + 1;
    t.done = t.next_state.step_index == n;
    t.reward = reward_fn ? reward_fn(t.next_state.construction) : 0.0;
    return t;
}

PolarConstructionEnv::PolarConstructionEnv(int n_bits, ConstructionRewardFn reward_fn)
    : n_bits_(n_bits), reward_fn_(std::move(reward_fn)), state_(mdp_reset(n_bits)) {}

std::vector<double> PolarConstructionEnv::reset() {
    state_ = mdp_reset(n_bits_);
    return std::vector<double>(n_bits_, 0.0);
}

PolarConstructionEnv::Step PolarConstructionEnv::step(int action) {
    Transition t = mdp_step(state_, action, reward_fn_);
    state_ = t.next_state;
    Step out;
    out.state.assign(n_bits_, 0.0);
    for (int i = 0; i < n_bits_; ++i) {
        out.state[i] = static_cast<double>(state_.construction.mask[i]);
    }
    out.reward = t.reward;
    out.done = t.done;
    return out;
}

}  // namespace polarl
