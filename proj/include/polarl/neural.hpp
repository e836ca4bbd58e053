#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "polarl/rng.hpp"

namespace polarl {

/// Shared two-layer tanh trunk with a masked-softmax policy head and a
/// scalar value head. Parameters live in one flat vector; the typed views
/// below map into it. Input is the 0/1 state vector; logits of already
/// selected (set) entries are pushed down by kMaskConstant before softmax.
class PolicyValueNet {
public:
    static constexpr double kMaskConstant = 1e9;

    PolicyValueNet() = default;
    PolicyValueNet(int input_dim, int hidden_dim);

    /// Variance-scaled trunk init, heads exactly zero so the initial policy
    /// is uniform over legal actions.
    static PolicyValueNet initialized(int input_dim, int hidden_dim, RngStream& rng);

    int input_dim() const { return n_; }
    int hidden_dim() const { return h_; }
    Eigen::Index param_count() const { return params_.size(); }
    Eigen::VectorXd& params() { return params_; }
    const Eigen::VectorXd& params() const { return params_; }

    void reinit_value_head();

    using MatView = Eigen::Map<Eigen::MatrixXd>;
    using VecView = Eigen::Map<Eigen::VectorXd>;
    using CMatView = Eigen::Map<const Eigen::MatrixXd>;
    using CVecView = Eigen::Map<const Eigen::VectorXd>;

    MatView w1() { return {params_.data() + off_w1_, h_, n_}; }
    VecView b1() { return {params_.data() + off_b1_, h_}; }
    MatView w2() { return {params_.data() + off_w2_, h_, h_}; }
    VecView b2() { return {params_.data() + off_b2_, h_}; }
    MatView wp() { return {params_.data() + off_wp_, n_, h_}; }
    VecView bp() { return {params_.data() + off_bp_, n_}; }
    VecView wv() { return {params_.data() + off_wv_, h_}; }
    double& bv() { return params_[off_bv_]; }

    CMatView w1() const { return {params_.data() + off_w1_, h_, n_}; }
    CVecView b1() const { return {params_.data() + off_b1_, h_}; }
    CMatView w2() const { return {params_.data() + off_w2_, h_, h_}; }
    CVecView b2() const { return {params_.data() + off_b2_, h_}; }
    CMatView wp() const { return {params_.data() + off_wp_, n_, h_}; }
    CVecView bp() const { return {params_.data() + off_bp_, n_}; }
    CVecView wv() const { return {params_.data() + off_wv_, h_}; }
    double bv() const { return params_[off_bv_]; }

private:
    void compute_offsets();

    int n_ = 0;
    int h_ = 0;
    Eigen::Index off_w1_ = 0, off_b1_ = 0, off_w2_ = 0, off_b2_ = 0;
    Eigen::Index off_wp_ = 0, off_bp_ = 0, off_wv_ = 0, off_bv_ = 0;
    Eigen::VectorXd params_;
};

/// Gradient (or moment) buffer congruent with the network's flat parameters.
struct NetGradients {
    Eigen::VectorXd values;

    static NetGradients zeros_like(const PolicyValueNet& net) {
        return {Eigen::VectorXd::Zero(net.param_count())};
    }
};

struct PolicyOutput {
    Eigen::VectorXd pmf;   // masked softmax over actions
    Eigen::VectorXd logp;  // masked log-softmax (finite everywhere)
    double value = 0.0;
};

PolicyOutput forward(const PolicyValueNet& net, const Eigen::VectorXd& state);

/// Batch forward pass with the activations needed for backprop.
struct ForwardPass {
    Eigen::MatrixXd h1;      // B x H
    Eigen::MatrixXd h2;      // B x H
    Eigen::MatrixXd logp;    // B x N
    Eigen::MatrixXd pmf;     // B x N
    Eigen::VectorXd values;  // B
};

ForwardPass forward_batch(const PolicyValueNet& net, const Eigen::MatrixXd& states);

/// Reverse pass from per-sample logit/value gradients to parameter
/// gradients (accumulated into out).
void backward_batch(const PolicyValueNet& net, const Eigen::MatrixXd& states,
                    const ForwardPass& fwd, const Eigen::MatrixXd& d_logits,
                    const Eigen::VectorXd& d_values, NetGradients& out);

struct PpoLossSpec {
    double clip_epsilon = 0.2;
    double beta_c = 0.5;
    double beta_e = 0.0;
};

struct PpoBatchView {
    Eigen::MatrixXd states;      // B x N
    std::vector<int> actions;    // B
    Eigen::VectorXd advantages;  // B
    Eigen::VectorXd returns;     // B
    Eigen::VectorXd logp_old;    // B
};

/// Clipped-surrogate PPO loss (policy + value + entropy terms), mean
/// reduction. Returns the scalar loss; fills grads when non-null.
double ppo_loss(const PolicyValueNet& net, const PpoBatchView& batch,
                const PpoLossSpec& spec, NetGradients* grads);

struct PretrainLossSpec {
    double beta_entropy = 1.0;
};

struct PretrainBatchView {
    Eigen::MatrixXd states;  // B x N
    std::vector<int> labels; // B
};

/// Cross entropy against the one-hot action label minus an entropy bonus.
double pretrain_loss(const PolicyValueNet& net, const PretrainBatchView& batch,
                     const PretrainLossSpec& spec, NetGradients* grads);

/// Bias-corrected Adam with (beta1, beta2, eps) = (0.9, 0.999, 1e-8).
class AdamOptimizer {
public:
    AdamOptimizer() = default;
    explicit AdamOptimizer(const PolicyValueNet& net);

    void step(PolicyValueNet& net, const NetGradients& grads, double lr);
    void reset_value_head_state(const PolicyValueNet& net);

    long step_count() const { return step_count_; }
    Eigen::VectorXd& m() { return m_; }
    Eigen::VectorXd& v() { return v_; }
    const Eigen::VectorXd& m() const { return m_; }
    const Eigen::VectorXd& v() const { return v_; }
    void set_step_count(long t) { step_count_ = t; }

private:
    long step_count_ = 0;
    Eigen::VectorXd m_;
    Eigen::VectorXd v_;
};

// Versioned binary checkpoint: shapes, parameters, optimizer moments, step
// count. Round trip is bit exact.
void save_checkpoint(const std::string& path, const PolicyValueNet& net,
                     const AdamOptimizer* opt = nullptr);
struct Checkpoint {
    PolicyValueNet net;
    std::optional<AdamOptimizer> opt;
};
Checkpoint load_checkpoint(const std::string& path);

}  // namespace polarl
