#include "polarl/neural.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace polarl {

PolicyValueNet::PolicyValueNet(int input_dim, int hidden_dim)
    : n_(input_dim), h_(hidden_dim) {
    if (n_ < 1 || h_ < 1) {
        throw std::invalid_argument("PolicyValueNet: dims must be positive");
    }
    compute_offsets();
}

void PolicyValueNet::compute_offsets() {
    Eigen::Index off = 0;
    off_w1_ = off; off += static_cast<Eigen::Index>(h_) * n_;
    off_b1_ = off; off += h_;
    off_w2_ = off; off += static_cast<Eigen::Index>(h_) * h_;
    off_b2_ = off; off += h_;
    off_wp_ = off; off += static_cast<Eigen::Index>(n_) * h_;
    off_bp_ = off; off += n_;
    off_wv_ = off; off += h_;
    off_bv_ = off; off += 1;
    params_ = Eigen::VectorXd::Zero(off);
}

PolicyValueNet PolicyValueNet::initialized(int input_dim, int hidden_dim, RngStream& rng) {
    PolicyValueNet net(input_dim, hidden_dim);
    auto fill_gaussian = [&](PolicyValueNet::MatView m, double scale) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            for (Eigen::Index r = 0; r < m.rows(); ++r) {
                m(r, c) = scale * rng.gaussian();
            }
        }
    };
    fill_gaussian(net.w1(), std::sqrt(1.0 / input_dim));
    fill_gaussian(net.w2(), std::sqrt(1.0 / hidden_dim));
    // biases and both heads stay zero: initial pmf is uniform over legal
    // actions and the initial value estimate is 0
    return net;
}

void PolicyValueNet::reinit_value_head() {
    wv().setZero();
    bv() = 0.0;
}

namespace {

// row-wise masked log-softmax; mask rows are the 0/1 states
void masked_log_softmax(const Eigen::MatrixXd& raw_logits, const Eigen::MatrixXd& states,
                        Eigen::MatrixXd& logp, Eigen::MatrixXd& pmf) {
    const Eigen::Index b = raw_logits.rows();
    Eigen::MatrixXd masked = raw_logits - PolicyValueNet::kMaskConstant * states;
    logp.resize(masked.rows(), masked.cols());
    for (Eigen::Index i = 0; i < b; ++i) {
        const double mx = masked.row(i).maxCoeff();
        const double lse = mx + std::log((masked.row(i).array() - mx).exp().sum());
        logp.row(i) = masked.row(i).array() - lse;
    }
    // vectorized exp clamps large negative inputs to a subnormal instead of
    // 0; screened entries must carry exactly zero mass
    pmf = (logp.array().exp() * (1.0 - states.array())).matrix();
}

}  // namespace

ForwardPass forward_batch(const PolicyValueNet& net, const Eigen::MatrixXd& states) {
    if (states.cols() != net.input_dim()) {
        throw std::invalid_argument("forward_batch: state width != N");
    }
    ForwardPass f;
    f.h1 = ((states * net.w1().transpose()).rowwise() + net.b1().transpose()).array().tanh();
    f.h2 = ((f.h1 * net.w2().transpose()).rowwise() + net.b2().transpose()).array().tanh();
    Eigen::MatrixXd logits = (f.h2 * net.wp().transpose()).rowwise() + net.bp().transpose();
    masked_log_softmax(logits, states, f.logp, f.pmf);
    f.values = (f.h2 * net.wv()).array() + net.bv();
    return f;
}

PolicyOutput forward(const PolicyValueNet& net, const Eigen::VectorXd& state) {
    ForwardPass f = forward_batch(net, state.transpose());
    PolicyOutput out;
    out.pmf = f.pmf.row(0);
    out.logp = f.logp.row(0);
    out.value = f.values[0];
    return out;
}

void backward_batch(const PolicyValueNet& net, const Eigen::MatrixXd& states,
                    const ForwardPass& fwd, const Eigen::MatrixXd& d_logits,
                    const Eigen::VectorXd& d_values, NetGradients& out) {
    PolicyValueNet scratch(net.input_dim(), net.hidden_dim());
    if (out.values.size() != net.param_count()) {
        out.values = Eigen::VectorXd::Zero(net.param_count());
    }
    // reuse the offset layout of a scratch net to view the gradient vector
    std::swap(scratch.params(), out.values);

    // heads
    scratch.wp() += d_logits.transpose() * fwd.h2;
    scratch.bp() += d_logits.colwise().sum().transpose();
    scratch.wv() += fwd.h2.transpose() * d_values;
    scratch.bv() += d_values.sum();

    // trunk
    Eigen::MatrixXd d_h2 = d_logits * net.wp() + d_values * net.wv().transpose();
    Eigen::MatrixXd d_z2 = d_h2.array() * (1.0 - fwd.h2.array().square());
    scratch.w2() += d_z2.transpose() * fwd.h1;
    scratch.b2() += d_z2.colwise().sum().transpose();

    Eigen::MatrixXd d_h1 = d_z2 * net.w2();
    Eigen::MatrixXd d_z1 = d_h1.array() * (1.0 - fwd.h1.array().square());
    scratch.w1() += d_z1.transpose() * states;
    scratch.b1() += d_z1.colwise().sum().transpose();

    std::swap(scratch.params(), out.values);
}

double ppo_loss(const PolicyValueNet& net, const PpoBatchView& batch,
                const PpoLossSpec& spec, NetGradients* grads) {
    const Eigen::Index b = batch.states.rows();
    if (b == 0) throw std::invalid_argument("ppo_loss: empty batch");
    const ForwardPass fwd = forward_batch(net, batch.states);

    Eigen::MatrixXd d_logits = Eigen::MatrixXd::Zero(b, net.input_dim());
    Eigen::VectorXd d_values = Eigen::VectorXd::Zero(b);
    const double inv_b = 1.0 / static_cast<double>(b);

    double loss = 0.0;
    for (Eigen::Index t = 0; t < b; ++t) {
        const int a = batch.actions[t];
        const double adv = batch.advantages[t];
        const double logp_new = fwd.logp(t, a);
        const double ratio = std::exp(logp_new - batch.logp_old[t]);
        const double clipped =
            std::min(std::max(ratio, 1.0 - spec.clip_epsilon), 1.0 + spec.clip_epsilon);
        const double surr_unclipped = ratio * adv;
        const double surr_clipped = clipped * adv;
        const bool use_unclipped = surr_unclipped <= surr_clipped;
        loss -= std::min(surr_unclipped, surr_clipped);

        // entropy over legal actions; pmf is exactly 0 on masked entries
        double entropy = 0.0;
        for (Eigen::Index i = 0; i < net.input_dim(); ++i) {
            const double p = fwd.pmf(t, i);
            if (p > 0.0) entropy -= p * fwd.logp(t, i);
        }
        loss -= spec.beta_e * entropy;

        const double verr = fwd.values[t] - batch.returns[t];
        loss += spec.beta_c * verr * verr;

        if (grads) {
            // policy surrogate: gradient flows only through the active branch
            if (use_unclipped && adv != 0.0) {
                const double coef = -adv * ratio * inv_b;
                for (Eigen::Index i = 0; i < net.input_dim(); ++i) {
                    const double ind = (i == a) ? 1.0 : 0.0;
                    d_logits(t, i) += coef * (ind - fwd.pmf(t, i));
                }
            }
            if (spec.beta_e != 0.0) {
                for (Eigen::Index i = 0; i < net.input_dim(); ++i) {
                    const double p = fwd.pmf(t, i);
                    if (p > 0.0) {
                        d_logits(t, i) += spec.beta_e * p * (fwd.logp(t, i) + entropy) * inv_b;
                    }
                }
            }
            d_values[t] = 2.0 * spec.beta_c * verr * inv_b;
        }
    }
    loss *= inv_b;
    if (grads) backward_batch(net, batch.states, fwd, d_logits, d_values, *grads);
    return loss;
}

double pretrain_loss(const PolicyValueNet& net, const PretrainBatchView& batch,
                     const PretrainLossSpec& spec, NetGradients* grads) {
    const Eigen::Index b = batch.states.rows();
    if (b == 0) throw std::invalid_argument("pretrain_loss: empty batch");
    const ForwardPass fwd = forward_batch(net, batch.states);

    Eigen::MatrixXd d_logits = Eigen::MatrixXd::Zero(b, net.input_dim());
    const double inv_b = 1.0 / static_cast<double>(b);

    double loss = 0.0;
    for (Eigen::Index t = 0; t < b; ++t) {
        const int a = batch.labels[t];
        loss -= fwd.logp(t, a);

        double entropy = 0.0;
        for (Eigen::Index i = 0; i < net.input_dim(); ++i) {
            const double p = fwd.pmf(t, i);
            if (p > 0.0) entropy -= p * fwd.logp(t, i);
        }
        loss -= spec.beta_entropy * entropy;

        if (grads) {
            for (Eigen::Index i = 0; i < net.input_dim(); ++i) {
                const double ind = (i == a) ? 1.0 : 0.0;
                d_logits(t, i) += (fwd.pmf(t, i) - ind) * inv_b;
                const double p = fwd.pmf(t, i);
                if (spec.beta_entropy != 0.0 && p > 0.0) {
                    d_logits(t, i) +=
                        spec.beta_entropy * p * (fwd.logp(t, i) + entropy) * inv_b;
                }
            }
        }
    }
    loss *= inv_b;
    if (grads) {
        backward_batch(net, batch.states, fwd, d_logits, Eigen::VectorXd::Zero(b), *grads);
    }
    return loss;
}

AdamOptimizer::AdamOptimizer(const PolicyValueNet& net)
    : m_(Eigen::VectorXd::Zero(net.param_count())),
      v_(Eigen::VectorXd::Zero(net.param_count())) {}

void AdamOptimizer::step(PolicyValueNet& net, const NetGradients& grads, double lr) {
    if (grads.values.size() != net.param_count() || m_.size() != net.param_count()) {
        throw std::invalid_argument("AdamOptimizer: shape mismatch");
    }
    ++step_count_;
    constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    m_ = b1 * m_ + (1.0 - b1) * grads.values;
    v_ = (b2 * v_.array() + (1.0 - b2) * grads.values.array().square()).matrix();
    const double corr1 = 1.0 - std::pow(b1, static_cast<double>(step_count_));
    const double corr2 = 1.0 - std::pow(b2, static_cast<double>(step_count_));
    net.params().array() -=
        lr * (m_.array() / corr1) / ((v_.array() / corr2).sqrt() + eps);
}

void AdamOptimizer::reset_value_head_state(const PolicyValueNet& net) {
    // value head is the trailing H+1 parameters (wv, bv)
    const Eigen::Index tail = net.hidden_dim() + 1;
    m_.tail(tail).setZero();
    v_.tail(tail).setZero();
}

namespace {

constexpr char kMagic[4] = {'P', 'V', 'N', '1'};

template <typename T>
void put(std::ofstream& f, const T& v) {
    f.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::ifstream& f) {
    T v;
    f.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!f) throw std::runtime_error("checkpoint: truncated file");
    return v;
}

void put_vec(std::ofstream& f, const Eigen::VectorXd& v) {
    put<std::int64_t>(f, v.size());
    f.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(double)));
}

Eigen::VectorXd get_vec(std::ifstream& f) {
    const auto n = get<std::int64_t>(f);
    Eigen::VectorXd v(n);
    f.read(reinterpret_cast<char*>(v.data()),
           static_cast<std::streamsize>(n * sizeof(double)));
    if (!f) throw std::runtime_error("checkpoint: truncated file");
    return v;
}

}  // namespace

void save_checkpoint(const std::string& path, const PolicyValueNet& net,
                     const AdamOptimizer* opt) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("checkpoint: cannot open for write: " + path);
    f.write(kMagic, 4);
    put<std::uint32_t>(f, 1);
    put<std::int32_t>(f, net.input_dim());
    put<std::int32_t>(f, net.hidden_dim());
    put_vec(f, net.params());
    put<std::uint8_t>(f, opt ? 1 : 0);
    if (opt) {
        put<std::int64_t>(f, opt->step_count());
        put_vec(f, opt->m());
        put_vec(f, opt->v());
    }
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("checkpoint: cannot open: " + path);
    char magic[4];
    f.read(magic, 4);
    if (!f || std::memcmp(magic, kMagic, 4) != 0) {
        throw std::runtime_error("checkpoint: bad magic");
    }
    const auto version = get<std::uint32_t>(f);
    if (version != 1) throw std::runtime_error("checkpoint: unsupported version");
    const auto n = get<std::int32_t>(f);
    const auto h = get<std::int32_t>(f);
    Checkpoint ck;
    ck.net = PolicyValueNet(n, h);
    Eigen::VectorXd params = get_vec(f);
    if (params.size() != ck.net.param_count()) {
        throw std::runtime_error("checkpoint: parameter count mismatch");
    }
    ck.net.params() = params;
    const auto has_opt = get<std::uint8_t>(f);
    if (has_opt) {
        AdamOptimizer opt(ck.net);
        opt.set_step_count(get<std::int64_t>(f));
        opt.m() = get_vec(f);
        opt.v() = get_vec(f);
        if (opt.m().size() != ck.net.param_count() || opt.v().size() != ck.net.param_count()) {
            throw std::runtime_error("checkpoint: moment size mismatch");
        }
        ck.opt = std::move(opt);
    }
    return ck;
}

}  // namespace polarl
