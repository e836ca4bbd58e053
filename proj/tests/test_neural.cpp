#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "polarl/neural.hpp"

using namespace polarl;

namespace {

Eigen::MatrixXd random_states(int b, int n, RngStream& rng, int max_set_bits) {
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(b, n);
    for (int i = 0; i < b; ++i) {
        const int set = static_cast<int>(rng.uniform_below(max_set_bits + 1));
        for (int j = 0; j < set; ++j) {
            s(i, static_cast<int>(rng.uniform_below(n))) = 1.0;
        }
    }
    return s;
}

int legal_label(const Eigen::MatrixXd& states, int row, RngStream& rng) {
    const int n = static_cast<int>(states.cols());
    int a;
    do {
        a = static_cast<int>(rng.uniform_below(n));
    } while (states(row, a) != 0.0);
    return a;
}

PolicyValueNet random_net(int n, int h, RngStream& rng) {
    PolicyValueNet net = PolicyValueNet::initialized(n, h, rng);
    // heads get small random values too so the losses are generic
    for (Eigen::Index i = 0; i < net.param_count(); ++i) {
        if (net.params()[i] == 0.0) net.params()[i] = 0.05 * rng.gaussian();
    }
    return net;
}

// central finite differences over every parameter
template <typename LossFn>
void check_gradients(PolicyValueNet& net, const LossFn& loss_fn, const NetGradients& grads,
                     double step = 1e-5, double rel_tol = 1e-4) {
    double max_rel = 0.0;
    for (Eigen::Index i = 0; i < net.param_count(); ++i) {
        const double saved = net.params()[i];
        net.params()[i] = saved + step;
        const double up = loss_fn(net);
        net.params()[i] = saved - step;
        const double down = loss_fn(net);
        net.params()[i] = saved;
        const double fd = (up - down) / (2.0 * step);
        const double an = grads.values[i];
        const double rel = std::fabs(fd - an) / std::max({1.0, std::fabs(fd), std::fabs(an)});
        max_rel = std::max(max_rel, rel);
    }
    CHECK(max_rel < rel_tol);
}

}  // namespace

TEST_CASE("masked softmax: forced, uniform, and leak-free") {
    RngStream rng(31, 0);
    PolicyValueNet net = random_net(8, 16, rng);

    // all bits set except index 3: pmf collapses there
    Eigen::VectorXd s = Eigen::VectorXd::Ones(8);
    s[3] = 0.0;
    const PolicyOutput out = forward(net, s);
    CHECK(out.pmf[3] >= 1.0 - 1e-6);

    // zero heads: uniform over legal actions
    PolicyValueNet zero_heads(8, 16);
    RngStream rng2(32, 0);
    zero_heads = PolicyValueNet::initialized(8, 16, rng2);
    Eigen::VectorXd s2 = Eigen::VectorXd::Zero(8);
    s2[1] = s2[6] = 1.0;
    const PolicyOutput u = forward(zero_heads, s2);
    for (int i = 0; i < 8; ++i) {
        if (i == 1 || i == 6) {
            CHECK(u.pmf[i] == 0.0);
        } else {
            CHECK(u.pmf[i] == doctest::Approx(1.0 / 6).epsilon(1e-12));
        }
    }
    CHECK(u.value == 0.0);

    // no probability leaks to illegal actions; pmf sums to one
    for (int trial = 0; trial < 1000; ++trial) {
        const Eigen::MatrixXd states = random_states(1, 8, rng, 7);
        const PolicyOutput o = forward(net, states.row(0).transpose());
        double illegal = 0.0, total = 0.0;
        Eigen::Index arg;
        o.pmf.maxCoeff(&arg);
        for (int i = 0; i < 8; ++i) {
            total += o.pmf[i];
            if (states(0, i) != 0.0) illegal += o.pmf[i];
        }
        CHECK(illegal <= 1e-6);
        CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(states(0, arg) == 0.0);  // argmax is legal
    }
}

TEST_CASE("ppo loss gradients match central finite differences") {
    RngStream rng(33, 1);
    PolicyValueNet net = random_net(8, 16, rng);

    const int b = 12;
    PpoBatchView batch;
    batch.states = random_states(b, 8, rng, 6);
    batch.actions.resize(b);
    batch.advantages.resize(b);
    batch.returns.resize(b);
    batch.logp_old.resize(b);
    for (int i = 0; i < b; ++i) {
        batch.actions[i] = legal_label(batch.states, i, rng);
        batch.advantages[i] = rng.gaussian();
        batch.returns[i] = rng.gaussian();
        batch.logp_old[i] = -std::log(8.0) + 0.3 * rng.gaussian();
    }

    SUBCASE("full ppo loss: clip + value + entropy") {
        const PpoLossSpec spec{0.2, 0.5, 0.01};
        NetGradients grads = NetGradients::zeros_like(net);
        ppo_loss(net, batch, spec, &grads);
        check_gradients(net, [&](const PolicyValueNet& n) {
            return ppo_loss(n, batch, spec, nullptr);
        }, grads);
    }

    SUBCASE("zero advantages with beta_c = beta_e = 0 give exactly zero gradients") {
        batch.advantages.setZero();
        const PpoLossSpec spec{0.2, 0.0, 0.0};
        NetGradients grads = NetGradients::zeros_like(net);
        const double loss = ppo_loss(net, batch, spec, &grads);
        CHECK(loss == 0.0);
        CHECK(grads.values.cwiseAbs().maxCoeff() == 0.0);
    }

    SUBCASE("duplicated rows equal single rows under mean reduction") {
        const PpoLossSpec spec{0.2, 0.5, 0.01};
        NetGradients single = NetGradients::zeros_like(net);
        const double loss1 = ppo_loss(net, batch, spec, &single);

        PpoBatchView doubled;
        doubled.states.resize(2 * b, 8);
        doubled.states << batch.states, batch.states;
        doubled.actions = batch.actions;
        doubled.actions.insert(doubled.actions.end(), batch.actions.begin(),
                               batch.actions.end());
        doubled.advantages.resize(2 * b);
        doubled.advantages << batch.advantages, batch.advantages;
        doubled.returns.resize(2 * b);
        doubled.returns << batch.returns, batch.returns;
        doubled.logp_old.resize(2 * b);
        doubled.logp_old << batch.logp_old, batch.logp_old;

        NetGradients both = NetGradients::zeros_like(net);
        const double loss2 = ppo_loss(net, doubled, spec, &both);
        CHECK(loss1 == doctest::Approx(loss2).epsilon(1e-12));
        CHECK((single.values - both.values).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("pretrain loss gradients match central finite differences") {
    RngStream rng(34, 2);
    PolicyValueNet net = random_net(8, 16, rng);
    const int b = 10;
    PretrainBatchView batch;
    batch.states = random_states(b, 8, rng, 6);
    batch.labels.resize(b);
    for (int i = 0; i < b; ++i) batch.labels[i] = legal_label(batch.states, i, rng);

    const PretrainLossSpec spec{1.0};
    NetGradients grads = NetGradients::zeros_like(net);
    pretrain_loss(net, batch, spec, &grads);
    check_gradients(net, [&](const PolicyValueNet& n) {
        return pretrain_loss(n, batch, spec, nullptr);
    }, grads);
}

TEST_CASE("entropy of a uniform policy over m legal actions is ln m") {
    RngStream rng(35, 3);
    PolicyValueNet net = PolicyValueNet::initialized(8, 16, rng);  // zero heads
    Eigen::VectorXd s = Eigen::VectorXd::Zero(8);
    s[0] = s[5] = s[7] = 1.0;  // 5 legal actions
    const PolicyOutput out = forward(net, s);
    double entropy = 0.0;
    for (int i = 0; i < 8; ++i) {
        if (out.pmf[i] > 0) entropy -= out.pmf[i] * out.logp[i];
    }
    CHECK(entropy == doctest::Approx(std::log(5.0)).epsilon(1e-9));
}

TEST_CASE("adam identities") {
    RngStream rng(36, 4);
    PolicyValueNet net = random_net(4, 8, rng);
    const Eigen::VectorXd before = net.params();
    AdamOptimizer opt(net);

    SUBCASE("zero gradients leave parameters unchanged") {
        NetGradients zero = NetGradients::zeros_like(net);
        opt.step(net, zero, 3e-4);
        CHECK(net.params() == before);
    }

    SUBCASE("first step has magnitude ~lr in every coordinate") {
        NetGradients g = NetGradients::zeros_like(net);
        g.values.setConstant(0.37);
        opt.step(net, g, 1e-3);
        const Eigen::VectorXd delta = (net.params() - before).cwiseAbs();
        CHECK(delta.minCoeff() == doctest::Approx(1e-3).epsilon(1e-4));
        CHECK(delta.maxCoeff() == doctest::Approx(1e-3).epsilon(1e-4));
    }

    SUBCASE("same inputs give bit-identical updates") {
        PolicyValueNet net2 = net;
        AdamOptimizer opt2(net2);
        NetGradients g = NetGradients::zeros_like(net);
        for (Eigen::Index i = 0; i < g.values.size(); ++i) g.values[i] = rng.gaussian();
        opt.step(net, g, 3e-4);
        opt2.step(net2, g, 3e-4);
        CHECK(net.params() == net2.params());
    }
}

TEST_CASE("checkpoint round trip is bit exact") {
    RngStream rng(37, 5);
    PolicyValueNet net = random_net(8, 16, rng);
    AdamOptimizer opt(net);
    NetGradients g = NetGradients::zeros_like(net);
    for (Eigen::Index i = 0; i < g.values.size(); ++i) g.values[i] = rng.gaussian();
    opt.step(net, g, 3e-4);

    const std::string path =
        (std::filesystem::temp_directory_path() / "polarl_ck_test.net").string();
    save_checkpoint(path, net, &opt);
    Checkpoint ck = load_checkpoint(path);
    REQUIRE(ck.opt.has_value());
    CHECK(ck.net.params() == net.params());
    CHECK(ck.opt->m() == opt.m());
    CHECK(ck.opt->v() == opt.v());
    CHECK(ck.opt->step_count() == opt.step_count());

    // one identical update after reload stays bit-identical
    PolicyValueNet a = net;
    PolicyValueNet b = ck.net;
    AdamOptimizer oa = opt;
    AdamOptimizer ob = *ck.opt;
    for (Eigen::Index i = 0; i < g.values.size(); ++i) g.values[i] = 0.01 * (i % 7);
    oa.step(a, g, 3e-4);
    ob.step(b, g, 3e-4);
    CHECK(a.params() == b.params());
    std::filesystem::remove(path);
}

TEST_CASE("value head reinit zeroes only the head") {
    RngStream rng(38, 6);
    PolicyValueNet net = random_net(8, 16, rng);
    const Eigen::VectorXd before = net.params();
    net.reinit_value_head();
    CHECK(net.wv().cwiseAbs().maxCoeff() == 0.0);
    CHECK(net.bv() == 0.0);
    // everything else untouched
    const Eigen::Index tail = net.hidden_dim() + 1;
    CHECK(net.params().head(net.param_count() - tail) ==
          before.head(net.param_count() - tail));
}
