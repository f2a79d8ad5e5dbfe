#include "uavrl/net.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

using namespace uavrl;

namespace {

NetConfig small_config(Aggregator agg = Aggregator::Mean) {
    NetConfig cfg;
    cfg.trunk_hidden = {8, 8};
    cfg.stream_hidden = {6};
    cfg.actions = 4;
    cfg.aggregator = agg;
    return cfg;
}

double batch_loss(const DuelingNetParams& net, const std::vector<TrainSample>& batch) {
    double loss = 0.0;
    for (const TrainSample& s : batch) {
        const ForwardResult out = forward(net, s.features);
        const double err = out.q.at(static_cast<std::size_t>(s.action)) - s.target;
        loss += err * err;
    }
    return loss / static_cast<double>(batch.size());
}

std::vector<TrainSample> random_batch(const DuelingNetParams& net, Rng& rng, int n) {
    std::vector<TrainSample> batch;
    for (int i = 0; i < n; ++i) {
        TrainSample s;
        s.features = {rng.uniform01(), rng.uniform01(), rng.uniform01()};
        s.action = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(net.action_count())));
        s.target = rng.uniform_sym(2.0);
        batch.push_back(s);
    }
    return batch;
}

// Smallest |preactivation| across the batch; finite differences need to stay
// clear of rectifier kinks.
double min_abs_preactivation(const DuelingNetParams& net, const std::vector<TrainSample>& batch) {
    double min_abs = 1e300;
    detail::Tape tape;
    for (const TrainSample& s : batch) {
        detail::forward_tape(net, s.features.data(), tape);
        for (const auto* stream : {&tape.trunk, &tape.value, &tape.advantage})
            for (const auto& layer : stream->pre)
                for (double z : layer) min_abs = std::min(min_abs, std::abs(z));
        if (net.aggregator == Aggregator::Max) {
            // keep the advantage argmax unambiguous as well
            std::vector<double> adv = tape.adv;
            std::sort(adv.begin(), adv.end());
            min_abs = std::min(min_abs, adv.back() - adv[adv.size() - 2]);
        }
    }
    return min_abs;
}

struct FlatView {
    std::vector<double*> params;
    std::vector<const double*> grads;
};

FlatView flatten(DuelingNetParams& net, const GradientSet& grads) {
    FlatView view;
    auto add = [&view](std::vector<DenseLayer>& layers, const std::vector<DenseLayer>& gs) {
        for (std::size_t li = 0; li < layers.size(); ++li) {
            for (std::size_t i = 0; i < layers[li].w.size(); ++i) {
                view.params.push_back(&layers[li].w[i]);
                view.grads.push_back(&gs[li].w[i]);
            }
            for (std::size_t i = 0; i < layers[li].b.size(); ++i) {
                view.params.push_back(&layers[li].b[i]);
                view.grads.push_back(&gs[li].b[i]);
            }
        }
    };
    add(net.trunk, grads.trunk);
    add(net.value, grads.value);
    add(net.advantage, grads.advantage);
    return view;
}

TEST(Forward, ConstantAdvantageCancelsUnderMean) {
    Rng rng(1);
    DuelingNetParams net = init_params(small_config(), rng);
    // zero the advantage stream weights and pin its output biases to one value
    for (DenseLayer& l : net.advantage) {
        std::fill(l.w.begin(), l.w.end(), 0.0);
        std::fill(l.b.begin(), l.b.end(), 0.0);
    }
    std::fill(net.advantage.back().b.begin(), net.advantage.back().b.end(), 0.75);
    const ForwardResult out = forward(net, {0.2, 0.4, 0.9});
    for (double q : out.q) EXPECT_NEAR(q, out.v, 1e-12);
}

TEST(Forward, MeanOfQEqualsV) {
    Rng rng(2);
    for (int rep = 0; rep < 200; ++rep) {
        DuelingNetParams net = init_params(small_config(), rng);
        const ForwardResult out = forward(net, {rng.uniform01(), rng.uniform01(), rng.uniform01()});
        double mean = 0.0;
        for (double q : out.q) mean += q;
        mean /= static_cast<double>(out.q.size());
        EXPECT_NEAR(mean, out.v, 1e-10 * std::max(1.0, std::abs(out.v)));
    }
}

TEST(Forward, MaxAggregatorPinsArgmaxToV) {
    Rng rng(3);
    for (int rep = 0; rep < 200; ++rep) {
        DuelingNetParams net = init_params(small_config(Aggregator::Max), rng);
        const ForwardResult out = forward(net, {rng.uniform01(), rng.uniform01(), rng.uniform01()});
        std::size_t arg = 0;
        for (std::size_t a = 1; a < out.advantage.size(); ++a)
            if (out.advantage[a] > out.advantage[arg]) arg = a;
        EXPECT_NEAR(out.q[arg], out.v, 1e-10 * std::max(1.0, std::abs(out.v)));
    }
}

TEST(Forward, RejectsNonFiniteInput) {
    Rng rng(4);
    DuelingNetParams net = init_params(small_config(), rng);
    EXPECT_THROW(forward(net, {0.1, std::nan(""), 0.3}), std::domain_error);
}

TEST(Forward, PureAndBitStable) {
    Rng rng(5);
    DuelingNetParams net = init_params(small_config(), rng);
    const std::array<double, 3> x{0.3, 0.6, 0.1};
    const ForwardResult a = forward(net, x);
    const ForwardResult b = forward(net, x);
    EXPECT_EQ(a.v, b.v);
    EXPECT_EQ(a.q, b.q);
}

TEST(Backward, PerfectFitHasZeroLossAndGradients) {
    Rng rng(6);
    DuelingNetParams net = init_params(small_config(), rng);
    std::vector<TrainSample> batch = random_batch(net, rng, 6);
    for (TrainSample& s : batch)
        s.target = forward(net, s.features).q.at(static_cast<std::size_t>(s.action));
    auto [grads, loss] = backward(net, batch);
    EXPECT_NEAR(loss, 0.0, 1e-24);
    FlatView view = flatten(net, grads);
    for (const double* g : view.grads) EXPECT_NEAR(*g, 0.0, 1e-12);
}

// Single linear layer, one sample: d/dw of (q - t)^2 is 2 (q - t) x.
TEST(Backward, MatchesClosedFormOnLinearNet) {
    DuelingNetParams net;
    net.aggregator = Aggregator::Mean;
    net.trunk = {DenseLayer::zeros(3, 3)};
    // identity trunk (positive weights keep the rectifier transparent)
    for (int i = 0; i < 3; ++i) net.trunk[0].w[static_cast<std::size_t>(i) * 3 + i] = 1.0;
    net.value = {DenseLayer::zeros(3, 1)};
    net.advantage = {DenseLayer::zeros(3, 1)};  // single action
    net.value[0].w = {0.5, -0.25, 0.125};
    net.value[0].b = {0.0625};

    const TrainSample sample{{0.5, 0.25, 1.0}, 0, 2.0};
    // advantage cancels exactly with one action: q = v(x)
    const double q = 0.5 * 0.5 + -0.25 * 0.25 + 0.125 * 1.0 + 0.0625;
    auto [grads, loss] = backward(net, {sample});
    EXPECT_NEAR(loss, (q - 2.0) * (q - 2.0), 1e-15);
    const double g = 2.0 * (q - 2.0);
    EXPECT_NEAR(grads.value[0].w[0], g * 0.5, 1e-13);
    EXPECT_NEAR(grads.value[0].w[1], g * 0.25, 1e-13);
    EXPECT_NEAR(grads.value[0].w[2], g * 1.0, 1e-13);
    EXPECT_NEAR(grads.value[0].b[0], g, 1e-13);
}

TEST(Backward, MatchesCentralFiniteDifferences) {
    Rng rng(7);
    for (int rep = 0; rep < 6; ++rep) {
        const Aggregator agg = rep % 2 ? Aggregator::Max : Aggregator::Mean;
        // redraw both the network and the batch until no sample sits near a
        // rectifier kink or an advantage-argmax tie (a dead hidden path can
        // pin advantages equal for every input, so the net must be redrawn)
        DuelingNetParams net = init_params(small_config(agg), rng);
        std::vector<TrainSample> batch = random_batch(net, rng, 5);
        while (min_abs_preactivation(net, batch) < 1e-3) {
            net = init_params(small_config(agg), rng);
            batch = random_batch(net, rng, 5);
        }

        auto [grads, loss_at] = backward(net, batch);
        FlatView view = flatten(net, grads);
        const double h = 1e-5;
        for (std::size_t i = 0; i < view.params.size(); ++i) {
            double* p = view.params[i];
            const double saved = *p;
            *p = saved + h;
            const double up = batch_loss(net, batch);
            *p = saved - h;
            const double down = batch_loss(net, batch);
            *p = saved;
            const double fd = (up - down) / (2.0 * h);
            const double analytic = *view.grads[i];
            const double denom = std::max({std::abs(fd), std::abs(analytic), 1e-3});
            EXPECT_LE(std::abs(fd - analytic) / denom, 1e-4)
                << "param " << i << " fd=" << fd << " analytic=" << analytic;
        }
    }
}

TEST(Backward, RejectsEmptyBatch) {
    Rng rng(8);
    DuelingNetParams net = init_params(small_config(), rng);
    EXPECT_THROW(backward(net, {}), std::logic_error);
}

TEST(Backward, AdvantageBiasShiftLeavesQUnchanged) {
    Rng rng(9);
    DuelingNetParams net = init_params(small_config(), rng);
    const std::array<double, 3> x{0.7, 0.2, 0.5};
    const ForwardResult before = forward(net, x);
    DuelingNetParams shifted = clone_params(net);
    for (double& b : shifted.advantage.back().b) b += 3.25;
    const ForwardResult after = forward(shifted, x);
    for (std::size_t a = 0; a < before.q.size(); ++a)
        EXPECT_NEAR(before.q[a], after.q[a], 1e-8);
}

TEST(Sgd, StepArithmetic) {
    Rng rng(10);
    DuelingNetParams net = init_params(small_config(), rng);
    DuelingNetParams before = clone_params(net);
    GradientSet zero = zero_gradients(net);
    sgd_step(net, zero, 0.0);
    EXPECT_EQ(net.trunk[0].w, before.trunk[0].w);

    // single parameter: p = 1, g = 2, alpha = 0.1 -> 0.8
    DuelingNetParams tiny;
    tiny.trunk = {DenseLayer::zeros(1, 1)};
    tiny.value = {DenseLayer::zeros(1, 1)};
    tiny.advantage = {DenseLayer::zeros(1, 1)};
    tiny.trunk[0].w[0] = 1.0;
    GradientSet g = zero_gradients(tiny);
    g.trunk[0].w[0] = 2.0;
    sgd_step(tiny, g, 0.1);
    EXPECT_NEAR(tiny.trunk[0].w[0], 0.8, 1e-15);

    GradientSet bad = zero_gradients(tiny);
    bad.trunk[0] = DenseLayer::zeros(2, 2);
    EXPECT_THROW(sgd_step(tiny, bad, 0.1), std::logic_error);
}

TEST(Sgd, LossDecreasesOnRepeatedSteps) {
    Rng rng(11);
    DuelingNetParams net = init_params(small_config(), rng);
    std::vector<TrainSample> batch = random_batch(net, rng, 8);
    double prev = batch_loss(net, batch);
    for (int i = 0; i < 50; ++i) {
        auto [grads, loss] = backward(net, batch);
        sgd_step(net, grads, 1e-3);
        const double now = batch_loss(net, batch);
        EXPECT_LT(now, prev + 1e-12);
        prev = now;
    }
}

TEST(Clone, DeepCopySemantics) {
    Rng rng(12);
    DuelingNetParams net = init_params(small_config(), rng);
    DuelingNetParams copy = clone_params(net);
    const std::array<double, 3> x{0.1, 0.9, 0.4};
    const ForwardResult before = forward(copy, x);
    net.trunk[0].w[0] += 100.0;
    const ForwardResult after = forward(copy, x);
    EXPECT_EQ(before.q, after.q);
    for (int i = 0; i < 100; ++i) {
        const std::array<double, 3> r{rng.uniform01(), rng.uniform01(), rng.uniform01()};
        DuelingNetParams c2 = clone_params(net);
        EXPECT_EQ(forward(c2, r).q, forward(net, r).q);
    }
}

TEST(Init, DeterministicUnderSeed) {
    NetConfig cfg = small_config();
    Rng a(33), b(33);
    DuelingNetParams na = init_params(cfg, a);
    DuelingNetParams nb = init_params(cfg, b);
    EXPECT_EQ(na.trunk[0].w, nb.trunk[0].w);
    EXPECT_EQ(na.advantage.back().w, nb.advantage.back().w);
}

TEST(Init, ZeroBiasesAndBoundedWeights) {
    NetConfig cfg;
    cfg.trunk_hidden = {64, 64};
    cfg.stream_hidden = {32};
    Rng rng(34);
    DuelingNetParams net = init_params(cfg, rng);
    for (const auto* chain : {&net.trunk, &net.value, &net.advantage})
        for (const DenseLayer& l : *chain)
            for (double b : l.b) EXPECT_EQ(b, 0.0);

    // the 64x64 trunk layer: bound sqrt(6/128), near-zero mean
    const DenseLayer& big = net.trunk[1];
    ASSERT_EQ(big.w.size(), 4096u);
    const double bound = std::sqrt(6.0 / 128.0);
    double sum = 0.0;
    for (double w : big.w) {
        EXPECT_LE(std::abs(w), bound);
        sum += w;
    }
    const double mean = sum / static_cast<double>(big.w.size());
    const double sigma_mean = bound / std::sqrt(3.0 * static_cast<double>(big.w.size()));
    EXPECT_NEAR(mean, 0.0, 3 * sigma_mean);
}

TEST(Checkpoint, RoundTripsBitExactly) {
    Rng rng(35);
    DuelingNetParams net = init_params(small_config(Aggregator::Max), rng);
    std::stringstream ss;
    save_net(net, ss);
    DuelingNetParams back = load_net(ss);
    EXPECT_EQ(back.aggregator, Aggregator::Max);
    ASSERT_TRUE(back.shape_congruent(net));
    for (std::size_t li = 0; li < net.trunk.size(); ++li)
        EXPECT_EQ(back.trunk[li].w, net.trunk[li].w);
    for (std::size_t li = 0; li < net.value.size(); ++li)
        EXPECT_EQ(back.value[li].w, net.value[li].w);
    for (std::size_t li = 0; li < net.advantage.size(); ++li) {
        EXPECT_EQ(back.advantage[li].w, net.advantage[li].w);
        EXPECT_EQ(back.advantage[li].b, net.advantage[li].b);
    }

    std::stringstream again;
    save_net(back, again);
    EXPECT_EQ(ss.str(), again.str());
}

TEST(Checkpoint, RejectsCorruptHeader) {
    std::stringstream ss;
    ss << "NOT-A-CKPT v9\n";
    EXPECT_THROW(load_net(ss), std::runtime_error);
}

}  // namespace
