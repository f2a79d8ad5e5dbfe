#include "uavrl/transfer.hpp"

#include <gtest/gtest.h>

#include "uavrl/d3ql.hpp"
#include "uavrl/scenarios.hpp"

using namespace uavrl;

namespace {

AnnotatedExperience at_distance(double dist, double reward = 0.0) {
    AnnotatedExperience ae;
    ae.exp.state_features = {dist / 100.0, 0.0, 1.0};
    ae.exp.action = 1;
    ae.exp.reward = reward;
    ae.exp.next_features = {0.0, 0.0, 1.0};
    ae.exp.elapsed_slots = 1;
    ae.origin_distance = dist;
    return ae;
}

TEST(SelectExperiences, FilterThenSortByDistance) {
    std::vector<AnnotatedExperience> pool{at_distance(30, 3), at_distance(1, 1),
                                          at_distance(5, 2)};
    const std::vector<Experience> out = select_experiences(pool, 20.0, 2);
    ASSERT_EQ(out.size(), 2u);
    EXPECT_DOUBLE_EQ(out[0].reward, 1.0);
    EXPECT_DOUBLE_EQ(out[1].reward, 2.0);
}

TEST(SelectExperiences, ZeroRadiusKeepsOnlyStationOrigin) {
    std::vector<AnnotatedExperience> pool{at_distance(0, 7), at_distance(0.5, 8)};
    const std::vector<Experience> out = select_experiences(pool, 0.0, 10);
    ASSERT_EQ(out.size(), 1u);
    EXPECT_DOUBLE_EQ(out[0].reward, 7.0);
}

TEST(SelectExperiences, NoPaddingBeyondQualifiers) {
    std::vector<AnnotatedExperience> pool{at_distance(3), at_distance(9), at_distance(50)};
    EXPECT_EQ(select_experiences(pool, 10.0, 100).size(), 2u);
    EXPECT_THROW(select_experiences(pool, 10.0, 0), std::invalid_argument);
}

TEST(SelectExperiences, OutputSortedNonDecreasing) {
    Rng rng(4);
    std::vector<AnnotatedExperience> pool;
    for (int i = 0; i < 200; ++i) pool.push_back(at_distance(rng.uniform01() * 40.0));
    const double radius = 20.0;
    std::vector<AnnotatedExperience> copy = pool;
    const std::vector<Experience> out = select_experiences(pool, radius, 50);
    double prev = -1.0;
    for (const Experience& e : out) {
        const double dist = e.state_features[0] * 100.0;
        EXPECT_LE(dist, radius + 1e-12);
        EXPECT_GE(dist, prev - 1e-12);
        prev = dist;
    }
}

SourceKnowledge tiny_knowledge(int pool_size) {
    NetConfig ncfg;
    ncfg.trunk_hidden = {8};
    ncfg.stream_hidden = {4};
    Rng rng(99);
    SourceKnowledge know;
    know.params = init_params(ncfg, rng);
    for (int i = 0; i < pool_size; ++i) know.pool.push_back(at_distance(i % 25, i));
    return know;
}

Agent fresh_agent(std::uint64_t seed) {
    NetConfig ncfg;
    ncfg.trunk_hidden = {8};
    ncfg.stream_hidden = {4};
    Rng rng(seed);
    Agent agent;
    agent.q_net = init_params(ncfg, rng);
    agent.target_net = clone_params(agent.q_net);
    return agent;
}

TEST(ApplyTransfer, PolicyCopiesBothNetworks) {
    SourceKnowledge know = tiny_knowledge(10);
    Agent agent = fresh_agent(1);
    ReplayBuffer buf(100);
    apply_transfer(agent, buf, know, TransferMode::policy());
    EXPECT_EQ(buf.size(), 0u);
    Rng rng(7);
    for (int i = 0; i < 100; ++i) {
        const std::array<double, 3> x{rng.uniform01(), rng.uniform01(), rng.uniform01()};
        const ForwardResult a = forward(agent.q_net, x);
        const ForwardResult b = forward(know.params, x);
        const ForwardResult t = forward(agent.target_net, x);
        for (std::size_t k = 0; k < a.q.size(); ++k) {
            EXPECT_NEAR(a.q[k], b.q[k], 1e-12);
            EXPECT_NEAR(t.q[k], b.q[k], 1e-12);
        }
    }
}

TEST(ApplyTransfer, ExperienceSeedsBuffer) {
    SourceKnowledge know = tiny_knowledge(500);
    Agent agent = fresh_agent(2);
    const DuelingNetParams before = clone_params(agent.q_net);
    ReplayBuffer buf(1000);
    apply_transfer(agent, buf, know, TransferMode::experience(100));
    EXPECT_EQ(buf.size(), 100u);
    EXPECT_EQ(agent.q_net.trunk[0].w, before.trunk[0].w);  // ET leaves parameters alone
    // contents preserved verbatim: rewards identify the source entries
    for (const Experience& e : buf.entries()) EXPECT_GE(e.reward, 0.0);
}

TEST(ApplyTransfer, HybridDoesBoth) {
    SourceKnowledge know = tiny_knowledge(2000);
    Agent agent = fresh_agent(3);
    ReplayBuffer buf(5000);
    apply_transfer(agent, buf, know, TransferMode::hybrid(1000));
    EXPECT_EQ(buf.size(), 1000u);
    const std::array<double, 3> x{0.3, 0.3, 0.3};
    EXPECT_NEAR(forward(agent.q_net, x).q[0], forward(know.params, x).q[0], 1e-12);
}

TEST(ApplyTransfer, NeverExceedsBufferCapacity) {
    SourceKnowledge know = tiny_knowledge(5000);
    Agent agent = fresh_agent(4);
    ReplayBuffer buf(64);
    apply_transfer(agent, buf, know, TransferMode::experience(5000));
    EXPECT_EQ(buf.size(), 64u);
}

TEST(ApplyTransfer, ArchitectureMismatchRejected) {
    SourceKnowledge know = tiny_knowledge(10);
    NetConfig other;
    other.trunk_hidden = {16};
    other.stream_hidden = {4};
    Rng rng(5);
    Agent agent;
    agent.q_net = init_params(other, rng);
    agent.target_net = clone_params(agent.q_net);
    ReplayBuffer buf(10);
    EXPECT_THROW(apply_transfer(agent, buf, know, TransferMode::policy()), std::logic_error);
    EXPECT_NO_THROW(apply_transfer(agent, buf, know, TransferMode::experience(5)));
}

MetricTrace constant_trace(double value, std::size_t n) {
    MetricTrace t;
    for (std::size_t i = 0; i < n; ++i) t.rows.push_back({static_cast<std::int64_t>(500 * (i + 1)),
                                                          value, 0.0, 0.0});
    return t;
}

TEST(TlMetrics, JumpStart) {
    MetricTrace tl = constant_trace(0.5, 30);
    MetricTrace base = constant_trace(0.2, 30);
    EXPECT_NEAR(jump_start(tl, base, 10), 0.3, 1e-12);
    EXPECT_NEAR(jump_start(base, base, 10), 0.0, 1e-12);
    EXPECT_THROW(jump_start(tl, base, 31), std::logic_error);
}

TEST(TlMetrics, AsymptoticGain) {
    MetricTrace tl = constant_trace(0.68, 40);
    MetricTrace base = constant_trace(0.25, 40);
    EXPECT_NEAR(asymptotic_gain(tl, base, 20), 0.43, 1e-12);
    EXPECT_NEAR(asymptotic_gain(base, base, 20), 0.0, 1e-12);
    EXPECT_THROW(asymptotic_gain(tl, base, 41), std::logic_error);
}

TEST(TlMetrics, TimeToThreshold) {
    MetricTrace t;
    t.rows.push_back({500, 0.1, 0, 0});
    t.rows.push_back({1000, 0.3, 0, 0});
    t.rows.push_back({1500, 0.5, 0, 0});
    EXPECT_EQ(time_to_threshold(t, 0.3), std::optional<std::size_t>(1));
    EXPECT_EQ(time_to_threshold(t, 0.05), std::optional<std::size_t>(0));
    EXPECT_EQ(time_to_threshold(t, 0.9), std::nullopt);
}

TEST(TransferTraining, PolicyTransferMatchesSourceAtStepZero) {
    EnvConfig cfg = build_scenario(ScenarioId::SourceMS);
    NetConfig ncfg;
    ncfg.trunk_hidden = {8};
    ncfg.stream_hidden = {4};
    Rng rng(77);
    SourceKnowledge know;
    know.params = init_params(ncfg, rng);

    D3qlConfig dcfg;
    dcfg.total_steps = 1;  // stop before any update can drift the parameters
    dcfg.batch_size = 32;
    dcfg.net = ncfg;
    TransferRequest req{TransferMode::policy(), &know, 20.0};
    D3qlRun run = train_d3ql(cfg, dcfg, 8, req);
    for (std::size_t li = 0; li < know.params.trunk.size(); ++li)
        EXPECT_EQ(run.agent.q_net.trunk[li].w, know.params.trunk[li].w);
}

}  // namespace
