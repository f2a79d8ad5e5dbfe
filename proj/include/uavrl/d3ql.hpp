#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "uavrl/agent.hpp"
#include "uavrl/metrics.hpp"
#include "uavrl/transfer.hpp"

namespace uavrl {

struct TransferRequest {
    TransferMode mode;
    const SourceKnowledge* knowledge = nullptr;
    double station_radius = 20.0;
};

struct D3qlRun {
    Agent agent;
    MetricTrace trace;
    std::vector<AnnotatedExperience> pool;
    std::int64_t updates_done = 0;
    double final_epsilon = 0.0;
};

// Deep dueling double Q-learning: epsilon-greedy interaction, replay-sampled
// double-estimator targets, one SGD step per decision, and a periodic target
// sync. No update happens until the buffer holds one full batch. Optional
// transfer seeding runs once, before the first step.
inline D3qlRun train_d3ql(const EnvConfig& env_cfg, const D3qlConfig& cfg, std::uint64_t seed,
                          const std::optional<TransferRequest>& transfer = std::nullopt,
                          bool mask_battery_action = false, bool record_pool = true) {
    env_cfg.validate();
    cfg.validate();
    Rng rng(seed);

    D3qlRun run;
    run.agent.q_net = init_params(cfg.net, rng);
    run.agent.target_net = clone_params(run.agent.q_net);
    ReplayBuffer buffer(cfg.buffer_capacity);

    if (transfer) {
        if (!transfer->knowledge) throw std::logic_error("transfer request without knowledge");
        apply_transfer(run.agent, buffer, *transfer->knowledge, transfer->mode,
                       transfer->station_radius);
    }

    RolloutAccumulator acc;
    UavState state = UavState::working(0.0, env_cfg.max_energy);
    std::vector<TrainSample> batch;
    batch.reserve(static_cast<std::size_t>(cfg.batch_size));
    double eps = cfg.epsilon.at(0);

    for (std::int64_t t = 0; t < cfg.total_steps; ++t) {
        eps = cfg.epsilon.at(t);
        const std::vector<int> feasible =
            learner_actions(env_cfg, state.energy, mask_battery_action);
        const std::array<double, 3> features = state_features(env_cfg, state);

        int action;
        if (eps > 0.0 && rng.uniform01() < eps) {
            action = feasible[rng.uniform_int(feasible.size())];
        } else {
            action = greedy_action(run.agent, features, feasible);
        }

        const double origin_distance = distance_to_station(env_cfg, state.arc_pos);
        const StepOutcome out = step(env_cfg, state, action, rng);
        const Experience exp = make_experience(env_cfg, state, action, out);
        buffer.push(exp);
        if (record_pool) run.pool.push_back({exp, origin_distance});

        if (buffer.size() >= static_cast<std::size_t>(cfg.batch_size)) {
            const std::vector<Experience> sampled =
                buffer.sample(static_cast<std::size_t>(cfg.batch_size), rng);
            batch.clear();
            for (const Experience& e : sampled) {
                const int next_energy = energy_from_features(env_cfg, e.next_features);
                const std::vector<int> next_actions = target_actions(
                    env_cfg, next_energy, mask_battery_action, cfg.action_mask_by_energy);
                const double target = double_q_target(run.agent, e, cfg.zeta, next_actions);
                batch.push_back({e.state_features, e.action, target});
            }
            auto [grads, loss] = backward(run.agent.q_net, batch);
            sgd_step(run.agent.q_net, grads, cfg.alpha);
            ++run.updates_done;
        }

        ++run.agent.steps_done;
        if (run.agent.steps_done % cfg.sync_interval == 0)
            run.agent.target_net = clone_params(run.agent.q_net);

        acc.add(out.reward, out.packets, out.energy_spent, out.elapsed_slots);
        if ((t + 1) % cfg.checkpoint_every == 0) run.trace.checkpoint(t + 1, acc);
        state = out.next;
    }
    run.final_epsilon = eps;
    return run;
}

}  // namespace uavrl
