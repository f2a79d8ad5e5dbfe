#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <stdexcept>
#include <utility>
#include <vector>

#include "uavrl/agent.hpp"
#include "uavrl/env.hpp"
#include "uavrl/metrics.hpp"
#include "uavrl/qtable.hpp"

namespace uavrl {

// A policy maps the current working state to a feasible action id.
using Policy = std::function<int(const EnvConfig&, const UavState&)>;

// Always flies at the requested speed; falls back to the dearest affordable
// speed when short on energy and never chooses the battery action, relying on
// forced replenishment instead.
inline Policy fixed_speed_policy(int speed_index) {
    if (speed_index < 1) throw std::invalid_argument("speed index starts at 1");
    return [speed_index](const EnvConfig& cfg, const UavState& s) {
        if (speed_index > cfg.speed_action_count())
            throw std::invalid_argument("speed index beyond configured speeds");
        const std::size_t want = static_cast<std::size_t>(speed_index - 1);
        if (cfg.costs[want] <= s.energy) return speed_index;
        for (int a = speed_index - 1; a >= 1; --a)
            if (cfg.costs[static_cast<std::size_t>(a - 1)] <= s.energy) return a;
        return speed_index;  // unreachable from decision states; step() rejects
    };
}

// Greedy rollout policy for a trained network.
inline Policy greedy_net_policy(DuelingNetParams net, bool mask_battery = false) {
    auto shared = std::make_shared<Agent>(Agent{std::move(net), {}, 0});
    return [shared, mask_battery](const EnvConfig& cfg, const UavState& s) {
        return greedy_action(*shared, state_features(cfg, s),
                             learner_actions(cfg, s.energy, mask_battery));
    };
}

// Greedy rollout policy for a trained Q-table.
inline Policy greedy_qtable_policy(QTable table) {
    auto shared = std::make_shared<QTable>(std::move(table));
    return [shared](const EnvConfig& cfg, const UavState& s) {
        const GridState gs = discretize(cfg, s);
        const std::vector<int> feasible = tabular_actions(cfg, s.energy);
        int best = feasible.front();
        double best_q = shared->get(gs, best);
        for (std::size_t i = 1; i < feasible.size(); ++i) {
            const double q = shared->get(gs, feasible[i]);
            if (q > best_q) {
                best = feasible[i];
                best_q = q;
            }
        }
        return best;
    };
}

// Simulates the policy from a full battery at the trajectory origin until at
// least min_slots slots have elapsed.
inline RolloutAccumulator run_rollout(const EnvConfig& cfg, const Policy& policy,
                                      std::int64_t min_slots, std::uint64_t seed) {
    Rng rng(seed);
    RolloutAccumulator acc;
    UavState state = UavState::working(0.0, cfg.max_energy);
    while (acc.slots < min_slots) {
        const int action = policy(cfg, state);
        const StepOutcome out = step(cfg, state, action, rng);
        acc.add(out.reward, out.packets, out.energy_spent, out.elapsed_slots);
        state = out.next;
    }
    return acc;
}

struct AggregateMetrics {
    double mean_reward = 0.0, se_reward = 0.0;
    double mean_throughput = 0.0, se_throughput = 0.0;
    double mean_energy = 0.0, se_energy = 0.0;
    std::vector<RolloutAccumulator> per_seed;
};

inline AggregateMetrics aggregate_rollouts(std::vector<RolloutAccumulator> per_seed) {
    if (per_seed.empty()) throw std::invalid_argument("need at least one rollout");
    AggregateMetrics agg;
    agg.per_seed = std::move(per_seed);
    const double n = static_cast<double>(agg.per_seed.size());
    auto mean_se = [n](const std::vector<double>& xs) {
        double mean = 0.0;
        for (double x : xs) mean += x;
        mean /= n;
        double var = 0.0;
        for (double x : xs) var += (x - mean) * (x - mean);
        const double se = n > 1 ? std::sqrt(var / (n - 1) / n) : 0.0;
        return std::pair<double, double>(mean, se);
    };
    std::vector<double> r, tp, en;
    for (const RolloutAccumulator& a : agg.per_seed) {
        r.push_back(a.avg_reward());
        tp.push_back(a.throughput());
        en.push_back(a.energy_per_slot());
    }
    std::tie(agg.mean_reward, agg.se_reward) = mean_se(r);
    std::tie(agg.mean_throughput, agg.se_throughput) = mean_se(tp);
    std::tie(agg.mean_energy, agg.se_energy) = mean_se(en);
    return agg;
}

// Greedy (epsilon = 0) rollouts, deterministic per seed.
inline AggregateMetrics evaluate_policy(const EnvConfig& cfg, const Policy& policy,
                                        std::int64_t eval_slots,
                                        const std::vector<std::uint64_t>& seeds) {
    std::vector<RolloutAccumulator> per_seed;
    per_seed.reserve(seeds.size());
    for (std::uint64_t seed : seeds) per_seed.push_back(run_rollout(cfg, policy, eval_slots, seed));
    return aggregate_rollouts(std::move(per_seed));
}

inline AggregateMetrics run_fixed_policy(const EnvConfig& cfg, int speed_index,
                                         std::int64_t eval_slots,
                                         const std::vector<std::uint64_t>& seeds) {
    return evaluate_policy(cfg, fixed_speed_policy(speed_index), eval_slots, seeds);
}

}  // namespace uavrl
