#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "uavrl/env.hpp"
#include "uavrl/explore.hpp"
#include "uavrl/metrics.hpp"
#include "uavrl/rng.hpp"

namespace uavrl {

// Discretized working state: rounded planar coordinates plus energy level.
struct GridState {
    int x = 0;
    int y = 0;
    int e = 0;

    bool operator==(const GridState&) const = default;
};

inline GridState discretize(const EnvConfig& cfg, const UavState& s) {
    const Vec2 pos = cfg.trajectory.position_at(s.arc_pos);
    return {static_cast<int>(std::lround(pos.x)), static_cast<int>(std::lround(pos.y)), s.energy};
}

// Sparse Q-table over (x, y, e, a); unseen entries read as zero.
class QTable {
public:
    double get(const GridState& s, int action) const {
        auto it = values_.find(key(s, action));
        return it == values_.end() ? 0.0 : it->second;
    }

    void set(const GridState& s, int action, double v) { values_[key(s, action)] = v; }

    std::size_t size() const { return values_.size(); }

    // Entries in lexicographic (x, y, e, a) order.
    std::vector<std::pair<std::array<int, 4>, double>> sorted_entries() const {
        std::vector<std::pair<std::array<int, 4>, double>> out;
        out.reserve(values_.size());
        for (const auto& [k, v] : values_) out.push_back({unkey(k), v});
        std::sort(out.begin(), out.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        return out;
    }

    void insert_raw(int x, int y, int e, int a, double v) { values_[pack(x, y, e, a)] = v; }

private:
    // 16 bits per coordinate, energies and actions included; offsets keep the
    // packed fields non-negative.
    static std::uint64_t pack(int x, int y, int e, int a) {
        auto u = [](int v) { return static_cast<std::uint64_t>(v + 0x4000) & 0xFFFF; };
        return (u(x) << 48) | (u(y) << 32) | (u(e) << 16) | u(a);
    }
    static std::uint64_t key(const GridState& s, int a) { return pack(s.x, s.y, s.e, a); }
    static std::array<int, 4> unkey(std::uint64_t k) {
        auto f = [](std::uint64_t v) { return static_cast<int>(v & 0xFFFF) - 0x4000; };
        return {f(k >> 48), f(k >> 32), f(k >> 16), f(k)};
    }

    std::unordered_map<std::uint64_t, double> values_;
};

struct TabularParams {
    double beta = 0.1;    // learning rate
    double zeta = 0.9;    // discount
    EpsilonSchedule epsilon;
    std::int64_t total_steps = 150000;
    std::int64_t checkpoint_every = 500;

    void validate() const {
        if (!(beta >= 0.0 && beta < 1.0)) throw std::invalid_argument("beta must be in [0, 1)");
        if (!(zeta >= 0.0 && zeta <= 1.0)) throw std::invalid_argument("zeta must be in [0, 1]");
        epsilon.validate();
    }
};

// One temporal-difference update with elapsed-slot discounting:
//   Q(s,a) += beta * (r + zeta^elapsed * max_{a' feasible} Q(s',a') - Q(s,a)).
// Returns the updated value.
inline double q_update(QTable& table, const GridState& s, int action, double reward,
                       const GridState& next, const std::vector<int>& feasible_next,
                       int elapsed_slots, double beta, double zeta) {
    if (elapsed_slots < 1) throw std::logic_error("elapsed_slots must be at least 1");
    double best_next = 0.0;
    bool first = true;
    for (int a : feasible_next) {
        const double q = table.get(next, a);
        if (first || q > best_next) {
            best_next = q;
            first = false;
        }
    }
    const double target = reward + std::pow(zeta, elapsed_slots) * best_next;
    const double updated = table.get(s, action) + beta * (target - table.get(s, action));
    table.set(s, action, updated);
    return updated;
}

// Action set the tabular learner explores and bootstraps over: affordable
// speeds, plus the battery action once the energy is low enough for a return
// to pay off.
inline std::vector<int> tabular_actions(const EnvConfig& cfg, int energy) {
    std::vector<int> acts;
    if (energy <= battery_unlock_energy(cfg)) acts.push_back(kBatteryAction);
    for (int a = 1; a <= cfg.speed_action_count(); ++a)
        if (cfg.costs[static_cast<std::size_t>(a - 1)] <= energy) acts.push_back(a);
    return acts;
}

struct TabularRun {
    QTable table;
    MetricTrace trace;
    std::vector<AnnotatedExperience> pool;
};

// Q-learning over the discretized grid: epsilon-greedy interaction with
// per-step updates and a decaying exploration rate.
inline TabularRun train_tabular(const EnvConfig& cfg, const TabularParams& params,
                                std::uint64_t seed, bool record_pool = true) {
    cfg.validate();
    params.validate();
    Rng rng(seed);
    TabularRun run;
    RolloutAccumulator acc;
    UavState state = UavState::working(0.0, cfg.max_energy);

    for (std::int64_t t = 0; t < params.total_steps; ++t) {
        const std::vector<int> feasible = tabular_actions(cfg, state.energy);
        const GridState gs = discretize(cfg, state);
        std::vector<double> q_row(static_cast<std::size_t>(cfg.speed_action_count()) + 1, 0.0);
        for (int a : feasible) q_row[static_cast<std::size_t>(a)] = run.table.get(gs, a);

        const int action = epsilon_greedy(q_row, feasible, params.epsilon.at(t), rng);
        const double origin_distance = distance_to_station(cfg, state.arc_pos);
        const StepOutcome out = step(cfg, state, action, rng);

        const GridState gn = discretize(cfg, out.next);
        q_update(run.table, gs, action, out.reward, gn, tabular_actions(cfg, out.next.energy),
                 out.elapsed_slots, params.beta, params.zeta);

        if (record_pool)
            run.pool.push_back({make_experience(cfg, state, action, out), origin_distance});

        acc.add(out.reward, out.packets, out.energy_spent, out.elapsed_slots);
        if ((t + 1) % params.checkpoint_every == 0) run.trace.checkpoint(t + 1, acc);
        state = out.next;
    }
    return run;
}

// --- checkpoint format -------------------------------------------------
//
// QTAB v1
// <x> <y> <e> <a> <value>        one line per entry, lexicographic key order

inline void save_qtable(const QTable& table, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
    out << "QTAB v1\n";
    for (const auto& [k, v] : table.sorted_entries())
        out << k[0] << ' ' << k[1] << ' ' << k[2] << ' ' << k[3] << ' ' << format_double(v, 17)
            << '\n';
    if (!out) throw std::runtime_error("failed writing checkpoint: " + path);
}

inline QTable load_qtable(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
    std::string header;
    std::getline(in, header);
    if (header != "QTAB v1") throw std::runtime_error("bad checkpoint header in " + path);
    QTable table;
    int x, y, e, a;
    double v;
    while (in >> x >> y >> e >> a >> v) table.insert_raw(x, y, e, a, v);
    return table;
}

}  // namespace uavrl
