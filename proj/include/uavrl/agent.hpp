#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "uavrl/env.hpp"
#include "uavrl/explore.hpp"
#include "uavrl/net.hpp"
#include "uavrl/replay.hpp"

namespace uavrl {

// Online Q-network plus its periodically synchronized target copy.
struct Agent {
    DuelingNetParams q_net;
    DuelingNetParams target_net;
    std::int64_t steps_done = 0;
};

struct D3qlConfig {
    double zeta = 0.9;
    double alpha = 1e-4;
    int batch_size = 32;
    std::size_t buffer_capacity = 100000;
    std::int64_t sync_interval = 10000;  // target refresh period I
    EpsilonSchedule epsilon;
    std::int64_t total_steps = 150000;
    bool action_mask_by_energy = true;  // mask energy-infeasible speeds in targets
    std::int64_t checkpoint_every = 500;
    NetConfig net;

    void validate() const {
        if (!(zeta >= 0.0 && zeta <= 1.0)) throw std::invalid_argument("zeta must be in [0, 1]");
        if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
        if (batch_size < 1 || static_cast<std::size_t>(batch_size) > buffer_capacity)
            throw std::invalid_argument("batch size must fit the buffer");
        if (sync_interval < 1) throw std::invalid_argument("sync interval must be positive");
        if (checkpoint_every < 1) throw std::invalid_argument("checkpoint cadence must be positive");
        epsilon.validate();
        net.validate();
    }
};

// Actions the learner may pick at a working state. Energy-infeasible speeds
// are always excluded (the environment rejects them); the battery action is
// offered only below the break-even energy, and removed entirely when the
// no-return variant is trained or evaluated.
inline std::vector<int> learner_actions(const EnvConfig& cfg, int energy, bool mask_battery) {
    std::vector<int> acts;
    if (!mask_battery && energy <= battery_unlock_energy(cfg)) acts.push_back(kBatteryAction);
    for (int a = 1; a <= cfg.speed_action_count(); ++a)
        if (cfg.costs[static_cast<std::size_t>(a - 1)] <= energy) acts.push_back(a);
    return acts;
}

// Action set used when evaluating targets at the next state; with the energy
// mask disabled every speed is considered regardless of affordability.
inline std::vector<int> target_actions(const EnvConfig& cfg, int energy, bool mask_battery,
                                       bool mask_by_energy) {
    if (mask_by_energy) return learner_actions(cfg, energy, mask_battery);
    std::vector<int> acts;
    if (!mask_battery && energy <= battery_unlock_energy(cfg)) acts.push_back(kBatteryAction);
    for (int a = 1; a <= cfg.speed_action_count(); ++a) acts.push_back(a);
    return acts;
}

inline int energy_from_features(const EnvConfig& cfg, const std::array<double, 3>& f) {
    return static_cast<int>(std::llround(f[2] * cfg.max_energy));
}

// Greedy action under the online network, restricted to the feasible set;
// ties break toward the lowest action id.
inline int greedy_action(const Agent& agent, const std::array<double, 3>& features,
                         const std::vector<int>& feasible) {
    if (feasible.empty()) throw std::logic_error("greedy_action needs a non-empty feasible set");
    const ForwardResult out = forward(agent.q_net, features);
    int best = feasible.front();
    double best_q = out.q.at(static_cast<std::size_t>(best));
    for (std::size_t i = 1; i < feasible.size(); ++i) {
        const int a = feasible[i];
        const double q = out.q.at(static_cast<std::size_t>(a));
        if (q > best_q) {
            best = a;
            best_q = q;
        }
    }
    return best;
}

// Double estimator target: the online network selects the next action, the
// target network evaluates it. Replenishment compression shows up as the
// elapsed-slot exponent on the discount.
inline double double_q_target(const Agent& agent, const Experience& exp, double zeta,
                              const std::vector<int>& feasible_next) {
    if (feasible_next.empty()) throw std::logic_error("target needs a non-empty action set");
    const ForwardResult online = forward(agent.q_net, exp.next_features);
    int best = feasible_next.front();
    double best_q = online.q.at(static_cast<std::size_t>(best));
    for (std::size_t i = 1; i < feasible_next.size(); ++i) {
        const int a = feasible_next[i];
        const double q = online.q.at(static_cast<std::size_t>(a));
        if (q > best_q) {
            best = a;
            best_q = q;
        }
    }
    const ForwardResult target = forward(agent.target_net, exp.next_features);
    return exp.reward + std::pow(zeta, exp.elapsed_slots) *
                            target.q.at(static_cast<std::size_t>(best));
}

// --- agent checkpoint ----------------------------------------------------
//
// Network checkpoint followed by one footer line: "steps <n> epsilon <v>".

inline void save_agent(const Agent& agent, double epsilon, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
    save_net(agent.q_net, out);
    out << "steps " << agent.steps_done << " epsilon " << format_double(epsilon, 17) << '\n';
    if (!out) throw std::runtime_error("failed writing checkpoint: " + path);
}

struct LoadedAgent {
    Agent agent;
    double epsilon = 0.0;
};

inline LoadedAgent load_agent(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
    LoadedAgent la;
    la.agent.q_net = load_net(in);
    std::string tag;
    if (!(in >> tag) || tag != "steps" || !(in >> la.agent.steps_done))
        throw std::runtime_error("missing footer in agent checkpoint " + path);
    if (!(in >> tag) || tag != "epsilon" || !(in >> la.epsilon))
        throw std::runtime_error("missing epsilon in agent checkpoint " + path);
    la.agent.target_net = clone_params(la.agent.q_net);
    return la;
}

// --- experience files ------------------------------------------------------
//
// EXP v1: one experience per line, "x y e a r x' y' e' elapsed" with the
// normalized features rendered at 17 significant digits.
// EXP-D v1: same with a trailing origin-distance column.

namespace detail {

inline void write_experience_fields(std::ostream& out, const Experience& e) {
    for (double f : e.state_features) out << format_double(f, 17) << ' ';
    out << e.action << ' ' << format_double(e.reward, 17) << ' ';
    for (double f : e.next_features) out << format_double(f, 17) << ' ';
    out << e.elapsed_slots;
}

inline bool read_experience_fields(std::istream& in, Experience& e) {
    return static_cast<bool>(in >> e.state_features[0] >> e.state_features[1] >>
                             e.state_features[2] >> e.action >> e.reward >> e.next_features[0] >>
                             e.next_features[1] >> e.next_features[2] >> e.elapsed_slots);
}

}  // namespace detail

inline void save_experiences(const std::vector<Experience>& pool, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write experience file: " + path);
    out << "EXP v1\n";
    for (const Experience& e : pool) {
        detail::write_experience_fields(out, e);
        out << '\n';
    }
    if (!out) throw std::runtime_error("failed writing experience file: " + path);
}

inline std::vector<Experience> load_experiences(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open experience file: " + path);
    std::string header;
    std::getline(in, header);
    if (header != "EXP v1") throw std::runtime_error("bad experience header in " + path);
    std::vector<Experience> pool;
    Experience e;
    while (detail::read_experience_fields(in, e)) pool.push_back(e);
    return pool;
}

inline void save_annotated_experiences(const std::vector<AnnotatedExperience>& pool,
                                       const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write experience file: " + path);
    out << "EXP-D v1\n";
    for (const AnnotatedExperience& ae : pool) {
        detail::write_experience_fields(out, ae.exp);
        out << ' ' << format_double(ae.origin_distance, 17) << '\n';
    }
    if (!out) throw std::runtime_error("failed writing experience file: " + path);
}

inline std::vector<AnnotatedExperience> load_annotated_experiences(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open experience file: " + path);
    std::string header;
    std::getline(in, header);
    if (header != "EXP-D v1") throw std::runtime_error("bad experience header in " + path);
    std::vector<AnnotatedExperience> pool;
    AnnotatedExperience ae;
    while (detail::read_experience_fields(in, ae.exp) && (in >> ae.origin_distance))
        pool.push_back(ae);
    return pool;
}

}  // namespace uavrl
