#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "uavrl/geometry.hpp"
#include "uavrl/rng.hpp"

namespace uavrl {

// Action ids: kIdleAction only while replenishing, kBatteryAction returns to
// the station, 1..A select a flying speed.
inline constexpr int kIdleAction = -1;
inline constexpr int kBatteryAction = 0;

// The receiver frame can deliver at most this many packets in one slot.
// While working, every whole metre swept during a slot is an independent
// collection opportunity with the zone's packet probability.
inline constexpr int kSlotPacketCap = 2;

// The dispatched battery-replacement reward saturates here: the exponential
// distance term otherwise reaches magnitudes (~1e7 across a 60 m loop) that
// drown every per-slot average and destabilize value fitting.
inline constexpr double kBatteryRewardFloor = -10.0;

struct RewardParams {
    double omega = 1.0;  // per-slot working reward
    double w1 = 1.0;     // packet weight
    double w2 = 0.3226;  // energy-cost weight
    double c = 5.0;      // battery-reward ceiling
    double w3 = 0.5;     // energy amplitude
    double w4 = 0.022;   // energy exponent
    double w5 = 0.5;     // distance amplitude
    double w6 = 0.2;     // distance exponent

    void validate() const {
        if (omega < 0.0 || w1 < 0.0 || w2 < 0.0 || w3 < 0.0 || w5 < 0.0)
            throw std::invalid_argument("reward amplitudes must be non-negative");
        if (!(w4 > 0.0) || !(w6 > 0.0))
            throw std::invalid_argument("reward exponents must be positive");
    }
};

struct EnvConfig {
    TrajectorySpec trajectory;
    Vec2 station{0.0, 0.0};
    double slot_duration = 1.0;         // seconds
    std::vector<double> speeds;         // m/s, ascending, index a-1 for action a
    std::vector<int> costs;             // energy units per slot, non-decreasing
    int max_energy = 300;               // E
    int battery_swap_slots = 10;        // t_b
    double return_speed = 1.0;          // v_r, m/s
    RewardParams reward;

    int speed_action_count() const { return static_cast<int>(speeds.size()); }
    int min_cost() const { return costs.front(); }

    void validate() const {
        if (speeds.empty() || speeds.size() != costs.size())
            throw std::invalid_argument("speeds and costs must be non-empty and equal-sized");
        for (std::size_t i = 0; i + 1 < speeds.size(); ++i)
            if (!(speeds[i] < speeds[i + 1]))
                throw std::invalid_argument("speeds must be strictly ascending");
        for (std::size_t i = 0; i + 1 < costs.size(); ++i)
            if (costs[i] > costs[i + 1])
                throw std::invalid_argument("costs must be non-decreasing");
        for (int m : costs)
            if (m < 1) throw std::invalid_argument("every cost must be at least 1");
        for (double v : speeds)
            if (!(v > 0.0)) throw std::invalid_argument("speeds must be positive");
        if (max_energy < costs.back())
            throw std::invalid_argument("max energy must cover the dearest speed");
        if (battery_swap_slots < 1)
            throw std::invalid_argument("battery swap must take at least one slot");
        if (!(return_speed > 0.0)) throw std::invalid_argument("return speed must be positive");
        if (!(slot_duration > 0.0)) throw std::invalid_argument("slot duration must be positive");
        reward.validate();
    }
};

enum class UavMode { Working, Replenishing };

// Working: the UAV sits at arc_pos with the given energy.
// Replenishing: the UAV is off-trajectory; remaining_idle slots are left
// before it resumes at resume_arc with a full battery.
struct UavState {
    UavMode mode = UavMode::Working;
    double arc_pos = 0.0;
    int energy = 0;
    int remaining_idle = 0;
    double resume_arc = 0.0;

    static UavState working(double arc, int energy) {
        UavState s;
        s.mode = UavMode::Working;
        s.arc_pos = arc;
        s.energy = energy;
        return s;
    }
    static UavState replenishing(int remaining, double resume_arc) {
        UavState s;
        s.mode = UavMode::Replenishing;
        s.remaining_idle = remaining;
        s.resume_arc = resume_arc;
        return s;
    }
};

enum class StepEvent { Normal, VoluntaryReturn, ForcedReturn, Idle };

struct StepOutcome {
    UavState next;
    double reward = 0.0;
    int packets = 0;        // 0..kSlotPacketCap
    int energy_spent = 0;   // flying energy drawn from the main battery
    int elapsed_slots = 1;  // 1 for Normal/Idle, t_e for voluntary, 1 + t_e for forced
    StepEvent event = StepEvent::Normal;
};

// One learner-facing transition; replenishments are compressed into a single
// transition carrying the slot count they consumed.
struct Experience {
    std::array<double, 3> state_features{};  // (x/X, y/Y, e/E)
    int action = 0;                           // 0 = battery, 1..A = speeds
    double reward = 0.0;
    std::array<double, 3> next_features{};
    int elapsed_slots = 1;
};

// Experience annotated with where it originated, for later transfer selection.
struct AnnotatedExperience {
    Experience exp;
    double origin_distance = 0.0;  // distance to the station at the origin state
};

inline double speed_reward(const RewardParams& rp, int packets, int cost) {
    return rp.omega + rp.w1 * packets - rp.w2 * cost;
}

inline double battery_reward(const RewardParams& rp, double energy, double dist) {
    return rp.c - rp.w3 * std::exp(rp.w4 * energy) - rp.w5 * std::exp(rp.w6 * dist);
}

// Reward actually granted for a voluntary return.
inline double dispatched_battery_reward(const RewardParams& rp, double energy, double dist) {
    return std::max(battery_reward(rp, energy, dist), kBatteryRewardFloor);
}

inline double distance_to_station(const EnvConfig& cfg, double arc) {
    return planar_distance(cfg.trajectory.position_at(arc), cfg.station);
}

// t_e = 2 t_f + t_b with t_f the one-way flight time at the return speed.
inline int replenish_duration(const EnvConfig& cfg, double dist) {
    if (dist < 0.0) throw std::domain_error("distance must be non-negative");
    const int t_f = static_cast<int>(std::ceil(dist / (cfg.return_speed * cfg.slot_duration)));
    return 2 * t_f + cfg.battery_swap_slots;
}

// Energy below which a return at the station still earns a positive reward
// (the break-even point of the battery reward at zero distance). Learners
// only consider the battery action at or below it: above, the return is never
// worthwhile, and keeping it out of the explored set is what lets exploration
// ever drain the battery into the low-energy region.
inline int battery_unlock_energy(const EnvConfig& cfg) {
    const RewardParams& rp = cfg.reward;
    if (rp.w3 <= 0.0) return cfg.max_energy;
    const double headroom = (rp.c - rp.w5) / rp.w3;
    if (headroom <= 1.0) return 0;
    const double e_star = std::log(headroom) / rp.w4;
    return static_cast<int>(std::min<double>(cfg.max_energy, std::floor(e_star)));
}

inline std::vector<int> feasible_actions(const EnvConfig& cfg, const UavState& s) {
    if (s.mode == UavMode::Replenishing) return {kIdleAction};
    std::vector<int> acts;
    acts.push_back(kBatteryAction);
    for (int a = 1; a <= cfg.speed_action_count(); ++a)
        if (cfg.costs[static_cast<std::size_t>(a - 1)] <= s.energy) acts.push_back(a);
    return acts;
}

inline int sample_packet(double p, Rng& rng) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::domain_error("probability outside [0, 1]");
    return rng.uniform01() < p ? 1 : 0;
}

// Packets collected over one slot at the given speed: one opportunity per
// whole metre swept, capped by the per-slot frame capacity.
inline int sample_slot_packets(double p, double metres, Rng& rng) {
    const int opportunities = std::max(1, static_cast<int>(std::llround(metres)));
    int collected = 0;
    for (int i = 0; i < opportunities; ++i) collected += sample_packet(p, rng);
    return std::min(collected, kSlotPacketCap);
}

inline std::array<double, 3> state_features(const EnvConfig& cfg, const UavState& s) {
    const Vec2 pos = cfg.trajectory.position_at(
        s.mode == UavMode::Working ? s.arc_pos : s.resume_arc);
    const double X = cfg.trajectory.max_x();
    const double Y = cfg.trajectory.max_y();
    return {X > 0.0 ? pos.x / X : 0.0, Y > 0.0 ? pos.y / Y : 0.0,
            static_cast<double>(s.energy) / cfg.max_energy};
}

namespace detail {

inline void check_working_state(const EnvConfig& cfg, const UavState& s) {
    if (!(s.arc_pos >= 0.0) || s.arc_pos >= cfg.trajectory.total_length())
        throw std::domain_error("state arc position off the trajectory");
    if (s.energy < 0 || s.energy > cfg.max_energy)
        throw std::domain_error("state energy outside [0, E]");
}

// Burns through a replenishment one idle slot at a time, so every slot shows
// up in the outcome's slot count.
inline UavState run_idle_slots(UavState s, int* slots) {
    while (s.mode == UavMode::Replenishing) {
        ++*slots;
        --s.remaining_idle;
        if (s.remaining_idle == 0) s = UavState::working(s.resume_arc, 0);
    }
    return s;
}

}  // namespace detail

// Advances the environment by one decision. Speed actions take one slot;
// battery returns (and forced returns after depletion) consume the whole
// replenishment before the next decision state is reported, with the idle
// slots counted in elapsed_slots.
inline StepOutcome step(const EnvConfig& cfg, const UavState& s, int action, Rng& rng) {
    StepOutcome out;

    if (s.mode == UavMode::Replenishing) {
        if (action != kIdleAction)
            throw std::logic_error("only the idle action is feasible while replenishing");
        if (s.remaining_idle <= 0) throw std::domain_error("replenishing state with no slots left");
        out.event = StepEvent::Idle;
        out.elapsed_slots = 1;
        out.next = (s.remaining_idle == 1)
                       ? UavState::working(s.resume_arc, cfg.max_energy)
                       : UavState::replenishing(s.remaining_idle - 1, s.resume_arc);
        return out;
    }

    detail::check_working_state(cfg, s);

    if (action == kBatteryAction) {
        const double dist = distance_to_station(cfg, s.arc_pos);
        const int t_e = replenish_duration(cfg, dist);
        out.event = StepEvent::VoluntaryReturn;
        out.reward = dispatched_battery_reward(cfg.reward, s.energy, dist);
        int slots = 1;  // the decision slot opens the replenishment
        UavState resumed = UavState::working(s.arc_pos, cfg.max_energy);
        if (t_e > 1) {
            resumed = detail::run_idle_slots(UavState::replenishing(t_e - 1, s.arc_pos), &slots);
            resumed.energy = cfg.max_energy;
        }
        out.next = resumed;
        out.elapsed_slots = slots;
        return out;
    }

    if (action < 1 || action > cfg.speed_action_count())
        throw std::logic_error("unknown action id");
    const int cost = cfg.costs[static_cast<std::size_t>(action - 1)];
    if (cost > s.energy) throw std::logic_error("speed action exceeds remaining energy");

    const double p = cfg.trajectory.zone_probs()[cfg.trajectory.zone_of(s.arc_pos)];
    const double metres = cfg.speeds[static_cast<std::size_t>(action - 1)] * cfg.slot_duration;
    out.packets = sample_slot_packets(p, metres, rng);
    out.energy_spent = cost;
    out.reward = speed_reward(cfg.reward, out.packets, cost);

    const double new_arc = cfg.trajectory.wrap_arc(s.arc_pos + metres);
    const int new_energy = s.energy - cost;

    if (new_energy < cfg.min_cost()) {
        // Depleted: replenish from the new position; no battery reward.
        const int t_e = replenish_duration(cfg, distance_to_station(cfg, new_arc));
        out.event = StepEvent::ForcedReturn;
        int slots = 1;  // the flying slot that depleted the battery
        UavState resumed = detail::run_idle_slots(UavState::replenishing(t_e, new_arc), &slots);
        resumed.energy = cfg.max_energy;
        out.next = resumed;
        out.elapsed_slots = slots;
        return out;
    }

    out.event = StepEvent::Normal;
    out.elapsed_slots = 1;
    out.next = UavState::working(new_arc, new_energy);
    return out;
}

inline Experience make_experience(const EnvConfig& cfg, const UavState& before, int action,
                                  const StepOutcome& out) {
    Experience e;
    e.state_features = state_features(cfg, before);
    e.action = action;
    e.reward = out.reward;
    e.next_features = state_features(cfg, out.next);
    e.elapsed_slots = out.elapsed_slots;
    return e;
}

}  // namespace uavrl
