#pragma once

#include <stdexcept>
#include <string>

#include "uavrl/env.hpp"

namespace uavrl {

enum class ScenarioId { SourceMS, TargetMT1, TargetMT2 };

inline const char* to_string(ScenarioId id) {
    switch (id) {
        case ScenarioId::SourceMS: return "source_ms";
        case ScenarioId::TargetMT1: return "target_mt1";
        case ScenarioId::TargetMT2: return "target_mt2";
    }
    throw std::invalid_argument("unknown scenario id");
}

inline ScenarioId scenario_from_string(const std::string& name) {
    if (name == "source_ms") return ScenarioId::SourceMS;
    if (name == "target_mt1") return ScenarioId::TargetMT1;
    if (name == "target_mt2") return ScenarioId::TargetMT2;
    throw std::invalid_argument("unknown scenario '" + name + "'");
}

// source_ms: closed 60 m square loop, one zone per side, station at the
//            origin corner.
// target_mt1: out-and-back path on the x axis, two 80 m zones split at x=80
//             (arc layout [0,80) / [80,240) / [240,320) so the middle zone
//             covers the far half in both directions).
// target_mt2: square loop with the zone probabilities permuted.
inline EnvConfig build_scenario(ScenarioId id) {
    auto make = [](TrajectorySpec traj) {
        EnvConfig cfg{std::move(traj)};
        cfg.station = {0.0, 0.0};
        cfg.slot_duration = 1.0;
        cfg.speeds = {1.0, 3.0, 5.0};
        cfg.costs = {2, 3, 4};
        cfg.max_energy = 300;
        cfg.battery_swap_slots = 10;
        cfg.return_speed = 1.0;
        cfg.reward = RewardParams{};
        return cfg;
    };

    switch (id) {
        case ScenarioId::SourceMS: {
            TrajectorySpec traj({{0, 0}, {60, 0}, {60, 60}, {0, 60}}, true, {0, 60, 120, 180},
                                {0.1, 0.25, 0.6, 0.15});
            EnvConfig cfg = make(std::move(traj));
            cfg.validate();
            return cfg;
        }
        case ScenarioId::TargetMT1: {
            TrajectorySpec traj({{0, 0}, {160, 0}}, true, {0, 80, 240}, {0.1, 0.25, 0.1});
            EnvConfig cfg = make(std::move(traj));
            cfg.validate();
            return cfg;
        }
        case ScenarioId::TargetMT2: {
            TrajectorySpec traj({{0, 0}, {60, 0}, {60, 60}, {0, 60}}, true, {0, 60, 120, 180},
                                {0.6, 0.15, 0.1, 0.25});
            EnvConfig cfg = make(std::move(traj));
            cfg.validate();
            return cfg;
        }
    }
    throw std::invalid_argument("unknown scenario id");
}

}  // namespace uavrl
