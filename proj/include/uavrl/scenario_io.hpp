#pragma once

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "uavrl/env.hpp"

namespace uavrl {

// Scenario configuration files are JSON with a fixed schema:
//   trajectory.{waypoints, closed, zone_breaks, zone_probs}, station,
//   slot_duration, speeds, costs, E, t_b, v_r,
//   reward.{omega, w1, w2, c, w3, w4, w5, w6}
// Unknown keys are rejected at every level.

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& j, const std::set<std::string>& allowed,
                                const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key()))
            throw std::invalid_argument("unknown key '" + it.key() + "' in " + where);
}

inline Vec2 parse_point(const nlohmann::json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 2)
        throw std::invalid_argument(where + " must be a [x, y] pair");
    return {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace detail

inline EnvConfig env_config_from_json(const nlohmann::json& j) {
    detail::reject_unknown_keys(j,
                                {"trajectory", "station", "slot_duration", "speeds", "costs", "E",
                                 "t_b", "v_r", "reward"},
                                "scenario config");
    const auto& jt = j.at("trajectory");
    detail::reject_unknown_keys(jt, {"waypoints", "closed", "zone_breaks", "zone_probs"},
                                "trajectory");
    std::vector<Vec2> waypoints;
    for (const auto& p : jt.at("waypoints")) waypoints.push_back(detail::parse_point(p, "waypoint"));
    TrajectorySpec traj(std::move(waypoints), jt.at("closed").get<bool>(),
                        jt.at("zone_breaks").get<std::vector<double>>(),
                        jt.at("zone_probs").get<std::vector<double>>());

    const auto& jr = j.at("reward");
    detail::reject_unknown_keys(jr, {"omega", "w1", "w2", "c", "w3", "w4", "w5", "w6"}, "reward");
    RewardParams rp;
    rp.omega = jr.at("omega").get<double>();
    rp.w1 = jr.at("w1").get<double>();
    rp.w2 = jr.at("w2").get<double>();
    rp.c = jr.at("c").get<double>();
    rp.w3 = jr.at("w3").get<double>();
    rp.w4 = jr.at("w4").get<double>();
    rp.w5 = jr.at("w5").get<double>();
    rp.w6 = jr.at("w6").get<double>();

    EnvConfig cfg{std::move(traj)};
    cfg.station = detail::parse_point(j.at("station"), "station");
    cfg.slot_duration = j.at("slot_duration").get<double>();
    cfg.speeds = j.at("speeds").get<std::vector<double>>();
    cfg.costs = j.at("costs").get<std::vector<int>>();
    cfg.max_energy = j.at("E").get<int>();
    cfg.battery_swap_slots = j.at("t_b").get<int>();
    cfg.return_speed = j.at("v_r").get<double>();
    cfg.reward = rp;
    cfg.validate();
    return cfg;
}

inline nlohmann::json env_config_to_json(const EnvConfig& cfg) {
    nlohmann::json j;
    nlohmann::json jw = nlohmann::json::array();
    for (const Vec2& p : cfg.trajectory.waypoints()) jw.push_back({p.x, p.y});
    j["trajectory"] = {{"waypoints", jw},
                       {"closed", cfg.trajectory.closed()},
                       {"zone_breaks", cfg.trajectory.zone_breaks()},
                       {"zone_probs", cfg.trajectory.zone_probs()}};
    j["station"] = {cfg.station.x, cfg.station.y};
    j["slot_duration"] = cfg.slot_duration;
    j["speeds"] = cfg.speeds;
    j["costs"] = cfg.costs;
    j["E"] = cfg.max_energy;
    j["t_b"] = cfg.battery_swap_slots;
    j["v_r"] = cfg.return_speed;
    j["reward"] = {{"omega", cfg.reward.omega}, {"w1", cfg.reward.w1}, {"w2", cfg.reward.w2},
                   {"c", cfg.reward.c},         {"w3", cfg.reward.w3}, {"w4", cfg.reward.w4},
                   {"w5", cfg.reward.w5},       {"w6", cfg.reward.w6}};
    return j;
}

inline EnvConfig load_env_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open scenario config: " + path);
    nlohmann::json j;
    in >> j;
    return env_config_from_json(j);
}

// Applies a partial override file on top of a base configuration. Any subset
// of the schema keys may appear; everything else keeps the base value.
inline EnvConfig apply_config_overrides(const EnvConfig& base, const nlohmann::json& overrides) {
    nlohmann::json j = env_config_to_json(base);
    detail::reject_unknown_keys(overrides,
                                {"trajectory", "station", "slot_duration", "speeds", "costs", "E",
                                 "t_b", "v_r", "reward"},
                                "scenario overrides");
    for (auto it = overrides.begin(); it != overrides.end(); ++it) {
        if (it.key() == "trajectory" || it.key() == "reward") {
            for (auto inner = it.value().begin(); inner != it.value().end(); ++inner)
                j[it.key()][inner.key()] = inner.value();
        } else {
            j[it.key()] = it.value();
        }
    }
    return env_config_from_json(j);
}

inline EnvConfig apply_config_overrides_file(const EnvConfig& base, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open override config: " + path);
    nlohmann::json j;
    in >> j;
    return apply_config_overrides(base, j);
}

}  // namespace uavrl
