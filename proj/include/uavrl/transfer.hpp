#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <vector>

#include "uavrl/agent.hpp"
#include "uavrl/metrics.hpp"
#include "uavrl/replay.hpp"

namespace uavrl {

// Knowledge gathered in a source task: the source agent's parameters and its
// experience pool with origin distances for near-station selection.
struct SourceKnowledge {
    DuelingNetParams params;
    std::vector<AnnotatedExperience> pool;
};

enum class TransferVariant { ExperienceTransfer, PolicyTransfer, Hybrid };

struct TransferMode {
    TransferVariant variant = TransferVariant::PolicyTransfer;
    std::size_t count = 0;  // experiences to seed for ET / Hybrid

    static TransferMode experience(std::size_t count) {
        if (count < 1) throw std::invalid_argument("experience transfer needs count >= 1");
        return {TransferVariant::ExperienceTransfer, count};
    }
    static TransferMode policy() { return {TransferVariant::PolicyTransfer, 0}; }
    static TransferMode hybrid(std::size_t count) {
        if (count < 1) throw std::invalid_argument("hybrid transfer needs count >= 1");
        return {TransferVariant::Hybrid, count};
    }

    bool wants_experiences() const { return variant != TransferVariant::PolicyTransfer; }
    bool wants_policy() const { return variant != TransferVariant::ExperienceTransfer; }
};

// Picks up to `count` experiences whose origin lies within station_radius of
// the station, closest first (ties keep pool order). Fewer are returned when
// the pool has fewer qualifying entries.
inline std::vector<Experience> select_experiences(const std::vector<AnnotatedExperience>& pool,
                                                  double station_radius, std::size_t count) {
    if (count < 1) throw std::invalid_argument("selection count must be at least 1");
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < pool.size(); ++i)
        if (pool[i].origin_distance <= station_radius) idx.push_back(i);
    std::stable_sort(idx.begin(), idx.end(), [&pool](std::size_t a, std::size_t b) {
        return pool[a].origin_distance < pool[b].origin_distance;
    });
    if (idx.size() > count) idx.resize(count);
    std::vector<Experience> out;
    out.reserve(idx.size());
    for (std::size_t i : idx) out.push_back(pool[i].exp);
    return out;
}

// Seeds the learner before training step one: experience transfer preloads
// the replay buffer, policy transfer re-initializes both networks from the
// source parameters, hybrid does both.
inline void apply_transfer(Agent& agent, ReplayBuffer& buffer, const SourceKnowledge& knowledge,
                           const TransferMode& mode, double station_radius = 20.0) {
    if (mode.wants_policy()) {
        if (!agent.q_net.shape_congruent(knowledge.params))
            throw std::logic_error("source network architecture does not match the agent");
        agent.q_net = clone_params(knowledge.params);
        agent.target_net = clone_params(knowledge.params);
    }
    if (mode.wants_experiences()) {
        for (const Experience& e :
             select_experiences(knowledge.pool, station_radius, mode.count))
            buffer.push(e);
    }
}

// --- evaluation metrics ----------------------------------------------------

struct TlMetrics {
    double jump_start = 0.0;
    double asymptotic_gain = 0.0;
    std::optional<std::size_t> time_to_threshold;
};

namespace detail {

inline double mean_reward(const MetricTrace& trace, std::size_t begin, std::size_t end) {
    double sum = 0.0;
    for (std::size_t i = begin; i < end; ++i) sum += trace.rows[i].avg_reward;
    return sum / static_cast<double>(end - begin);
}

}  // namespace detail

// Early-window mean difference between the transfer run and the baseline.
inline double jump_start(const MetricTrace& tl_trace, const MetricTrace& base_trace,
                         std::size_t window) {
    if (window < 1 || tl_trace.size() < window || base_trace.size() < window)
        throw std::logic_error("jump-start window exceeds trace length");
    return detail::mean_reward(tl_trace, 0, window) - detail::mean_reward(base_trace, 0, window);
}

// Tail-window mean difference between the transfer run and the baseline.
inline double asymptotic_gain(const MetricTrace& tl_trace, const MetricTrace& base_trace,
                              std::size_t tail_window) {
    if (tail_window < 1 || tl_trace.size() < tail_window || base_trace.size() < tail_window)
        throw std::logic_error("tail window exceeds trace length");
    return detail::mean_reward(tl_trace, tl_trace.size() - tail_window, tl_trace.size()) -
           detail::mean_reward(base_trace, base_trace.size() - tail_window, base_trace.size());
}

// First checkpoint whose running average reward reaches theta.
inline std::optional<std::size_t> time_to_threshold(const MetricTrace& trace, double theta) {
    for (std::size_t i = 0; i < trace.size(); ++i)
        if (trace.rows[i].avg_reward >= theta) return i;
    return std::nullopt;
}

}  // namespace uavrl
