#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "uavrl/rng.hpp"

namespace uavrl {

// Linear decay from start to end over decay_steps, constant afterwards.
struct EpsilonSchedule {
    double start = 1.0;
    double end = 0.01;
    std::int64_t decay_steps = 100000;

    double at(std::int64_t step) const {
        if (step >= decay_steps) return end;
        return start - (start - end) * static_cast<double>(step) / decay_steps;
    }

    void validate() const {
        if (!(start >= end && end >= 0.0))
            throw std::invalid_argument("epsilon schedule must be non-increasing and non-negative");
        if (decay_steps < 1) throw std::invalid_argument("decay_steps must be positive");
    }
};

// Epsilon-greedy over a row of per-action values restricted to the feasible
// set; greedy ties break toward the lowest action id.
inline int epsilon_greedy(const std::vector<double>& q_row, const std::vector<int>& feasible,
                          double eps, Rng& rng) {
    if (feasible.empty()) throw std::logic_error("epsilon_greedy needs a non-empty feasible set");
    if (eps > 0.0 && rng.uniform01() < eps)
        return feasible[rng.uniform_int(feasible.size())];
    int best = feasible.front();
    double best_q = q_row.at(static_cast<std::size_t>(best));
    for (std::size_t i = 1; i < feasible.size(); ++i) {
        const int a = feasible[i];
        const double q = q_row.at(static_cast<std::size_t>(a));
        if (q > best_q) {
            best = a;
            best_q = q;
        }
    }
    return best;
}

}  // namespace uavrl
