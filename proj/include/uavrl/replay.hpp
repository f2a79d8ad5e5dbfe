#pragma once

#include <cstddef>
#include <deque>
#include <stdexcept>
#include <vector>

#include "uavrl/env.hpp"
#include "uavrl/rng.hpp"

namespace uavrl {

// Raised when a sample is requested before the buffer holds enough entries;
// training skips the update until the buffer is warm.
struct buffer_not_ready : std::runtime_error {
    buffer_not_ready() : std::runtime_error("replay buffer not warm enough to sample") {}
};

// Bounded FIFO of experiences; insertion beyond capacity evicts the oldest.
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
        if (capacity == 0) throw std::invalid_argument("replay capacity must be positive");
    }

    std::size_t capacity() const { return capacity_; }
    std::size_t size() const { return entries_.size(); }

    void push(const Experience& exp) {
        if (entries_.size() == capacity_) entries_.pop_front();
        entries_.push_back(exp);
    }

    // k entries drawn uniformly with replacement across the current contents.
    std::vector<Experience> sample(std::size_t k, Rng& rng) const {
        if (k == 0 || entries_.size() < k) throw buffer_not_ready();
        std::vector<Experience> batch;
        batch.reserve(k);
        for (std::size_t i = 0; i < k; ++i)
            batch.push_back(entries_[rng.uniform_int(entries_.size())]);
        return batch;
    }

    // Oldest-to-newest view, mainly for tests and export.
    const std::deque<Experience>& entries() const { return entries_; }

private:
    std::size_t capacity_;
    std::deque<Experience> entries_;
};

}  // namespace uavrl
