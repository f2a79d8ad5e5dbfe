#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

namespace uavrl {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

inline double planar_distance(const Vec2& a, const Vec2& b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

// Piecewise-linear flight path partitioned into zones by arc length.
// Zone n covers arc range [zone_breaks[n], zone_breaks[n+1]) (the last zone
// extends to the total length) and carries its own packet probability.
class TrajectorySpec {
public:
    TrajectorySpec(std::vector<Vec2> waypoints, bool closed,
                   std::vector<double> zone_breaks, std::vector<double> zone_probs)
        : waypoints_(std::move(waypoints)),
          closed_(closed),
          zone_breaks_(std::move(zone_breaks)),
          zone_probs_(std::move(zone_probs)) {
        validate();
    }

    const std::vector<Vec2>& waypoints() const { return waypoints_; }
    bool closed() const { return closed_; }
    const std::vector<double>& zone_breaks() const { return zone_breaks_; }
    const std::vector<double>& zone_probs() const { return zone_probs_; }

    double total_length() const { return total_length_; }
    std::size_t zone_count() const { return zone_probs_.size(); }

    // Bounding-box maxima; the origin corner of the box is (0, 0).
    double max_x() const { return max_x_; }
    double max_y() const { return max_y_; }

    // Maps trajectory progress to the planar position, interpolating along
    // the current segment.
    Vec2 position_at(double arc) const {
        check_arc(arc);
        auto it = std::upper_bound(cum_length_.begin(), cum_length_.end(), arc);
        std::size_t seg = static_cast<std::size_t>(it - cum_length_.begin()) - 1;
        if (seg >= segment_count()) seg = segment_count() - 1;
        const Vec2& a = waypoints_[seg];
        const Vec2& b = waypoints_[(seg + 1) % waypoints_.size()];
        const double seg_len = cum_length_[seg + 1] - cum_length_[seg];
        const double t = (arc - cum_length_[seg]) / seg_len;
        return {a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)};
    }

    // Zone containing the given arc position.
    std::size_t zone_of(double arc) const {
        check_arc(arc);
        auto it = std::upper_bound(zone_breaks_.begin(), zone_breaks_.end(), arc);
        return static_cast<std::size_t>(it - zone_breaks_.begin()) - 1;
    }

    // Advances an arc position, wrapping around for closed paths.
    double wrap_arc(double arc) const {
        double w = std::fmod(arc, total_length_);
        if (w < 0.0) w += total_length_;
        return w;
    }

private:
    std::size_t segment_count() const {
        return closed_ ? waypoints_.size() : waypoints_.size() - 1;
    }

    void check_arc(double arc) const {
        if (!(arc >= 0.0) || arc >= total_length_)
            throw std::domain_error("arc position outside [0, total_length)");
    }

    void validate() {
        if (waypoints_.size() < 2)
            throw std::invalid_argument("trajectory needs at least two waypoints");
        cum_length_.assign(1, 0.0);
        for (std::size_t i = 0; i < segment_count(); ++i) {
            const Vec2& a = waypoints_[i];
            const Vec2& b = waypoints_[(i + 1) % waypoints_.size()];
            const double len = planar_distance(a, b);
            if (len <= 0.0)
                throw std::invalid_argument("consecutive waypoints must be distinct");
            cum_length_.push_back(cum_length_.back() + len);
        }
        total_length_ = cum_length_.back();
        if (total_length_ <= 0.0) throw std::invalid_argument("trajectory has zero length");

        max_x_ = 0.0;
        max_y_ = 0.0;
        for (const Vec2& p : waypoints_) {
            if (p.x < 0.0 || p.y < 0.0)
                throw std::invalid_argument("waypoint coordinates must be non-negative");
            max_x_ = std::max(max_x_, p.x);
            max_y_ = std::max(max_y_, p.y);
        }

        if (zone_breaks_.empty() || zone_breaks_.front() != 0.0)
            throw std::invalid_argument("zone_breaks must start at 0");
        for (std::size_t i = 0; i + 1 < zone_breaks_.size(); ++i)
            if (!(zone_breaks_[i] < zone_breaks_[i + 1]))
                throw std::invalid_argument("zone_breaks must be strictly increasing");
        if (zone_breaks_.back() >= total_length_)
            throw std::invalid_argument("zone_breaks must lie below the total length");
        if (zone_breaks_.size() != zone_probs_.size())
            throw std::invalid_argument("zone_breaks and zone_probs must have equal size");
        for (double p : zone_probs_)
            if (!(p >= 0.0 && p <= 1.0))
                throw std::invalid_argument("zone probabilities must be in [0, 1]");
    }

    std::vector<Vec2> waypoints_;
    bool closed_ = true;
    std::vector<double> zone_breaks_;
    std::vector<double> zone_probs_;
    std::vector<double> cum_length_;
    double total_length_ = 0.0;
    double max_x_ = 0.0;
    double max_y_ = 0.0;
};

}  // namespace uavrl
