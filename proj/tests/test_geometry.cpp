#include "uavrl/geometry.hpp"

#include <gtest/gtest.h>

#include "uavrl/rng.hpp"

using namespace uavrl;

namespace {

TrajectorySpec square_loop() {
    return TrajectorySpec({{0, 0}, {60, 0}, {60, 60}, {0, 60}}, true, {0, 60, 120, 180},
                          {0.1, 0.25, 0.6, 0.15});
}

TEST(Trajectory, PositionAtWaypointAndInterior) {
    TrajectorySpec t = square_loop();
    EXPECT_DOUBLE_EQ(t.position_at(0).x, 0.0);
    EXPECT_DOUBLE_EQ(t.position_at(0).y, 0.0);

    const Vec2 p90 = t.position_at(90.0);
    EXPECT_DOUBLE_EQ(p90.x, 60.0);
    EXPECT_DOUBLE_EQ(p90.y, 30.0);

    const Vec2 p150 = t.position_at(150.0);
    EXPECT_DOUBLE_EQ(p150.x, 30.0);
    EXPECT_DOUBLE_EQ(p150.y, 60.0);
}

TEST(Trajectory, PositionRejectsOutOfRangeArc) {
    TrajectorySpec t = square_loop();
    EXPECT_THROW(t.position_at(-1.0), std::domain_error);
    EXPECT_THROW(t.position_at(240.0), std::domain_error);
}

TEST(Trajectory, ZoneLookup) {
    TrajectorySpec t = square_loop();
    EXPECT_EQ(t.zone_of(0.0), 0u);
    EXPECT_EQ(t.zone_of(60.0), 1u);
    EXPECT_EQ(t.zone_of(239.9), 3u);
}

TEST(Trajectory, PositionsStayInsideBoundingBox) {
    TrajectorySpec t = square_loop();
    Rng rng(3);
    for (int i = 0; i < 2000; ++i) {
        const Vec2 p = t.position_at(rng.uniform01() * t.total_length());
        EXPECT_GE(p.x, 0.0);
        EXPECT_LE(p.x, t.max_x());
        EXPECT_GE(p.y, 0.0);
        EXPECT_LE(p.y, t.max_y());
    }
}

TEST(Trajectory, OutAndBackPath) {
    TrajectorySpec t({{0, 0}, {160, 0}}, true, {0, 80, 240}, {0.1, 0.25, 0.1});
    EXPECT_DOUBLE_EQ(t.total_length(), 320.0);
    EXPECT_DOUBLE_EQ(t.position_at(100).x, 100.0);
    EXPECT_DOUBLE_EQ(t.position_at(200).x, 120.0);  // returning leg
    EXPECT_DOUBLE_EQ(t.max_y(), 0.0);
}

TEST(Trajectory, WrapArc) {
    TrajectorySpec t = square_loop();
    EXPECT_DOUBLE_EQ(t.wrap_arc(245.0), 5.0);
    EXPECT_DOUBLE_EQ(t.wrap_arc(240.0), 0.0);
    EXPECT_DOUBLE_EQ(t.wrap_arc(10.0), 10.0);
}

TEST(Trajectory, ValidationRejectsBadInput) {
    EXPECT_THROW(TrajectorySpec({{0, 0}, {0, 0}}, true, {0}, {0.5}), std::invalid_argument);
    EXPECT_THROW(TrajectorySpec({{0, 0}, {60, 0}}, true, {10}, {0.5}), std::invalid_argument);
    EXPECT_THROW(TrajectorySpec({{0, 0}, {60, 0}}, true, {0, 130}, {0.5, 0.5}),
                 std::invalid_argument);
    EXPECT_THROW(TrajectorySpec({{0, 0}, {60, 0}}, true, {0}, {1.5}), std::invalid_argument);
    EXPECT_THROW(TrajectorySpec({{0, 0}, {60, 0}}, true, {0, 40, 30}, {0.5, 0.5, 0.5}),
                 std::invalid_argument);
    EXPECT_THROW(TrajectorySpec({{-5, 0}, {60, 0}}, true, {0}, {0.5}), std::invalid_argument);
}

}  // namespace
