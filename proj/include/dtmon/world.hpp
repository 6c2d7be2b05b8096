#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "dtmon/core.hpp"

namespace dtmon {

struct HumanSpec {
    Vec2 start;
    Vec2 goal;
    double speed = 1.0; // nominal walking speed [m/s]
};

// Virtual-physics gains of the simulated pedestrians.
struct HumanModel {
    double k_rep = 1.0;        // repulsion gain [m^2/s]
    double speed_cap = 1.3;    // max speed as a multiple of the nominal speed
};

struct Scenario {
    Vec2 robot_start{0.0, 0.0};
    Vec2 robot_goal{6.0, 0.0};
    ControlAction robot_action{0.6, 0.0}; // nominal speed and lane
    std::vector<HumanSpec> humans;
    double duration = 30.0; // [s]
    double tick = 0.1;      // [s]
    double delta_th = 1.5;  // human reaction threshold [m]
    std::uint64_t seed = 0;
    HumanModel human_model;
};

/// Per-tick world record; `humans[h][k]` is human h at tick k.
struct Trajectory {
    double tick = 0.1;
    std::vector<double> times;
    std::vector<AgentState> robot;
    std::vector<std::vector<AgentState>> humans;
    std::vector<std::vector<Vec2>> intended; // q* per human, same indexing

    std::size_t ticks() const { return times.size(); }
};

struct RunMetrics {
    double min_distance = std::numeric_limits<double>::infinity();
    std::vector<double> max_deviation; // per human [m]
    bool interfered = false;
    bool goal_reached = false;
    double goal_time = std::numeric_limits<double>::quiet_NaN();
    double mean_dt_ms = 0.0;
    double max_dt_ms = 0.0;
    std::size_t decisions = 0; // ticks with decision-tree work
    std::size_t in_range_at_closest = 0; // humans in sensing range at the closest approach
    std::size_t case1_ticks = 0;         // ticks with a threshold violation
    std::size_t case2_flags = 0;         // out-of-bounds observations raised
};

} // namespace dtmon
