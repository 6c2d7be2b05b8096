#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "dtmon/core.hpp"
#include "dtmon/planner.hpp"
#include "dtmon/validation.hpp"
#include "dtmon/world.hpp"

namespace dtmon {

/// One explicit-Euler step of a pedestrian: constant-speed attraction to the
/// goal plus k_rep (1/d - 1/delta_th) repulsion from the robot when it is
/// closer than delta_th, with the speed capped at speed_cap x nominal.
AgentState human_step(const AgentState& h, Vec2 goal, double nominal_speed, const AgentState& robot,
                      double delta_th, double dt, const HumanModel& model = {});

/// Point of the constant-speed straight start->goal path at time t.
Vec2 intended_position(const HumanSpec& h, double t);

enum class Policy { NominalNonReactive, DtMonitor };

struct RunOptions {
    double deviation_tol = 0.25; // interference tolerance on ||q - q*|| [m]
    bool stop_at_goal = true;    // end the run once robot x passes the goal x
};

struct RunResult {
    Trajectory trajectory;
    RunMetrics metrics;
    std::vector<TickReport> reports; // one per decision tick (DtMonitor only)
    std::vector<Case2Observation> case2;
    std::vector<ControlAction> corrections; // actions adopted, in order, deduplicated
};

/// Ticks the world. The monitor config supplies the sensing range, lanes and
/// velocity grid; the scenario supplies tick, delta_th and the robot's goal
/// lane. DtMonitor requires a non-empty `global`.
RunResult run_scenario(const Scenario& s, Policy policy, const Dataset& global,
                       const MonitorConfig& cfg = {}, const RunOptions& opts = {});

RunMetrics compute_metrics(const Trajectory& traj, const std::vector<HumanSpec>& humans,
                           double sensing_range, double delta_th, double deviation_tol);

/// Non-reactive rollouts labeled Interfere iff the human-robot distance drops
/// to delta_th within the next `labeling_horizon` seconds. Samples with the
/// human farther than `sample_range` are skipped.
Dataset generate_training_data(const std::vector<Scenario>& scenarios, double labeling_horizon,
                               std::span<const double> lanes,
                               double sample_range = std::numeric_limits<double>::infinity());

/// Copies each scenario once per (velocity, lane) pair, with the robot
/// starting on that lane.
std::vector<Scenario> expand_action_grid(const std::vector<Scenario>& base,
                                         std::span<const double> velocities,
                                         std::span<const double> lanes);

/// Humans start on a circle around the corridor center and head for the
/// opposite side, goal angle jittered by +-goal_spread. Each human draws its
/// own radius from [radius, radius + radius_spread], which staggers arrivals. Start angles within
/// clear_angle of the corridor axis are excluded so nobody spawns on the
/// robot's start or goal.
struct CrowdWorld {
    Vec2 center{3.0, 0.0};
    double radius = 7.0;
    double radius_spread = 0.0;
    double goal_spread = 0.6; // [rad]
    double clear_angle = 0.0; // [rad]
    double min_speed = 0.8;
    double max_speed = 1.2;
    std::size_t humans = 10;
    Vec2 robot_start{0.0, 0.0};
    Vec2 robot_goal{6.0, 0.0};
    double duration = 30.0;
    double tick = 0.1;
    double delta_th = 1.5;
    HumanModel human_model;
};

Scenario random_scenario(const CrowdWorld& world, std::uint64_t seed);

struct AgentTrack {
    std::vector<double> times;
    std::vector<AgentState> states;
};

/// CSV `t,x,y,heading,speed`, one row per tick.
std::string format_agent_csv(std::span<const double> times, std::span<const AgentState> states);
AgentTrack parse_agent_csv(std::string_view text);

} // namespace dtmon
