#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "dtmon/core.hpp"
#include "dtmon/dtree.hpp"
#include "dtmon/local.hpp"

namespace dtmon {

/// Virtual vehicle executing a corrective action: it drives along
/// `action.lane` in +x at `action.v_r`.
struct GhostTarget {
    AgentState state;
    ControlAction action;
    double spawn_time = 0.0;

    /// Ghost after `dt` seconds of motion.
    GhostTarget advanced(double dt) const;
};

enum class ModeKind { Nominal, Correcting, FailSafe };
std::string_view mode_name(ModeKind k);

struct PlannerMode {
    ModeKind kind = ModeKind::Nominal;
    std::optional<GhostTarget> ghost; // set iff kind == Correcting
    int clear_ticks = 0; // consecutive all-clear ticks while correcting
    std::vector<ControlAction> rejected; // predicted to interfere since the last all-clear tick
};

struct MonitorConfig {
    double sensing_range = 5.0; // [m]
    double delta_th = 1.5;      // [m]
    double nominal_v = 0.6;     // [m/s]
    std::vector<double> lanes{-2.0, -1.0, 0.0, 1.0, 2.0};
    std::vector<double> velocities{0.2, 0.4, 0.6, 0.8, 1.0};
    double tracking_eps = 0.1;  // [m]
    double lookahead = 1.0;     // [m]
    double tick = 0.1;          // [s]
    double home_lane = 0.0;     // lane followed when nobody is in range
    double k_catchup = 0.5;     // [1/s]
    double failsafe_speed = 0.1; // [m/s]
    double max_turn_rate = 1.5;  // [rad/s]
    double max_speed = 1.2;      // [m/s] physical limit, above the velocity grid so ghosts are reachable
    int clear_ticks_to_release = 5;
    // Keep executing a reached correction until clear_ticks_to_release
    // consecutive all-clear ticks; when false, reaching the ghost ends it.
    bool hold_correction = true;

    TreeParams tree;
    double locality_delta = 1.5;
    std::size_t min_local_size = 30;
    int max_delta_growth = 4;

    /// Throws InvalidInput when a field violates its constraint.
    void validate() const;
    double v_max() const; // largest admissible or nominal velocity
};

struct Command {
    double speed = 0.0;        // [m/s]
    double heading_rate = 0.0; // [rad/s]
};

struct HumanReport {
    std::size_t human = 0;
    AttributeVector attributes;
    bool out_of_data = false;
    bool case2 = false;
    std::size_t local_size = 0;
    double delta = 0.0;
    Label prediction = Label::NotInterfere;
    Explanation explanation;
    std::vector<CounterfactualRule> counterfactuals;
};

enum class CorrectionSource { None, Counterfactual, RandomUnseen, FailSafe };

struct CorrectionReport {
    CorrectionSource source = CorrectionSource::None;
    std::size_t ensemble_size = 0;
    std::vector<CounterfactualRule> rules;
    std::optional<std::size_t> chosen_rule;
    std::optional<ControlAction> action;
};

struct TickReport {
    double time = 0.0;
    bool from_ghost = false; // attributes computed from the ghost state
    ModeKind mode = ModeKind::Nominal;
    std::vector<HumanReport> humans;
    CorrectionReport correction;
    Command command;
    double predict_ms = 0.0; // selection + fit + predict + explain + counterfactuals
    double correct_ms = 0.0; // correction sets + ensemble + correction tree
    double dt_ms() const { return predict_ms + correct_ms; }
};

nlohmann::json to_json(const TickReport& r);

struct TickResult {
    Command command;
    PlannerMode mode;
    TickReport report;
};

/// Pure pursuit on a ghost: aims `lookahead` ahead of the ghost along its lane,
/// curvature 2 sin(bearing error) / lookahead, speed = ghost speed +
/// k_catchup * (along-track gap), clamped to [0, v_max].
Command pure_pursuit(const AgentState& robot, const GhostTarget& ghost, double lookahead,
                     double v_max, double k_catchup = 0.5);

/// Creep at cfg.failsafe_speed, steering along the summed inverse-square
/// repulsion of humans within delta_th (or back to the current lane if none).
Command failsafe_command(const AgentState& robot, const std::vector<AgentState>& humans,
                         const MonitorConfig& cfg);

/// Closed-loop interference monitor for one robot. Holds the global dataset
/// by reference and the previous-tick positions needed for d'.
class Monitor {
  public:
    Monitor(const Dataset& global, MonitorConfig cfg);

    TickResult tick(const AgentState& robot, const std::vector<AgentState>& humans, double time,
                    const PlannerMode& mode, std::uint64_t seed);

    /// Forget previous-tick positions (start of a new run).
    void reset();

    const MonitorConfig& config() const { return cfg_; }
    const LocalitySpec& locality() const { return locality_; }

  private:
    const Dataset& global_;
    MonitorConfig cfg_;
    LocalitySpec locality_;
    std::optional<Vec2> prev_robot_;
    std::vector<std::optional<Vec2>> prev_humans_;
};

/// Unicycle step: position from the current heading, then heading update.
AgentState unicycle_step(const AgentState& s, const Command& c, double dt);

} // namespace dtmon
