#include "dtmon/planner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include <nlohmann/json.hpp>

#include "dtmon/validation.hpp"

namespace dtmon {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

double clamp_abs(double v, double limit) { return std::clamp(v, -limit, limit); }

constexpr double kFailsafeHeadingGain = 2.0; // [1/s]

GhostTarget lane_target(const AgentState& robot, double lane, double speed) {
    GhostTarget g;
    g.state = {robot.x, lane, 0.0, speed};
    g.action = {speed, lane};
    return g;
}

std::uint64_t mix(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace

std::string_view mode_name(ModeKind k) {
    switch (k) {
    case ModeKind::Nominal: return "NOMINAL";
    case ModeKind::Correcting: return "CORRECTING";
    case ModeKind::FailSafe: return "FAILSAFE";
    }
    return "?";
}

GhostTarget GhostTarget::advanced(double dt) const {
    GhostTarget g = *this;
    g.state.x += action.v_r * dt;
    g.state.y = action.lane;
    g.state.heading = 0.0;
    g.state.speed = action.v_r;
    return g;
}

void MonitorConfig::validate() const {
    if (!(sensing_range > 0 && delta_th > 0 && nominal_v > 0 && tracking_eps > 0 && lookahead > 0 &&
          tick > 0 && k_catchup > 0 && failsafe_speed > 0 && max_turn_rate > 0 && locality_delta > 0))
        throw InvalidInput("monitor parameters must be positive");
    if (!(max_speed >= v_max())) throw InvalidInput("max_speed must be at least the largest velocity");
    if (!(delta_th < sensing_range)) throw InvalidInput("delta_th must be below the sensing range");
    if (lanes.empty() || velocities.empty()) throw InvalidInput("lane and velocity sets must be non-empty");
    for (double v : velocities)
        if (!(v > 0)) throw InvalidInput("admissible velocities must be positive");
    if (tree.min_leaf_size < 1 || tree.max_depth < 1) throw InvalidInput("invalid tree parameters");
}

double MonitorConfig::v_max() const {
    return std::max(nominal_v, *std::max_element(velocities.begin(), velocities.end()));
}

AgentState unicycle_step(const AgentState& s, const Command& c, double dt) {
    AgentState n = s;
    n.speed = std::max(0.0, c.speed);
    n.x += n.speed * std::cos(s.heading) * dt;
    n.y += n.speed * std::sin(s.heading) * dt;
    n.heading = wrap_radians(s.heading + c.heading_rate * dt);
    return n;
}

Command pure_pursuit(const AgentState& robot, const GhostTarget& ghost, double lookahead,
                     double v_max, double k_catchup) {
    // Offsets first, so a robot level with the ghost sees exactly `lookahead`.
    const double dx = (ghost.state.x - robot.x) + lookahead;
    const double dy = ghost.state.y - robot.y;
    const double dist = std::hypot(dx, dy);

    Command c;
    // Gap to the aim point beyond the lookahead: positive when behind.
    const double gap = dist - lookahead;
    c.speed = std::clamp(ghost.state.speed + k_catchup * gap, 0.0, v_max);
    if (dist < 1e-12) return c;
    const double err = wrap_radians(std::atan2(dy, dx) - robot.heading);
    const double kappa = 2.0 * std::sin(err) / lookahead;
    c.heading_rate = c.speed * kappa;
    return c;
}

Command failsafe_command(const AgentState& robot, const std::vector<AgentState>& humans,
                         const MonitorConfig& cfg) {
    Vec2 push{0.0, 0.0};
    for (const auto& h : humans) {
        const Vec2 away = robot.position() - h.position();
        const double d = norm(away);
        if (d >= cfg.delta_th || d < 1e-9) continue;
        push = push + (1.0 / (d * d * d)) * away;
    }
    double desired = 0.0;
    if (norm(push) > 1e-9) {
        desired = std::atan2(push.y, push.x);
    } else {
        const double lane = lane_of(robot.y, cfg.lanes);
        desired = std::atan2(lane - robot.y, cfg.lookahead);
    }
    Command c;
    c.speed = cfg.failsafe_speed;
    c.heading_rate =
        clamp_abs(kFailsafeHeadingGain * wrap_radians(desired - robot.heading), cfg.max_turn_rate);
    return c;
}

Monitor::Monitor(const Dataset& global, MonitorConfig cfg)
    : global_(global), cfg_(std::move(cfg)) {
    cfg_.validate();
    locality_ = scaled_locality(global_, cfg_.locality_delta);
}

void Monitor::reset() {
    prev_robot_.reset();
    prev_humans_.clear();
}

TickResult Monitor::tick(const AgentState& robot, const std::vector<AgentState>& humans,
                         double time, const PlannerMode& mode, std::uint64_t seed) {
    if (global_.empty()) throw InvalidInput("monitor requires a non-empty dataset");
    TickResult res;
    res.mode = mode;
    TickReport& rep = res.report;
    rep.time = time;

    // (1) Reference state: the ghost while the robot has not caught up with it.
    bool from_ghost = false;
    if (mode.kind == ModeKind::Correcting && mode.ghost) {
        if (norm(mode.ghost->state.position() - robot.position()) > cfg_.tracking_eps)
            from_ghost = true;
        else if (!cfg_.hold_correction)
            res.mode = PlannerMode{};
    }
    rep.from_ghost = from_ghost;
    const AgentState reference = from_ghost ? mode.ghost->state : robot;
    std::optional<Vec2> prev_reference = prev_robot_;
    if (from_ghost)
        prev_reference = mode.ghost->state.position() - Vec2{mode.ghost->action.v_r * cfg_.tick, 0.0};

    // (2) Per-human local trees.
    std::vector<std::size_t> in_range;
    for (std::size_t h = 0; h < humans.size(); ++h)
        if (norm(humans[h].position() - robot.position()) <= cfg_.sensing_range) in_range.push_back(h);
    prev_humans_.resize(humans.size());

    rep.humans.resize(in_range.size());
    std::vector<double> used_delta(in_range.size(), cfg_.locality_delta);
    const auto t_predict = Clock::now();
    const auto n_in = static_cast<std::ptrdiff_t>(in_range.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t k = 0; k < n_in; ++k) {
        const std::size_t h = in_range[static_cast<std::size_t>(k)];
        HumanReport& hr = rep.humans[static_cast<std::size_t>(k)];
        hr.human = h;
        std::optional<double> prev_d;
        if (prev_humans_[h] && prev_reference) prev_d = norm(*prev_humans_[h] - *prev_reference);
        hr.attributes = compute_attributes(reference, humans[h], prev_d, cfg_.tick, cfg_.lanes);

        GrownSelection sel = select_local_grown(global_, hr.attributes, locality_,
                                                cfg_.min_local_size, cfg_.max_delta_growth);
        hr.local_size = sel.data.size();
        hr.delta = sel.delta;
        used_delta[static_cast<std::size_t>(k)] = sel.delta;
        if (sel.data.empty()) {
            hr.out_of_data = true;
            hr.case2 = true;
            continue;
        }
        const Tree tree = fit(sel.data, cfg_.tree);
        hr.explanation = explain(tree, hr.attributes);
        hr.prediction = hr.explanation.predicted;
        hr.counterfactuals = counterfactuals(tree, hr.prediction);
        hr.case2 = case2_out_of_bounds(hr.attributes, hull_bounds(sel.data));
    }
    rep.predict_ms = ms_since(t_predict);

    for (std::size_t h = 0; h < humans.size(); ++h) prev_humans_[h] = humans[h].position();
    prev_robot_ = robot.position();

    const bool any_interfere = std::any_of(rep.humans.begin(), rep.humans.end(), [](const HumanReport& hr) {
        return !hr.out_of_data && hr.prediction == Label::Interfere;
    });

    auto finish = [&](const Command& c) {
        res.command = {std::clamp(c.speed, 0.0, cfg_.max_speed), clamp_abs(c.heading_rate, cfg_.max_turn_rate)};
        rep.command = res.command;
        if (res.mode.kind == ModeKind::Correcting) res.mode.ghost = res.mode.ghost->advanced(cfg_.tick);
        rep.mode = res.mode.kind;
        return res;
    };

    // (3) Nothing predicted: keep pursuing a live ghost, else follow the lane.
    if (!any_interfere) {
        res.mode.rejected.clear();
        if (res.mode.kind == ModeKind::Correcting) {
            // Chasing the ghost never counts towards release.
            if (from_ghost || ++res.mode.clear_ticks < cfg_.clear_ticks_to_release)
                return finish(pure_pursuit(robot, *res.mode.ghost, cfg_.lookahead, cfg_.max_speed,
                                           cfg_.k_catchup));
        }
        res.mode = PlannerMode{};
        const double lane = in_range.empty() ? cfg_.home_lane : lane_of(robot.y, cfg_.lanes);
        return finish(pure_pursuit(robot, lane_target(robot, lane, cfg_.nominal_v), cfg_.lookahead,
                                   cfg_.max_speed, cfg_.k_catchup));
    }

    // (4) Correction tree over the size-normalized union of correction sets.
    const auto t_correct = Clock::now();
    std::vector<Dataset> sets;
    for (std::size_t k = 0; k < in_range.size(); ++k) {
        if (rep.humans[k].out_of_data) continue;
        LocalitySpec spec = locality_;
        spec.delta = used_delta[k];
        sets.push_back(select_correction_set(global_, rep.humans[k].attributes, spec));
    }
    const Dataset ensemble = combine_ensemble(sets, mix(seed, 0));
    rep.correction.ensemble_size = ensemble.size();
    const Tree correction_tree = fit(ensemble, cfg_.tree, kControllableAttributes);
    rep.correction.rules = counterfactuals(correction_tree, Label::Interfere);

    const ControlAction current = res.mode.kind == ModeKind::Correcting
                                      ? mode.ghost->action
                                      : ControlAction{robot.speed, lane_of(robot.y, cfg_.lanes)};
    // Everything predicted to interfere since the last all-clear tick, the
    // current action included, is off the table.
    std::vector<ControlAction> rejected = mode.rejected;
    rejected.push_back(current);
    std::optional<ControlAction> action;
    for (std::size_t idx : rank_counterfactuals(rep.correction.rules)) {
        action = instantiate_action(rep.correction.rules[idx], cfg_.velocities, cfg_.lanes, current, rejected);
        if (action) {
            rep.correction.chosen_rule = idx;
            rep.correction.source = CorrectionSource::Counterfactual;
            break;
        }
    }
    // (5) Explore an untried pair, else fall back to fail-safe.
    if (!action) {
        action = random_unseen_action(ensemble, cfg_.velocities, cfg_.lanes, mix(seed, 1));
        if (action) rep.correction.source = CorrectionSource::RandomUnseen;
    }
    rep.correct_ms = ms_since(t_correct);

    if (!action) {
        rep.correction.source = CorrectionSource::FailSafe;
        res.mode = PlannerMode{ModeKind::FailSafe, std::nullopt, 0, std::move(rejected)};
        return finish(failsafe_command(robot, humans, cfg_));
    }
    rep.correction.action = action;
    GhostTarget ghost;
    ghost.state = {robot.x, action->lane, 0.0, action->v_r};
    ghost.action = *action;
    ghost.spawn_time = time;
    res.mode = PlannerMode{ModeKind::Correcting, ghost, 0, std::move(rejected)};
    return finish(pure_pursuit(robot, ghost, cfg_.lookahead, cfg_.max_speed, cfg_.k_catchup));
}

// --- report serialization -------------------------------------------------------

namespace {

std::string_view source_name(CorrectionSource s) {
    switch (s) {
    case CorrectionSource::None: return "none";
    case CorrectionSource::Counterfactual: return "counterfactual";
    case CorrectionSource::RandomUnseen: return "random_unseen";
    case CorrectionSource::FailSafe: return "failsafe";
    }
    return "?";
}

} // namespace

nlohmann::json to_json(const TickReport& r) {
    nlohmann::json humans = nlohmann::json::array();
    for (const auto& h : r.humans) {
        nlohmann::json cfs = nlohmann::json::array();
        for (const auto& c : h.counterfactuals) cfs.push_back(to_json(c));
        nlohmann::json clauses = nlohmann::json::array();
        for (const auto& c : h.explanation.clauses) clauses.push_back(to_json(c));
        humans.push_back({{"human", h.human},
                          {"attributes", h.attributes.values},
                          {"out_of_data", h.out_of_data},
                          {"case2", h.case2},
                          {"local_size", h.local_size},
                          {"delta", h.delta},
                          {"prediction", static_cast<int>(h.prediction)},
                          {"explanation", format_explanation(h.explanation)},
                          {"clauses", clauses},
                          {"counterfactuals", cfs}});
    }
    nlohmann::json corr{{"source", source_name(r.correction.source)},
                        {"ensemble_size", r.correction.ensemble_size}};
    nlohmann::json rules = nlohmann::json::array();
    for (const auto& c : r.correction.rules) rules.push_back(to_json(c));
    corr["rules"] = rules;
    corr["chosen_rule"] = r.correction.chosen_rule ? nlohmann::json(*r.correction.chosen_rule) : nlohmann::json();
    corr["action"] = r.correction.action
                         ? nlohmann::json{{"v_r", r.correction.action->v_r}, {"lane", r.correction.action->lane}}
                         : nlohmann::json();
    return {{"t", r.time},
            {"reference", r.from_ghost ? "ghost" : "robot"},
            {"mode", mode_name(r.mode)},
            {"humans", humans},
            {"correction", corr},
            {"command", {{"speed", r.command.speed}, {"heading_rate", r.command.heading_rate}}},
            {"timing_ms", {{"predict", r.predict_ms}, {"correct", r.correct_ms}, {"total", r.dt_ms()}}}};
}

} // namespace dtmon
