#include "dtmon/sim.hpp"

#include <algorithm>
#include <cmath>
#include <charconv>
#include <cstdio>
#include <numbers>

namespace dtmon {

AgentState human_step(const AgentState& h, Vec2 goal, double nominal_speed, const AgentState& robot,
                      double delta_th, double dt, const HumanModel& model) {
    Vec2 v{0.0, 0.0};
    const Vec2 to_goal = goal - h.position();
    const double goal_dist = norm(to_goal);
    if (goal_dist > 1e-12) v = (std::min(nominal_speed, goal_dist / dt) / goal_dist) * to_goal;

    const Vec2 away = h.position() - robot.position();
    const double d = norm(away);
    if (d < delta_th && d > 1e-12) v = v + (model.k_rep * (1.0 / d - 1.0 / delta_th) / d) * away;

    const double cap = model.speed_cap * nominal_speed;
    const double speed = norm(v);
    if (speed > cap) v = (cap / speed) * v;

    AgentState n = h;
    n.x += v.x * dt;
    n.y += v.y * dt;
    n.speed = norm(v);
    if (n.speed > 1e-12) n.heading = wrap_radians(std::atan2(v.y, v.x));
    return n;
}

Vec2 intended_position(const HumanSpec& h, double t) {
    const Vec2 path = h.goal - h.start;
    const double length = norm(path);
    if (length < 1e-12) return h.start;
    const double s = std::min(h.speed * t, length);
    return h.start + (s / length) * path;
}

RunMetrics compute_metrics(const Trajectory& traj, const std::vector<HumanSpec>& humans,
                           double sensing_range, double delta_th, double deviation_tol) {
    RunMetrics m;
    m.max_deviation.assign(humans.size(), 0.0);
    std::size_t closest_tick = 0;
    for (std::size_t k = 0; k < traj.ticks(); ++k) {
        const AgentState& r = traj.robot[k];
        bool violated = false;
        for (std::size_t h = 0; h < humans.size(); ++h) {
            const AgentState& p = traj.humans[h][k];
            const double d = std::hypot(p.x - r.x, p.y - r.y);
            if (d < m.min_distance) {
                m.min_distance = d;
                closest_tick = k;
            }
            violated = violated || d < delta_th;
            m.max_deviation[h] = std::max(m.max_deviation[h], norm(p.position() - traj.intended[h][k]));
        }
        if (violated) ++m.case1_ticks;
    }
    if (!humans.empty() && traj.ticks() > 0) {
        const AgentState& r = traj.robot[closest_tick];
        for (std::size_t h = 0; h < humans.size(); ++h) {
            const AgentState& p = traj.humans[h][closest_tick];
            if (std::hypot(p.x - r.x, p.y - r.y) <= sensing_range) ++m.in_range_at_closest;
        }
    }
    m.interfered = std::any_of(m.max_deviation.begin(), m.max_deviation.end(),
                               [&](double d) { return d > deviation_tol; });
    return m;
}

RunResult run_scenario(const Scenario& s, Policy policy, const Dataset& global,
                       const MonitorConfig& cfg_in, const RunOptions& opts) {
    if (!(s.tick > 0.0)) throw InvalidInput("scenario tick must be positive");
    for (const auto& h : s.humans)
        if (!(h.speed > 0.0)) throw InvalidInput("human speeds must be positive");
    if (policy == Policy::DtMonitor && global.empty())
        throw InvalidInput("the decision-tree monitor needs a non-empty dataset");

    MonitorConfig cfg = cfg_in;
    cfg.tick = s.tick;
    cfg.delta_th = s.delta_th;
    cfg.home_lane = lane_of(s.robot_goal.y, cfg.lanes);

    RunResult out;
    Trajectory& traj = out.trajectory;
    traj.tick = s.tick;
    traj.humans.resize(s.humans.size());
    traj.intended.resize(s.humans.size());

    const double start_speed = policy == Policy::DtMonitor ? cfg.nominal_v : s.robot_action.v_r;
    AgentState robot{s.robot_start.x, s.robot_start.y, 0.0, start_speed};
    std::vector<AgentState> humans;
    for (const auto& h : s.humans) {
        const Vec2 dir = h.goal - h.start;
        humans.push_back({h.start.x, h.start.y, std::atan2(dir.y, dir.x), h.speed});
    }

    auto record = [&](std::size_t k) {
        const double t = static_cast<double>(k) * s.tick;
        traj.times.push_back(t);
        traj.robot.push_back(robot);
        for (std::size_t h = 0; h < humans.size(); ++h) {
            traj.humans[h].push_back(humans[h]);
            traj.intended[h].push_back(intended_position(s.humans[h], t));
        }
    };

    std::optional<Monitor> monitor;
    if (policy == Policy::DtMonitor) monitor.emplace(global, cfg);
    PlannerMode mode;

    const auto max_ticks = static_cast<std::size_t>(std::llround(s.duration / s.tick));
    bool reached = false;
    double dt_sum = 0.0;
    std::size_t k = 0;
    record(k);
    while (k < max_ticks) {
        const double t = static_cast<double>(k) * s.tick;
        Command cmd;
        if (monitor) {
            TickResult tr = monitor->tick(robot, humans, t, mode, s.seed ^ (0x100000001b3ULL * (k + 1)));
            cmd = tr.command;
            mode = tr.mode;
            if (!tr.report.humans.empty()) {
                ++out.metrics.decisions;
                dt_sum += tr.report.dt_ms();
                out.metrics.max_dt_ms = std::max(out.metrics.max_dt_ms, tr.report.dt_ms());
            }
            for (const auto& hr : tr.report.humans) {
                if (hr.case2) {
                    ++out.metrics.case2_flags;
                    out.case2.push_back({k, hr.human, hr.attributes});
                }
            }
            if (tr.report.correction.action &&
                (out.corrections.empty() || !(out.corrections.back() == *tr.report.correction.action)))
                out.corrections.push_back(*tr.report.correction.action);
            out.reports.push_back(std::move(tr.report));
        } else {
            GhostTarget lane;
            lane.state = {robot.x, s.robot_action.lane, 0.0, s.robot_action.v_r};
            lane.action = s.robot_action;
            cmd = pure_pursuit(robot, lane, cfg.lookahead, std::max(cfg.max_speed, s.robot_action.v_r),
                               cfg.k_catchup);
            cmd.heading_rate = std::clamp(cmd.heading_rate, -cfg.max_turn_rate, cfg.max_turn_rate);
        }

        for (std::size_t h = 0; h < humans.size(); ++h)
            humans[h] = human_step(humans[h], s.humans[h].goal, s.humans[h].speed, robot, s.delta_th,
                                   s.tick, s.human_model);
        robot = unicycle_step(robot, cmd, s.tick);
        ++k;
        record(k);
        if (!reached && robot.x >= s.robot_goal.x) {
            reached = true;
            out.metrics.goal_time = static_cast<double>(k) * s.tick;
            if (opts.stop_at_goal) break;
        }
    }

    const RunMetrics geo =
        compute_metrics(traj, s.humans, cfg.sensing_range, s.delta_th, opts.deviation_tol);
    RunMetrics& m = out.metrics;
    m.min_distance = geo.min_distance;
    m.max_deviation = geo.max_deviation;
    m.interfered = geo.interfered;
    m.in_range_at_closest = geo.in_range_at_closest;
    m.case1_ticks = geo.case1_ticks;
    m.goal_reached = reached;
    m.mean_dt_ms = m.decisions ? dt_sum / static_cast<double>(m.decisions) : 0.0;
    return out;
}

Dataset generate_training_data(const std::vector<Scenario>& scenarios, double labeling_horizon,
                               std::span<const double> lanes, double sample_range) {
    Dataset out;
    const Dataset none;
    RunOptions opts;
    opts.stop_at_goal = false;
    MonitorConfig cfg;
    cfg.lanes.assign(lanes.begin(), lanes.end());
    for (const Scenario& s : scenarios) {
        const Trajectory traj = run_scenario(s, Policy::NominalNonReactive, none, cfg, opts).trajectory;
        const auto horizon = static_cast<std::size_t>(std::llround(labeling_horizon / s.tick));
        for (std::size_t h = 0; h < s.humans.size(); ++h) {
            std::vector<double> dist(traj.ticks());
            for (std::size_t k = 0; k < traj.ticks(); ++k)
                dist[k] = norm(traj.humans[h][k].position() - traj.robot[k].position());
            for (std::size_t k = 0; k < traj.ticks(); ++k) {
                if (dist[k] > sample_range) continue;
                const std::optional<double> prev = k ? std::optional<double>(dist[k - 1]) : std::nullopt;
                LabeledSample sample;
                sample.attributes = compute_attributes(traj.robot[k], traj.humans[h][k], prev, s.tick, lanes);
                const std::size_t last = std::min(traj.ticks() - 1, k + horizon);
                const bool hit = std::any_of(dist.begin() + static_cast<std::ptrdiff_t>(k),
                                             dist.begin() + static_cast<std::ptrdiff_t>(last) + 1,
                                             [&](double d) { return d <= s.delta_th; });
                sample.label = hit ? Label::Interfere : Label::NotInterfere;
                out.append(sample);
            }
        }
    }
    return out;
}

std::vector<Scenario> expand_action_grid(const std::vector<Scenario>& base,
                                         std::span<const double> velocities,
                                         std::span<const double> lanes) {
    std::vector<Scenario> out;
    out.reserve(base.size() * velocities.size() * lanes.size());
    for (const auto& b : base)
        for (double v : velocities)
            for (double l : lanes) {
                Scenario s = b;
                s.robot_action = {v, l};
                s.robot_start.y = l;
                s.robot_goal.y = l;
                out.push_back(s);
            }
    return out;
}

Scenario random_scenario(const CrowdWorld& w, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    if (!(w.clear_angle >= 0.0 && w.clear_angle < std::numbers::pi / 2))
        throw InvalidInput("clear_angle must lie in [0, pi/2)");
    std::uniform_real_distribution<double> angle(w.clear_angle, std::numbers::pi - w.clear_angle);
    std::bernoulli_distribution lower(0.5);
    std::uniform_real_distribution<double> spread(-w.goal_spread, w.goal_spread);
    std::uniform_real_distribution<double> speed(w.min_speed, w.max_speed);
    if (!(w.radius_spread >= 0.0)) throw InvalidInput("radius_spread must be non-negative");
    std::uniform_real_distribution<double> radius(0.0, w.radius_spread);

    Scenario s;
    s.robot_start = w.robot_start;
    s.robot_goal = w.robot_goal;
    s.duration = w.duration;
    s.tick = w.tick;
    s.delta_th = w.delta_th;
    s.seed = seed;
    s.human_model = w.human_model;
    for (std::size_t i = 0; i < w.humans; ++i) {
        const double a = lower(rng) ? -angle(rng) : angle(rng);
        const double b = a + std::numbers::pi + spread(rng);
        HumanSpec h;
        h.speed = speed(rng);
        const double r = w.radius + (w.radius_spread > 0.0 ? radius(rng) : 0.0);
        h.start = w.center + Vec2{r * std::cos(a), r * std::sin(a)};
        h.goal = w.center + Vec2{r * std::cos(b), r * std::sin(b)};
        s.humans.push_back(h);
    }
    return s;
}

std::string format_agent_csv(std::span<const double> times, std::span<const AgentState> states) {
    if (times.size() != states.size()) throw InvalidInput("times and states differ in length");
    std::string out = "t,x,y,heading,speed\n";
    char buf[160];
    for (std::size_t k = 0; k < states.size(); ++k) {
        const AgentState& s = states[k];
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g\n", times[k], s.x, s.y,
                      s.heading, s.speed);
        out += buf;
    }
    return out;
}

AgentTrack parse_agent_csv(std::string_view text) {
    AgentTrack track;
    std::size_t row = 0;
    while (!text.empty()) {
        const auto eol = text.find('\n');
        std::string_view line = text.substr(0, eol);
        text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
        ++row;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty() || (row == 1 && line.starts_with("t,"))) continue;
        std::array<double, 5> v{};
        std::size_t n = 0;
        while (true) {
            const auto comma = line.find(',');
            const std::string_view f = line.substr(0, comma);
            if (n == v.size()) throw ParseError(row, "too many columns");
            auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v[n]);
            if (ec != std::errc{} || ptr != f.data() + f.size()) throw ParseError(row, "non-numeric field");
            ++n;
            if (comma == std::string_view::npos) break;
            line.remove_prefix(comma + 1);
        }
        if (n != v.size()) throw ParseError(row, "expected 5 columns");
        track.times.push_back(v[0]);
        track.states.push_back({v[1], v[2], v[3], v[4]});
    }
    return track;
}

} // namespace dtmon
