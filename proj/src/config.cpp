#include "dtmon/config.hpp"

#include <fstream>
#include <sstream>

#include <toml.hpp>

namespace dtmon {

namespace {

template <typename T>
void read(const toml::node_view<const toml::node>& table, std::string_view key, T& out) {
    const auto node = table[key];
    if (!node) return;
    if constexpr (std::is_same_v<T, bool>) {
        if (auto v = node.value<bool>()) { out = *v; return; }
    } else if constexpr (std::is_integral_v<T>) {
        if (auto v = node.value<std::int64_t>()) {
            if (*v < 0) throw InvalidInput("'" + std::string(key) + "' must be non-negative");
            out = static_cast<T>(*v);
            return;
        }
    } else if constexpr (std::is_floating_point_v<T>) {
        if (auto v = node.value<double>()) { out = *v; return; }
    } else if constexpr (std::is_same_v<T, std::string>) {
        if (auto v = node.value<std::string>()) { out = *v; return; }
    }
    throw InvalidInput("config key '" + std::string(key) + "' has the wrong type");
}

void read_list(const toml::node_view<const toml::node>& table, std::string_view key,
               std::vector<double>& out) {
    const auto node = table[key];
    if (!node) return;
    const toml::array* arr = node.as_array();
    if (!arr) throw InvalidInput("config key '" + std::string(key) + "' must be an array");
    out.clear();
    for (const auto& el : *arr) {
        auto v = el.value<double>();
        if (!v) throw InvalidInput("config key '" + std::string(key) + "' must hold numbers");
        out.push_back(*v);
    }
}

void read_point(const toml::node_view<const toml::node>& table, std::string_view key, Vec2& out) {
    std::vector<double> xy;
    read_list(table, key, xy);
    if (!table[key]) return;
    if (xy.size() != 2) throw InvalidInput("config key '" + std::string(key) + "' must be [x, y]");
    out = {xy[0], xy[1]};
}

void read_human_model(const toml::node_view<const toml::node>& t, HumanModel& m) {
    read(t, "k_rep", m.k_rep);
    read(t, "speed_cap", m.speed_cap);
}

void read_world(const toml::node_view<const toml::node>& t, CrowdWorld& w) {
    read_point(t, "center", w.center);
    read(t, "radius", w.radius);
    read(t, "radius_spread", w.radius_spread);
    read(t, "goal_spread", w.goal_spread);
    read(t, "clear_angle", w.clear_angle);
    read(t, "min_speed", w.min_speed);
    read(t, "max_speed", w.max_speed);
    read(t, "humans", w.humans);
    read_point(t, "robot_start", w.robot_start);
    read_point(t, "robot_goal", w.robot_goal);
    read(t, "duration", w.duration);
}

} // namespace

Scenario baseline_scenario() {
    Scenario s;
    s.robot_start = {0.0, 0.0};
    s.robot_goal = {6.0, 0.0};
    s.robot_action = {0.6, 0.0};
    s.humans = {HumanSpec{{4.0, -5.0}, {2.0, 5.0}, 1.0}};
    s.duration = 30.0;
    s.tick = 0.1;
    s.delta_th = 1.5;
    return s;
}

void RunConfig::validate() const {
    monitor.validate();
    if (!(scenario.tick > 0.0)) throw InvalidInput("scenario tick must be positive");
    if (!(scenario.duration > 0.0)) throw InvalidInput("scenario duration must be positive");
    for (const auto& h : scenario.humans)
        if (!(h.speed > 0.0)) throw InvalidInput("human speeds must be positive");
    if (!(datagen.labeling_horizon > 0.0)) throw InvalidInput("labeling_horizon must be positive");
    if (batch.trials < 1) throw InvalidInput("batch trials must be >= 1");
    for (const CrowdWorld* w : {&datagen.world, &batch.world})
        if (!(w->min_speed > 0.0 && w->max_speed >= w->min_speed && w->radius > 0.0))
            throw InvalidInput("crowd world speeds and radius must be positive");
}

RunConfig parse_config(std::string_view text, const std::filesystem::path& base_dir) {
    toml::table root;
    try {
        root = toml::parse(text);
    } catch (const toml::parse_error& e) {
        std::ostringstream msg;
        msg << "config parse error at line " << e.source().begin.line << ": " << e.description();
        throw std::runtime_error(msg.str());
    }
    const toml::node_view<const toml::node> r{static_cast<const toml::node&>(root)};

    RunConfig c;
    c.scenario = baseline_scenario();
    read(r, "seed", c.seed);
    if (r["dataset"]) {
        std::string p;
        read(r, "dataset", p);
        c.dataset = std::filesystem::path(p).is_absolute() ? std::filesystem::path(p) : base_dir / p;
    }

    const auto m = r["monitor"];
    read(m, "sensing_range", c.monitor.sensing_range);
    read(m, "delta_th", c.monitor.delta_th);
    read(m, "nominal_v", c.monitor.nominal_v);
    read_list(m, "lanes", c.monitor.lanes);
    read_list(m, "velocities", c.monitor.velocities);
    read(m, "tracking_eps", c.monitor.tracking_eps);
    read(m, "lookahead", c.monitor.lookahead);
    read(m, "tick", c.monitor.tick);
    read(m, "k_catchup", c.monitor.k_catchup);
    read(m, "failsafe_speed", c.monitor.failsafe_speed);
    read(m, "max_turn_rate", c.monitor.max_turn_rate);
    read(m, "clear_ticks_to_release", c.monitor.clear_ticks_to_release);
    read(m, "hold_correction", c.monitor.hold_correction);
    read(m, "max_speed", c.monitor.max_speed);

    const auto t = r["tree"];
    read(t, "min_leaf_size", c.monitor.tree.min_leaf_size);
    read(t, "max_depth", c.monitor.tree.max_depth);
    read(t, "min_impurity_decrease", c.monitor.tree.min_impurity_decrease);

    const auto l = r["locality"];
    read(l, "delta", c.monitor.locality_delta);
    read(l, "min_local_size", c.monitor.min_local_size);
    read(l, "max_growth", c.monitor.max_delta_growth);

    HumanModel model;
    read_human_model(r["human_model"], model);

    const auto s = r["scenario"];
    read_point(s, "robot_start", c.scenario.robot_start);
    read_point(s, "robot_goal", c.scenario.robot_goal);
    read(s, "duration", c.scenario.duration);
    c.scenario.tick = c.monitor.tick;
    c.scenario.delta_th = c.monitor.delta_th;
    c.scenario.human_model = model;
    if (const toml::array* hs = s["humans"].as_array()) {
        c.scenario.humans.clear();
        for (const auto& el : *hs) {
            const toml::node_view<const toml::node> h{el};
            HumanSpec spec;
            read_point(h, "start", spec.start);
            read_point(h, "goal", spec.goal);
            read(h, "speed", spec.speed);
            c.scenario.humans.push_back(spec);
        }
    }

    const auto d = r["datagen"];
    read(d, "labeling_horizon", c.datagen.labeling_horizon);
    read(d, "sample_range", c.datagen.sample_range);
    read(d, "paths", c.datagen.paths);
    read_world(d["world"], c.datagen.world);

    const auto b = r["batch"];
    read(b, "trials", c.batch.trials);
    std::string mode = c.batch.fixed ? "fixed" : "random";
    read(b, "mode", mode);
    if (mode != "fixed" && mode != "random") throw InvalidInput("batch.mode must be 'fixed' or 'random'");
    c.batch.fixed = mode == "fixed";
    read_world(b["world"], c.batch.world);

    for (CrowdWorld* w : {&c.datagen.world, &c.batch.world}) {
        w->tick = c.monitor.tick;
        w->delta_th = c.monitor.delta_th;
        w->human_model = model;
    }
    read(r["run"], "deviation_tol", c.run.deviation_tol);

    c.validate();
    return c;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path.parent_path());
}

std::vector<Scenario> training_scenarios(const DatagenConfig& cfg, const MonitorConfig& monitor,
                                         std::uint64_t seed) {
    CrowdWorld w = cfg.world;
    w.humans = 1;
    std::vector<Scenario> base;
    base.reserve(cfg.paths);
    for (std::size_t i = 0; i < cfg.paths; ++i) base.push_back(random_scenario(w, seed * 7919 + i));
    return expand_action_grid(base, monitor.velocities, monitor.lanes);
}

} // namespace dtmon
