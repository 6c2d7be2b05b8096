#include "dtmon/batch.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

namespace dtmon {

namespace {

double median(std::vector<double> v) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double percentile(std::vector<double> v, double q) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const auto idx = static_cast<std::size_t>(std::ceil(q * static_cast<double>(v.size()))) ;
    return v[std::min(v.size() - 1, idx == 0 ? 0 : idx - 1)];
}

TrialResult run_trial(const RunConfig& cfg, const Dataset& global, const Scenario& s) {
    const RunResult r = run_scenario(s, Policy::DtMonitor, global, cfg.monitor, cfg.run);
    TrialResult t;
    t.seed = s.seed;
    t.metrics = r.metrics;
    t.corrections = r.corrections;
    for (const auto& rep : r.reports)
        if (!rep.humans.empty()) t.dt_ms.push_back(rep.dt_ms());
    t.case2_flags = r.metrics.case2_flags;
    t.case1_hits = r.metrics.case1_ticks;
    return t;
}


} // namespace

BatchSummary summarize(const std::vector<TrialResult>& trials) {
    BatchSummary s;
    s.trials = trials.size();
    if (trials.empty()) return s;
    std::size_t ok = 0;
    double dist_sum = 0.0;
    std::size_t dist_n = 0;
    std::vector<double> all_dt;
    std::vector<double> dens_ok;
    std::vector<double> dens_fail;
    for (const auto& t : trials) {
        if (t.success()) ++ok;
        if (t.metrics.goal_reached) ++s.goal_reached;
        if (std::isfinite(t.metrics.min_distance)) {
            dist_sum += t.metrics.min_distance;
            ++dist_n;
        }
        all_dt.insert(all_dt.end(), t.dt_ms.begin(), t.dt_ms.end());
        (t.success() ? dens_ok : dens_fail).push_back(static_cast<double>(t.metrics.in_range_at_closest));
    }
    s.success_rate = static_cast<double>(ok) / static_cast<double>(trials.size());
    s.mean_min_distance = dist_n ? dist_sum / static_cast<double>(dist_n)
                                 : std::numeric_limits<double>::infinity();
    if (!all_dt.empty()) {
        s.mean_dt_ms = std::accumulate(all_dt.begin(), all_dt.end(), 0.0) / static_cast<double>(all_dt.size());
        s.p50_dt_ms = percentile(all_dt, 0.5);
        s.p95_dt_ms = percentile(all_dt, 0.95);
        s.max_dt_ms = *std::max_element(all_dt.begin(), all_dt.end());
    }
    s.median_density_success = median(dens_ok);
    s.median_density_failure = median(dens_fail);
    return s;
}

Scenario trial_scenario(const RunConfig& cfg, std::uint64_t seed, std::size_t i) {
    if (cfg.batch.fixed) {
        Scenario s = cfg.scenario;
        s.seed = seed + i;
        return s;
    }
    return random_scenario(cfg.batch.world, seed * 1000003ULL + i);
}

BatchResult run_batch(const RunConfig& cfg, const Dataset& global, std::size_t trials,
                      bool with_updates, std::uint64_t seed) {
    if (trials < 1) throw InvalidInput("at least one trial is required");
    if (global.empty()) throw InvalidInput("batch runs need a non-empty dataset");
    BatchResult out;
    out.trials.resize(trials);

    if (!with_updates) {
        out.dataset = global;
        const auto n = static_cast<std::ptrdiff_t>(trials);
#pragma omp parallel for schedule(dynamic, 1)
        for (std::ptrdiff_t i = 0; i < n; ++i) {
            const auto idx = static_cast<std::size_t>(i);
            out.trials[idx] = run_trial(cfg, global, trial_scenario(cfg, seed, idx));
        }
    } else {
        Dataset data = global;
        UpdateParams up;
        up.labeling_horizon = cfg.datagen.labeling_horizon;
        up.delta_th = cfg.monitor.delta_th;
        up.lanes = cfg.monitor.lanes;
        for (std::size_t i = 0; i < trials; ++i) {
            const Scenario s = trial_scenario(cfg, seed, i);
            const RunResult r = run_scenario(s, Policy::DtMonitor, data, cfg.monitor, cfg.run);
            TrialResult t;
            t.seed = s.seed;
            t.metrics = r.metrics;
            t.corrections = r.corrections;
            for (const auto& rep : r.reports)
                if (!rep.humans.empty()) t.dt_ms.push_back(rep.dt_ms());
            t.case2_flags = r.metrics.case2_flags;

            const auto hits = case1_violation(r.trajectory, cfg.monitor.delta_th);
            t.case1_hits = hits.size();
            up.run_id = "trial-" + std::to_string(i);
            UpdateResult u = apply_updates(data, r.trajectory, hits, r.case2, up);
            t.samples_added = u.log.size();
            data = std::move(u.dataset);
            out.update_log.insert(out.update_log.end(), u.log.begin(), u.log.end());
            out.trials[i] = std::move(t);
        }
        out.dataset = std::move(data);
    }
    out.summary = summarize(out.trials);
    return out;
}

nlohmann::json to_json(const RunMetrics& m) {
    auto num = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(); };
    return {{"min_distance", num(m.min_distance)},
            {"max_deviation", m.max_deviation},
            {"interfered", m.interfered},
            {"goal_reached", m.goal_reached},
            {"goal_time", num(m.goal_time)},
            {"mean_dt_ms", m.mean_dt_ms},
            {"max_dt_ms", m.max_dt_ms},
            {"decisions", m.decisions},
            {"in_range_at_closest", m.in_range_at_closest},
            {"case1_ticks", m.case1_ticks},
            {"case2_flags", m.case2_flags}};
}

nlohmann::json to_json(const BatchSummary& s) {
    auto num = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(); };
    return {{"trials", s.trials},
            {"success_rate", s.success_rate},
            {"mean_min_distance", num(s.mean_min_distance)},
            {"goal_reached", s.goal_reached},
            {"dt_ms", {{"mean", s.mean_dt_ms}, {"p50", s.p50_dt_ms}, {"p95", s.p95_dt_ms}, {"max", s.max_dt_ms}}},
            {"median_density_success", num(s.median_density_success)},
            {"median_density_failure", num(s.median_density_failure)}};
}

nlohmann::json to_json(const TrialResult& t) {
    nlohmann::json corr = nlohmann::json::array();
    for (const auto& c : t.corrections) corr.push_back({c.v_r, c.lane});
    return {{"seed", t.seed},
            {"success", t.success()},
            {"metrics", to_json(t.metrics)},
            {"corrections", corr},
            {"case1_hits", t.case1_hits},
            {"samples_added", t.samples_added}};
}

} // namespace dtmon
