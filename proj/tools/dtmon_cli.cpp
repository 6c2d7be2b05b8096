// dtmon: data generation, tree inspection, scenario runs and batch trials for
// the decision-tree interference monitor.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "dtmon/batch.hpp"
#include "dtmon/config.hpp"
#include "dtmon/core.hpp"
#include "dtmon/dtree.hpp"
#include "dtmon/local.hpp"
#include "dtmon/sim.hpp"
#include "dtmon/validation.hpp"

namespace fs = std::filesystem;
using namespace dtmon;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;
constexpr int kExitOutOfData = 3;

struct Options {
    std::string config;
    std::string dataset;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::size_t trials = 0;
    bool with_updates = false;
    std::vector<double> alpha;
};

RunConfig resolve_config(const Options& o) {
    RunConfig cfg = o.config.empty() ? parse_config("") : load_config(o.config);
    if (o.seed) cfg.seed = *o.seed;
    if (!o.dataset.empty()) cfg.dataset = fs::path(o.dataset);
    return cfg;
}

Dataset require_dataset(const RunConfig& cfg) {
    if (!cfg.dataset) throw std::runtime_error("no dataset given (use --dataset or 'dataset' in the config)");
    if (!fs::exists(*cfg.dataset)) throw std::runtime_error("dataset '" + cfg.dataset->string() + "' does not exist");
    Dataset d = load_dataset(*cfg.dataset);
    if (d.empty()) throw std::runtime_error("dataset '" + cfg.dataset->string() + "' is empty");
    return d;
}

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write '" + p.string() + "'");
    f << text;
}

int cmd_datagen(const Options& o) {
    const RunConfig cfg = resolve_config(o);
    if (cfg.datagen.paths == 0) throw InvalidInput("datagen.paths is 0: no scenarios to generate");
    if (o.out.empty()) throw InvalidInput("datagen needs --out");
    const auto scenarios = training_scenarios(cfg.datagen, cfg.monitor, cfg.seed);
    const Dataset d = generate_training_data(scenarios, cfg.datagen.labeling_horizon, cfg.monitor.lanes,
                                             cfg.datagen.sample_range);
    save_dataset(d, o.out);
    const nlohmann::json summary{{"episodes", scenarios.size()},
                                 {"samples", d.size()},
                                 {"interfere", d.count(Label::Interfere)},
                                 {"not_interfere", d.count(Label::NotInterfere)},
                                 {"out", o.out}};
    std::cout << summary.dump() << "\n";
    return kExitOk;
}

int cmd_fit_inspect(const Options& o) {
    const RunConfig cfg = resolve_config(o);
    const Dataset d = require_dataset(cfg);
    const Tree tree = fit(d, cfg.monitor.tree);
    const auto imp = predictor_importance(tree);
    nlohmann::json importance;
    for (std::size_t i = 0; i < kNumAttributes; ++i) importance[std::string(attribute_name(i))] = imp[i];
    nlohmann::json j{{"samples", d.size()},
                     {"depth", tree.depth()},
                     {"leaves", tree.leaf_count()},
                     {"importance", importance},
                     {"tree", to_json(tree)}};
    if (o.out.empty())
        std::cout << j.dump(2) << "\n";
    else
        write_text(o.out, j.dump(2) + "\n");
    return kExitOk;
}

int cmd_explain(const Options& o) {
    if (o.alpha.size() != kNumAttributes) {
        std::cerr << "explain expects exactly 8 attribute values (d_x d_y theta d d' v_h v_r lane), got "
                  << o.alpha.size() << "\n";
        return kExitUsage;
    }
    const RunConfig cfg = resolve_config(o);
    const Dataset d = require_dataset(cfg);
    AttributeVector a;
    std::copy(o.alpha.begin(), o.alpha.end(), a.values.begin());

    const LocalitySpec spec = scaled_locality(d, cfg.monitor.locality_delta);
    const GrownSelection sel = select_local_grown(d, a, spec, cfg.monitor.min_local_size,
                                                  cfg.monitor.max_delta_growth);
    if (sel.data.empty()) {
        std::cout << "out-of-data: no training samples near the observation\n";
        return kExitOutOfData;
    }
    const Tree tree = fit(sel.data, cfg.monitor.tree);
    const Explanation e = explain(tree, a);
    const auto cfs = counterfactuals(tree, e.predicted);
    std::cout << "Prediction: " << label_name(e.predicted) << "\n";
    std::cout << format_explanation(e) << "\n";
    std::cout << format_counterfactuals(cfs, e.predicted) << "\n";

    LocalitySpec corr_spec = spec;
    corr_spec.delta = sel.delta;
    const Dataset corr = select_correction_set(d, a, corr_spec);
    const Tree ctree = fit(corr, cfg.monitor.tree, kControllableAttributes);
    const auto actionable = counterfactuals(ctree, Label::Interfere);
    std::cout << "Actionable: " << format_counterfactuals(actionable, Label::Interfere) << "\n";
    if (auto best = optimal_counterfactual(actionable))
        std::cout << "Optimal: " << format_clauses(best->first.clauses) << "\n";

    nlohmann::json dump{{"local_size", sel.data.size()},
                        {"delta", sel.delta},
                        {"tree", to_json(tree)},
                        {"correction_tree", to_json(ctree)}};
    if (o.out.empty())
        std::cout << dump.dump() << "\n";
    else
        write_text(o.out, dump.dump(2) + "\n");
    return kExitOk;
}

void write_run(const fs::path& dir, const RunResult& r) {
    fs::create_directories(dir);
    const Trajectory& t = r.trajectory;
    write_text(dir / "robot.csv", format_agent_csv(t.times, t.robot));
    for (std::size_t h = 0; h < t.humans.size(); ++h)
        write_text(dir / ("human_" + std::to_string(h) + ".csv"), format_agent_csv(t.times, t.humans[h]));
    write_text(dir / "metrics.json", to_json(r.metrics).dump(2) + "\n");
    std::ofstream rep(dir / "report.jsonl", std::ios::binary);
    for (const auto& tick : r.reports) rep << to_json(tick).dump() << "\n";
}

int cmd_run(const Options& o) {
    const RunConfig cfg = resolve_config(o);
    const Dataset d = require_dataset(cfg);
    Scenario s = cfg.scenario;
    s.seed = cfg.seed;
    const RunResult r = run_scenario(s, Policy::DtMonitor, d, cfg.monitor, cfg.run);
    if (!o.out.empty()) write_run(o.out, r);
    std::cout << to_json(r.metrics).dump() << "\n";
    return r.metrics.goal_reached ? kExitOk : kExitFailure;
}

int cmd_batch(const Options& o) {
    const RunConfig cfg = resolve_config(o);
    const Dataset d = require_dataset(cfg);
    const std::size_t trials = o.trials ? o.trials : cfg.batch.trials;
    const BatchResult b = run_batch(cfg, d, trials, o.with_updates, cfg.seed);

    nlohmann::json per_trial = nlohmann::json::array();
    for (const auto& t : b.trials) per_trial.push_back(to_json(t));
    const nlohmann::json j{{"summary", to_json(b.summary)},
                           {"with_updates", o.with_updates},
                           {"samples_before", d.size()},
                           {"samples_after", b.dataset.size()},
                           {"trials", per_trial}};
    if (!o.out.empty()) {
        const fs::path dir(o.out);
        fs::create_directories(dir);
        write_text(dir / "batch.json", j.dump(2) + "\n");
        if (o.with_updates) {
            std::ofstream log(dir / "updates.jsonl", std::ios::binary);
            for (const auto& e : b.update_log) log << to_json(e).dump() << "\n";
            save_dataset(b.dataset, dir / "dataset_updated.csv");
        }
    }
    std::cout << to_json(b.summary).dump() << "\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Decision-tree interference monitor"};
    app.require_subcommand(1);
    Options o;

    auto add_common = [&](CLI::App* c) {
        c->add_option("--config", o.config, "TOML run configuration")->check(CLI::ExistingFile);
        c->add_option("--dataset", o.dataset, "CSV dataset");
        c->add_option("--seed", o.seed, "override the config seed");
    };

    auto* datagen = app.add_subcommand("datagen", "generate a labeled training dataset");
    add_common(datagen);
    datagen->add_option("--out", o.out, "output CSV")->required();

    auto* inspect = app.add_subcommand("fit-inspect", "fit a tree on the whole dataset and dump it");
    add_common(inspect);
    inspect->add_option("--out", o.out, "write the JSON dump here instead of stdout");

    auto* explain_cmd = app.add_subcommand("explain", "predict, explain and list counterfactuals for one observation");
    add_common(explain_cmd);
    explain_cmd->add_option("--out", o.out, "write the JSON tree dump here");
    explain_cmd->add_option("alpha", o.alpha, "d_x d_y theta d d' v_h v_r lane")->expected(0, -1);

    auto* run = app.add_subcommand("run", "run the configured scenario with the monitor");
    add_common(run);
    run->add_option("--out", o.out, "directory for trajectory CSVs, metrics.json, report.jsonl");

    auto* batch = app.add_subcommand("batch", "run seeded trials and aggregate metrics");
    add_common(batch);
    batch->add_option("--out", o.out, "directory for batch.json (and updates)");
    batch->add_option("--trials", o.trials, "number of trials (default: config)")->check(CLI::PositiveNumber);
    batch->add_flag("--with-updates", o.with_updates, "merge run-time dataset updates between trials");

    // Negative attribute values must not be taken for flags.
    app.allow_extras(false);
    explain_cmd->allow_extras(false);
    CLI11_PARSE(app, argc, argv);

    try {
        if (datagen->parsed()) return cmd_datagen(o);
        if (inspect->parsed()) return cmd_fit_inspect(o);
        if (explain_cmd->parsed()) return cmd_explain(o);
        if (run->parsed()) return cmd_run(o);
        if (batch->parsed()) return cmd_batch(o);
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kExitFailure;
    } catch (const InvalidInput& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFailure;
    }
    return kExitUsage;
}
