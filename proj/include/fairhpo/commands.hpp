#pragma once

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "fairhpo/datagen.hpp"
#include "fairhpo/reports.hpp"
#include "fairhpo/runconfig.hpp"

namespace fairhpo::commands {

namespace fs = std::filesystem;

inline std::string timestamp() {
    auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    strftime(buf, sizeof(buf), "%Y%m%d-%H%M%S", &tm);
    return buf;
}

// Every run gets a timestamped directory with the resolved config echoed
// for provenance. Passing an explicit directory pins it (tests, re-runs).
inline std::string make_run_dir(const RunConfig& rc, const std::string& command,
                                const std::string& explicit_dir) {
    std::string dir = explicit_dir.empty()
                          ? rc.out_dir + "/" + command + "-" + timestamp()
                          : explicit_dir;
    fs::create_directories(dir);
    return dir;
}

inline void write_json(const std::string& path, const nlohmann::json& j) {
    std::ofstream out(path);
    if (!out) throw TrialError("cannot write " + path);
    out << j.dump(2) << "\n";
}

inline nlohmann::json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open " + path);
    nlohmann::json j;
    in >> j;
    return j;
}

inline void echo_config(const std::string& dir, const RunConfig& rc, const std::string& command) {
    nlohmann::json j = rc.to_json();
    j["command"] = command;
    write_json(dir + "/resolved_config.json", j);
}

inline std::shared_ptr<CheckpointStore> make_store(const std::string& run_dir, bool& ephemeral) {
    const char* env = std::getenv("FAIRHPO_CHECKPOINT_DIR");
    ephemeral = env == nullptr;
    std::string dir = env ? std::string(env) : run_dir + "/checkpoints";
    return std::make_shared<DiskCheckpointStore>(dir);
}

inline void write_probe_files(const std::string& dir, const SearchSpace& space,
                              const TrialEvaluator::ProbeResult& result, size_t n_seeds,
                              bool svg, const std::optional<FairnessMetric>& fairness) {
    csv::write_file(dir + "/scatter.csv", reports::probe_scatter_table(space, result.summaries));
    write_json(dir + "/summary.json", reports::probe_summary_json(result, n_seeds));
    if (svg) {
        reports::SvgSeries s;
        s.name = "configs";
        s.color = "#2266cc";
        FairnessMetric f = fairness.value_or(FairnessMetric::SpdAbs);
        for (const auto& sum : result.summaries) {
            double y = f == FairnessMetric::AodAbs   ? sum.mean_aod_abs
                       : f == FairnessMetric::EodAbs ? sum.mean_eod_abs
                                                     : sum.mean_spd_abs;
            s.points.emplace_back(sum.mean_accuracy, y);
        }
        reports::write_svg_scatter(dir + "/scatter.svg", "search space probing", "accuracy",
                                   fairness_name(f), {s});
    }
}

// Probe: random subset of the space, seed-averaged scatter and dispersion
// summary, plus the trivial-solution rate.
inline std::string cmd_probe(const RunConfig& rc, const std::string& explicit_dir = "") {
    rc.validate();
    std::string dir = make_run_dir(rc, "probe", explicit_dir);
    echo_config(dir, rc, "probe");
    SearchSpace space = rc.make_space();
    Dataset data = rc.load_dataset();
    for (const auto& w : data.warnings) std::cerr << "warning: " << w << "\n";
    auto log = std::make_shared<RunLog>(dir + "/log.jsonl");
    TrialEvaluator evaluator(space, data, std::make_shared<NullCheckpointStore>(), log);
    auto result = evaluator.probe(rc.n_configs, rc.seeds, rc.seed, rc.hyperband.max_budget,
                                  rc.pipeline, rc.workers);
    write_probe_files(dir, space, result, rc.seeds.size(), rc.svg, rc.objectives.fairness);
    return dir;
}

inline OptimizeConfig make_optimize_config(const RunConfig& rc, SearchMode mode,
                                           bool single_objective, uint64_t seed) {
    OptimizeConfig oc;
    oc.search_objectives = rc.objectives;
    if (single_objective) oc.search_objectives.fairness = std::nullopt;
    oc.archive_objectives = rc.objectives;
    if (!oc.archive_objectives.fairness) oc.archive_objectives.fairness = FairnessMetric::SpdAbs;
    oc.scalarization = rc.scalarization;
    if (single_objective && oc.scalarization.strategy == ScalarizationStrategy::WeightedMean)
        oc.scalarization.weights = {1.0};
    oc.hyperband = rc.hyperband;
    oc.mode = mode;
    oc.trial_budget = rc.trial_budget;
    oc.seed = seed;
    oc.pipeline = rc.pipeline;
    oc.workers = rc.workers;
    return oc;
}

inline void write_archive_files(const std::string& dir, const std::string& stem,
                                const SearchSpace& space, const ObjectiveSpec& axes,
                                const OptimizeResult& result, bool svg) {
    csv::write_file(dir + "/" + stem + ".csv", reports::archive_table(space, axes, result));
    write_json(dir + "/" + stem + ".json", reports::archive_json(space, axes, result));
    std::vector<std::vector<double>> front;
    for (const auto& e : result.archive.entries()) front.push_back(e.objectives);
    nlohmann::json summary{{"n_trials", result.trials.size()},
                           {"archive_size", result.archive.entries().size()},
                           {"objective_names", axes.names()}};
    if (axes.arity() == 2) {
        bool in_range = true;
        for (const auto& p : front)
            if (p[0] > 1.0 || p[1] > 1.0) in_range = false;
        if (in_range) summary["hypervolume"] = hypervolume2d(front, {1.0, 1.0});
    }
    write_json(dir + "/" + stem + "_summary.json", summary);
    if (svg && axes.arity() == 2) {
        reports::SvgSeries s;
        s.name = "archive";
        s.color = "#cc4422";
        for (const auto& p : front) s.points.emplace_back(p[0], p[1]);
        reports::write_svg_scatter(dir + "/" + stem + ".svg", "pareto archive", axes.names()[0],
                                   axes.names()[1], {s});
    }
}

// Optimize: multi-objective (or single-objective) NAS+HPO run; archive CSV
// and JSON carry validation and test metrics per Pareto point.
inline std::string cmd_optimize(const RunConfig& rc, const std::string& explicit_dir = "") {
    rc.validate();
    std::string dir = make_run_dir(rc, "optimize", explicit_dir);
    echo_config(dir, rc, "optimize");
    SearchSpace space = rc.make_space();
    Dataset data = rc.load_dataset();
    for (const auto& w : data.warnings) std::cerr << "warning: " << w << "\n";
    bool ephemeral = false;
    auto store = make_store(dir, ephemeral);
    auto log = std::make_shared<RunLog>(dir + "/log.jsonl");
    TrialEvaluator evaluator(space, data, store, log);
    OptimizeConfig oc = make_optimize_config(rc, SearchMode::Bayesian,
                                             !rc.objectives.fairness.has_value(), rc.seed);
    OptimizeResult result = optimize(evaluator, oc);
    write_archive_files(dir, "archive", space, oc.archive_objectives, result, rc.svg);
    if (ephemeral) {
        std::error_code ec;
        fs::remove_all(dir + "/checkpoints", ec);
    }
    return dir;
}

// Compare: single- vs multi-objective runs with the same seeds and equal
// trial budgets; overlaid fronts plus the headline fairness delta at
// matched accuracy.
inline std::string cmd_compare(const RunConfig& rc, const std::string& explicit_dir = "") {
    rc.validate();
    if (!rc.objectives.fairness)
        throw ValidationError("compare: a fairness objective is required for the multi mode");
    std::string dir = make_run_dir(rc, "compare", explicit_dir);
    echo_config(dir, rc, "compare");
    SearchSpace space = rc.make_space();
    Dataset data = rc.load_dataset();
    for (const auto& w : data.warnings) std::cerr << "warning: " << w << "\n";

    csv::Table fronts;
    fronts.header = {"mode", "seed"};
    {
        csv::Table proto = reports::archive_table(space, rc.objectives, OptimizeResult{});
        for (const auto& h : proto.header) fronts.header.push_back(h);
    }
    nlohmann::json per_seed = nlohmann::json::array();
    std::vector<reports::SvgSeries> svg_series;

    for (uint64_t seed : rc.seeds) {
        nlohmann::json js{{"seed", seed}};
        std::map<std::string, OptimizeResult> results;
        for (const std::string mode : {"multi", "single"}) {
            bool ephemeral = false;
            std::string subdir = dir + "/" + mode + "-s" + std::to_string(seed);
            fs::create_directories(subdir);
            auto store = make_store(subdir, ephemeral);
            auto log = std::make_shared<RunLog>(subdir + "/log.jsonl");
            TrialEvaluator evaluator(space, data, store, log);
            OptimizeConfig oc =
                make_optimize_config(rc, SearchMode::Bayesian, mode == "single", seed);
            results[mode] = optimize(evaluator, oc);
            csv::Table at = reports::archive_table(space, oc.archive_objectives, results[mode]);
            for (auto& row : at.rows) {
                std::vector<std::string> r{mode, std::to_string(seed)};
                for (auto& c : row) r.push_back(std::move(c));
                fronts.rows.push_back(std::move(r));
            }
            if (ephemeral) {
                std::error_code ec;
                fs::remove_all(subdir + "/checkpoints", ec);
            }
        }

        // Headline: the single-objective best-accuracy point vs the fairest
        // multi-objective point within 0.02 balanced accuracy of it.
        auto best_by_error = [&](const OptimizeResult& r) -> const ArchiveEntry* {
            const ArchiveEntry* best = nullptr;
            for (const auto& e : r.archive.entries())
                if (!best || e.objectives[0] < best->objectives[0]) best = &e;
            return best;
        };
        const ArchiveEntry* single_best = best_by_error(results["single"]);
        if (single_best) {
            js["single_best"] = {{"error", single_best->objectives[0]},
                                 {"fairness", single_best->objectives[1]}};
            std::optional<double> matched;
            for (const auto& e : results["multi"].archive.entries()) {
                if (std::fabs(e.objectives[0] - single_best->objectives[0]) > 0.02) continue;
                if (!matched || e.objectives[1] < *matched) matched = e.objectives[1];
            }
            js["multi_matched_fairness"] = matched ? nlohmann::json(*matched) : nlohmann::json();
            js["fairness_reduction_ratio"] =
                (matched && single_best->objectives[1] > 0.0)
                    ? nlohmann::json(*matched / single_best->objectives[1])
                    : nlohmann::json();
        }
        per_seed.push_back(std::move(js));

        for (const std::string mode : {"multi", "single"}) {
            reports::SvgSeries s;
            s.name = mode + "-s" + std::to_string(seed);
            s.color = mode == "multi" ? "#2266cc" : "#cc4422";
            for (const auto& e : results[mode].archive.entries())
                s.points.emplace_back(e.objectives[0], e.objectives[1]);
            svg_series.push_back(std::move(s));
        }
    }

    csv::write_file(dir + "/fronts.csv", fronts);
    write_json(dir + "/compare.json",
               nlohmann::json{{"objective_names", rc.objectives.names()}, {"seeds", per_seed}});
    if (rc.svg)
        reports::write_svg_scatter(dir + "/fronts.svg", "single vs multi objective",
                                   rc.objectives.names()[0], rc.objectives.names()[1], svg_series);
    return dir;
}

// Report: regenerate derived outputs from an existing run directory's log.
inline std::string cmd_report(const std::string& run_dir) {
    nlohmann::json echoed = read_json(run_dir + "/resolved_config.json");
    RunConfig rc = RunConfig::from_json(echoed);
    std::string command = echoed.at("command").get<std::string>();
    SearchSpace space = rc.make_space();
    if (command == "probe") {
        auto records = read_run_log(space, run_dir + "/log.jsonl");
        auto result = TrialEvaluator::regroup(records);
        write_probe_files(run_dir, space, result, rc.seeds.size(), rc.svg, rc.objectives.fairness);
        return run_dir;
    }
    if (command == "optimize") {
        auto records = read_run_log(space, run_dir + "/log.jsonl");
        ObjectiveSpec axes = rc.objectives;
        if (!axes.fairness) axes.fairness = FairnessMetric::SpdAbs;
        OptimizeResult result;
        result.archive = ParetoArchive(rc.hyperband.max_budget);
        for (const auto& rec : records) {
            result.trials.push_back(rec);
            if (rec.request.budget_epochs == rc.hyperband.max_budget) {
                ArchiveEntry e;
                e.objectives = objective_vector(rec.metrics, rec.diverged, axes);
                e.config_hash = rec.request.config.hash();
                e.budget = rec.request.budget_epochs;
                e.trial_index = rec.trial_id;
                result.archive.update(e);
            }
        }
        write_archive_files(run_dir, "archive", space, axes, result, rc.svg);
        return run_dir;
    }
    throw ValidationError("report: unsupported command '" + command +
                          "' in resolved_config.json (probe, optimize)");
}

// Gen: write a benchmark stand-in CSV plus its schema.
inline std::string cmd_gen(const std::string& kind, size_t rows, uint64_t seed,
                           const std::string& out_csv) {
    csv::Table t = datagen::generate(kind, rows, seed);
    csv::write_file(out_csv, t);
    DatasetSchema schema = datagen::schema_for(kind);
    std::string schema_path = out_csv;
    size_t dot = schema_path.rfind('.');
    if (dot != std::string::npos) schema_path.resize(dot);
    schema_path += ".schema.json";
    write_json(schema_path, schema.to_json());
    return schema_path;
}

} // namespace fairhpo::commands
