#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fairhpo/common.hpp"
#include "fairhpo/dataset.hpp"
#include "fairhpo/evaluator.hpp"
#include "fairhpo/hyperband.hpp"
#include "fairhpo/scalarize.hpp"
#include "fairhpo/search_space.hpp"

namespace fairhpo {

// Everything a run needs, validated before any training starts. One root
// seed fans out to every component through stable hashing.
struct RunConfig {
    std::string csv_path;
    std::string schema_path;
    SplitFractions fractions;
    uint64_t split_seed = 0;
    bool include_protected = true;

    Family family = Family::ResNet;
    ObjectiveSpec objectives;
    ScalarizationConfig scalarization;
    HyperbandConfig hyperband;
    int trial_budget = 200;
    uint64_t seed = 0;
    std::vector<uint64_t> seeds{0, 1, 2, 3, 4, 5}; // probe / compare seeds
    size_t n_configs = 100;                        // probe sample size
    std::optional<PipelineDescriptor> pipeline;
    nlohmann::json space_overrides; // continuous range re-pins
    std::string out_dir = "runs";
    int workers = 1;
    bool svg = false;

    static PerformanceMetric parse_performance(const std::string& s) {
        if (s == "balanced_error") return PerformanceMetric::BalancedError;
        if (s == "std_error") return PerformanceMetric::StdError;
        throw ValidationError("run config: unknown performance objective '" + s + "'");
    }

    static FairnessMetric parse_fairness(const std::string& s) {
        if (s == "spd_abs") return FairnessMetric::SpdAbs;
        if (s == "aod_abs") return FairnessMetric::AodAbs;
        if (s == "eod_abs") return FairnessMetric::EodAbs;
        if (s == "disparate_impact")
            throw ValidationError(
                "run config: disparate impact is not selectable as an objective "
                "(numerically unstable ratio); choose spd_abs, aod_abs or eod_abs");
        throw ValidationError("run config: unknown fairness objective '" + s + "'");
    }

    static RunConfig from_json(const nlohmann::json& j) {
        RunConfig c;
        try {
            const auto& ds = j.at("dataset");
            c.csv_path = ds.at("csv").get<std::string>();
            c.schema_path = ds.at("schema").get<std::string>();
            if (ds.contains("fractions")) {
                auto f = ds.at("fractions").get<std::vector<double>>();
                if (f.size() != 3) throw ValidationError("run config: fractions must have 3 entries");
                c.fractions = {f[0], f[1], f[2]};
            }
            if (ds.contains("split_seed")) c.split_seed = ds.at("split_seed").get<uint64_t>();
            if (ds.contains("include_protected"))
                c.include_protected = ds.at("include_protected").get<bool>();

            c.family = parse_family(j.at("family").get<std::string>());
            if (j.contains("objectives")) {
                const auto& o = j.at("objectives");
                if (o.contains("performance"))
                    c.objectives.performance = parse_performance(o.at("performance").get<std::string>());
                if (o.contains("fairness")) {
                    if (o.at("fairness").is_null()) c.objectives.fairness = std::nullopt;
                    else c.objectives.fairness = parse_fairness(o.at("fairness").get<std::string>());
                }
            }
            if (j.contains("scalarization")) {
                const auto& s = j.at("scalarization");
                std::string strat = s.value("strategy", "parego");
                if (strat == "parego") c.scalarization.strategy = ScalarizationStrategy::ParEGO;
                else if (strat == "weighted-mean")
                    c.scalarization.strategy = ScalarizationStrategy::WeightedMean;
                else throw ValidationError("run config: unknown scalarization '" + strat + "'");
                if (s.contains("rho")) c.scalarization.rho = s.at("rho").get<double>();
                if (s.contains("weights"))
                    c.scalarization.weights = s.at("weights").get<std::vector<double>>();
                if (s.contains("weight_seed"))
                    c.scalarization.weight_seed = s.at("weight_seed").get<uint64_t>();
            }
            if (c.scalarization.strategy == ScalarizationStrategy::WeightedMean &&
                c.scalarization.weights.empty())
                c.scalarization.weights.assign(c.objectives.arity(),
                                               1.0 / static_cast<double>(c.objectives.arity()));
            if (j.contains("hyperband")) {
                const auto& h = j.at("hyperband");
                c.hyperband.min_budget = h.value("min_budget", 1);
                c.hyperband.max_budget = h.value("max_budget", 10);
                c.hyperband.eta = h.value("eta", 3);
            }
            if (j.contains("trial_budget")) c.trial_budget = j.at("trial_budget").get<int>();
            if (j.contains("seed")) c.seed = j.at("seed").get<uint64_t>();
            if (j.contains("seeds")) c.seeds = j.at("seeds").get<std::vector<uint64_t>>();
            if (j.contains("n_configs")) c.n_configs = j.at("n_configs").get<size_t>();
            if (j.contains("pipeline") && !j.at("pipeline").is_null())
                c.pipeline = PipelineDescriptor::from_json(j.at("pipeline"));
            if (j.contains("space_overrides")) c.space_overrides = j.at("space_overrides");
            if (j.contains("out_dir")) c.out_dir = j.at("out_dir").get<std::string>();
            if (j.contains("workers")) c.workers = j.at("workers").get<int>();
            if (j.contains("svg")) c.svg = j.at("svg").get<bool>();
        } catch (const nlohmann::json::exception& e) {
            throw ValidationError(std::string("run config: malformed json: ") + e.what());
        }
        return c;
    }

    static RunConfig load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ValidationError("run config: cannot open " + path);
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw ValidationError("run config: parse error in " + path + ": " + e.what());
        }
        return from_json(j);
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["dataset"] = {{"csv", csv_path},
                        {"schema", schema_path},
                        {"fractions", {fractions.train, fractions.val, fractions.test}},
                        {"split_seed", split_seed},
                        {"include_protected", include_protected}};
        j["family"] = family_name(family);
        j["objectives"]["performance"] = performance_name(objectives.performance);
        if (objectives.fairness) j["objectives"]["fairness"] = fairness_name(*objectives.fairness);
        else j["objectives"]["fairness"] = nullptr;
        j["scalarization"]["strategy"] =
            scalarization.strategy == ScalarizationStrategy::ParEGO ? "parego" : "weighted-mean";
        j["scalarization"]["rho"] = scalarization.rho;
        if (!scalarization.weights.empty()) j["scalarization"]["weights"] = scalarization.weights;
        j["scalarization"]["weight_seed"] = scalarization.weight_seed;
        j["hyperband"] = {{"min_budget", hyperband.min_budget},
                          {"max_budget", hyperband.max_budget},
                          {"eta", hyperband.eta}};
        j["trial_budget"] = trial_budget;
        j["seed"] = seed;
        j["seeds"] = seeds;
        j["n_configs"] = n_configs;
        if (pipeline) j["pipeline"] = pipeline->to_json();
        else j["pipeline"] = nullptr;
        if (!space_overrides.is_null()) j["space_overrides"] = space_overrides;
        j["out_dir"] = out_dir;
        j["workers"] = workers;
        j["svg"] = svg;
        return j;
    }

    // Everything checkable without touching the data.
    void validate() const {
        namespace fs = std::filesystem;
        if (!fs::exists(csv_path)) throw ValidationError("run config: missing csv: " + csv_path);
        if (!fs::exists(schema_path))
            throw ValidationError("run config: missing schema: " + schema_path);
        fractions.validate();
        hyperband.validate();
        scalarization.validate(objectives.arity());
        if (trial_budget < 1) throw ValidationError("run config: trial_budget must be >= 1");
        if (n_configs < 1) throw ValidationError("run config: n_configs must be >= 1");
        if (seeds.empty()) throw ValidationError("run config: seeds must be nonempty");
        if (workers < 1) throw ValidationError("run config: workers must be >= 1");
        if (pipeline && (pipeline->repair_level < 0.0 || pipeline->repair_level > 1.0))
            throw ValidationError("run config: repair_level must be in [0,1]");
    }

    SearchSpace make_space() const {
        SearchSpace s = space(family);
        if (!space_overrides.is_null()) apply_space_overrides(s, space_overrides);
        return s;
    }

    Dataset load_dataset() const {
        DatasetSchema schema = DatasetSchema::load(schema_path);
        LoadOptions opt;
        opt.fractions = fractions;
        opt.split_seed = split_seed;
        opt.include_protected_in_features = include_protected;
        return load_csv(csv_path, schema, opt);
    }
};

} // namespace fairhpo
