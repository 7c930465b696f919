#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>

#include <json.hpp>

#include "fairhpo/dataset.hpp"
#include "fairhpo/metrics.hpp"
#include "fairhpo/nn/model.hpp"
#include "fairhpo/preprocessing.hpp"
#include "fairhpo/scalarize.hpp"
#include "fairhpo/search_space.hpp"

namespace fairhpo {

struct PipelineDescriptor {
    PipelineStage::Kind kind = PipelineStage::Kind::DirRepair;
    double repair_level = 1.0;

    uint64_t hash() const {
        PipelineStage st;
        st.kind = kind;
        st.repair_level = repair_level;
        return st.descriptor_hash();
    }

    nlohmann::json to_json() const {
        PipelineStage st;
        st.kind = kind;
        st.repair_level = repair_level;
        return st.descriptor_json();
    }

    static PipelineDescriptor from_json(const nlohmann::json& j) {
        PipelineDescriptor d;
        std::string kind = j.at("kind").get<std::string>();
        if (kind == "reweigh") d.kind = PipelineStage::Kind::Reweigh;
        else if (kind == "dir-repair") d.kind = PipelineStage::Kind::DirRepair;
        else throw ValidationError("pipeline: unknown kind '" + kind + "'");
        if (j.contains("repair_level")) d.repair_level = j.at("repair_level").get<double>();
        return d;
    }
};

struct TrialRequest {
    Configuration config;
    int budget_epochs = 10; // fidelity range [1, 10]
    uint64_t seed = 0;
    Split objective_split = Split::Val;
    std::optional<PipelineDescriptor> pipeline;
    // Fill test-split metrics at evaluation time. Set by the optimizer for
    // full-budget trials so final reports never need a retained checkpoint;
    // the values are recorded but never consulted during search.
    bool with_test_metrics = false;

    uint64_t pipeline_hash() const { return pipeline ? pipeline->hash() : 0; }
};

struct TrialRecord {
    TrialRequest request;
    MetricVector metrics;       // on objective_split
    MetricVector train_metrics;
    MetricVector test_metrics;  // filled on demand for final reports
    bool has_test_metrics = false;
    double wall_time = 0.0;
    bool diverged = false;
    bool trivial = false; // single-class predictions on the objective split
    std::string checkpoint_key;
    size_t trial_id = 0;

    std::vector<double> objectives(const ObjectiveSpec& spec) const {
        return objective_vector(metrics, diverged, spec);
    }
};

namespace detail {
inline void metrics_to_json(nlohmann::json& j, const MetricVector& m) {
    j["accuracy"] = m.accuracy;
    auto put = [&](const char* k, const std::optional<double>& v) {
        if (v) j[k] = *v;
        else j[k] = nullptr;
    };
    put("balanced_accuracy", m.balanced_accuracy);
    put("statistical_parity_difference", m.statistical_parity_difference);
    put("disparate_impact", m.disparate_impact);
    put("average_odds_difference", m.average_odds_difference);
    put("equal_opportunity_difference", m.equal_opportunity_difference);
}

inline MetricVector metrics_from_json(const nlohmann::json& j) {
    MetricVector m;
    m.accuracy = j.at("accuracy").get<double>();
    auto get = [&](const char* k) -> std::optional<double> {
        if (!j.contains(k) || j.at(k).is_null()) return std::nullopt;
        return j.at(k).get<double>();
    };
    m.balanced_accuracy = get("balanced_accuracy");
    m.statistical_parity_difference = get("statistical_parity_difference");
    m.disparate_impact = get("disparate_impact");
    m.average_odds_difference = get("average_odds_difference");
    m.equal_opportunity_difference = get("equal_opportunity_difference");
    return m;
}
} // namespace detail

inline nlohmann::json trial_to_json(const SearchSpace& space, const TrialRecord& r) {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["trial_id"] = r.trial_id;
    j["config"] = config_to_json(space, r.request.config);
    j["config_hash"] = hex64(r.request.config.hash());
    j["budget"] = r.request.budget_epochs;
    j["seed"] = r.request.seed;
    j["objective_split"] = split_name(r.request.objective_split);
    if (r.request.pipeline) j["pipeline"] = r.request.pipeline->to_json();
    j["status"] = r.diverged ? "diverged" : "ok";
    j["trivial"] = r.trivial;
    j["wall_time"] = r.wall_time;
    j["checkpoint_key"] = r.checkpoint_key;
    detail::metrics_to_json(j["metrics"], r.metrics);
    detail::metrics_to_json(j["train_metrics"], r.train_metrics);
    if (r.has_test_metrics) detail::metrics_to_json(j["test_metrics"], r.test_metrics);
    return j;
}

inline TrialRecord trial_from_json(const SearchSpace& space, const nlohmann::json& j) {
    TrialRecord r;
    r.trial_id = j.at("trial_id").get<size_t>();
    r.request.config = config_from_json(space, j.at("config"));
    r.request.budget_epochs = j.at("budget").get<int>();
    r.request.seed = j.at("seed").get<uint64_t>();
    std::string split = j.at("objective_split").get<std::string>();
    r.request.objective_split = split == "test" ? Split::Test : Split::Val;
    if (j.contains("pipeline")) r.request.pipeline = PipelineDescriptor::from_json(j.at("pipeline"));
    r.diverged = j.at("status").get<std::string>() == "diverged";
    r.trivial = j.at("trivial").get<bool>();
    r.wall_time = j.at("wall_time").get<double>();
    r.checkpoint_key = j.at("checkpoint_key").get<std::string>();
    r.metrics = detail::metrics_from_json(j.at("metrics"));
    r.train_metrics = detail::metrics_from_json(j.at("train_metrics"));
    if (j.contains("test_metrics")) {
        r.test_metrics = detail::metrics_from_json(j.at("test_metrics"));
        r.has_test_metrics = true;
    }
    return r;
}

// Append-only trial log; one JSON object per line, optionally mirrored to a
// file. All evaluation workers feed the same log through a mutex.
class RunLog {
public:
    RunLog() = default;

    explicit RunLog(const std::string& path) {
        file_.open(path, std::ios::app);
        if (!file_) throw TrialError("run log: cannot open " + path);
    }

    size_t append(const SearchSpace& space, TrialRecord& record) {
        std::lock_guard<std::mutex> lock(mu_);
        record.trial_id = records_.size();
        records_.push_back(record);
        if (file_.is_open()) {
            file_ << trial_to_json(space, record).dump() << "\n";
            file_.flush();
        }
        return record.trial_id;
    }

    const std::vector<TrialRecord>& records() const { return records_; }
    size_t size() const { return records_.size(); }

private:
    std::mutex mu_;
    std::vector<TrialRecord> records_;
    std::ofstream file_;
};

inline std::vector<TrialRecord> read_run_log(const SearchSpace& space, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("run log: cannot open " + path);
    std::vector<TrialRecord> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        out.push_back(trial_from_json(space, nlohmann::json::parse(line)));
    }
    return out;
}

// Content-addressed checkpoint store keyed by (config hash, seed, pipeline
// hash, budget).
class CheckpointStore {
public:
    virtual ~CheckpointStore() = default;

    static std::string key(uint64_t config_hash, uint64_t seed, uint64_t pipeline_hash,
                           int budget) {
        return hex64(config_hash) + "-" + hex64(seed) + "-" + hex64(pipeline_hash) + "-b" +
               std::to_string(budget);
    }

    virtual void save(const std::string& key, const std::string& blob) = 0;
    virtual std::optional<std::string> load(const std::string& key) = 0;
    virtual void remove(const std::string& key) = 0;

    // Highest stored budget <= budget for this trial identity.
    std::optional<std::pair<int, std::string>> load_resumable(uint64_t config_hash, uint64_t seed,
                                                              uint64_t pipeline_hash, int budget) {
        for (int b = budget; b >= 1; --b) {
            auto blob = load(key(config_hash, seed, pipeline_hash, b));
            if (blob) return std::make_pair(b, std::move(*blob));
        }
        return std::nullopt;
    }

    // Checkpoints at lower budgets are superseded once a higher one lands;
    // dropping them keeps one blob per trial identity.
    void save_and_evict(uint64_t config_hash, uint64_t seed, uint64_t pipeline_hash, int budget,
                        const std::string& blob) {
        save(key(config_hash, seed, pipeline_hash, budget), blob);
        for (int b = 1; b < budget; ++b) remove(key(config_hash, seed, pipeline_hash, b));
    }
};

// Drops everything; for runs that never resume (single-budget probing).
class NullCheckpointStore : public CheckpointStore {
public:
    void save(const std::string&, const std::string&) override {}
    std::optional<std::string> load(const std::string&) override { return std::nullopt; }
    void remove(const std::string&) override {}
};

class MemoryCheckpointStore : public CheckpointStore {
public:
    void save(const std::string& key, const std::string& blob) override {
        std::lock_guard<std::mutex> lock(mu_);
        blobs_[key] = blob;
    }

    std::optional<std::string> load(const std::string& key) override {
        std::lock_guard<std::mutex> lock(mu_);
        auto it = blobs_.find(key);
        if (it == blobs_.end()) return std::nullopt;
        return it->second;
    }

    void remove(const std::string& key) override {
        std::lock_guard<std::mutex> lock(mu_);
        blobs_.erase(key);
    }

private:
    std::mutex mu_;
    std::map<std::string, std::string> blobs_;
};

class DiskCheckpointStore : public CheckpointStore {
public:
    explicit DiskCheckpointStore(std::string dir) : dir_(std::move(dir)) {
        std::filesystem::create_directories(dir_);
    }

    void save(const std::string& key, const std::string& blob) override {
        std::lock_guard<std::mutex> lock(mu_);
        std::string tmp = path(key) + ".tmp";
        {
            std::ofstream out(tmp, std::ios::binary);
            out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
            if (!out) throw TrialError("checkpoint store: write failed: " + tmp);
        }
        std::filesystem::rename(tmp, path(key));
    }

    std::optional<std::string> load(const std::string& key) override {
        std::lock_guard<std::mutex> lock(mu_);
        std::ifstream in(path(key), std::ios::binary);
        if (!in) return std::nullopt;
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }

    void remove(const std::string& key) override {
        std::lock_guard<std::mutex> lock(mu_);
        std::error_code ec;
        std::filesystem::remove(path(key), ec);
    }

private:
    std::string path(const std::string& key) const { return dir_ + "/" + key + ".ckpt"; }

    std::mutex mu_;
    std::string dir_;
};

// Turns (configuration, budget, seed) requests into metric vectors:
// optional pre-processing stage, budgeted training with checkpoint resume,
// evaluation-mode metrics on the objective split.
class TrialEvaluator {
public:
    TrialEvaluator(const SearchSpace& space, const Dataset& dataset,
                   std::shared_ptr<CheckpointStore> store = nullptr,
                   std::shared_ptr<RunLog> log = nullptr)
        : space_(space), dataset_(dataset),
          store_(store ? std::move(store) : std::make_shared<MemoryCheckpointStore>()),
          log_(log ? std::move(log) : std::make_shared<RunLog>()) {
        if (dataset_.rows_of(Split::Val).empty())
            throw ValidationError("evaluator: dataset has no validation split");
    }

    const SearchSpace& space() const { return space_; }
    const Dataset& dataset() const { return dataset_; }
    RunLog& log() { return *log_; }

    TrialRecord evaluate(const TrialRequest& request) {
        if (request.budget_epochs < 1 || request.budget_epochs > 10)
            throw ValidationError("evaluate: budget outside fidelity range [1, 10]");
        space_.validate(request.config);
        auto t0 = std::chrono::steady_clock::now();

        const AppliedDataset& applied = applied_dataset(request.pipeline);
        const Dataset& data = applied.dataset;

        uint64_t chash = request.config.hash();
        uint64_t phash = request.pipeline_hash();
        nn::TrainSettings settings = nn::train_settings_from(space_, request.config, request.seed);
        settings.sample_weights = applied.train_weights;

        std::optional<nn::Model> model;
        int start_epochs = 0;
        auto resume = store_->load_resumable(chash, request.seed, phash, request.budget_epochs);
        if (resume) {
            try {
                model.emplace(nn::Model::deserialize(space_, resume->second));
                start_epochs = resume->first;
            } catch (const TrialError& e) {
                std::cerr << "warning: corrupt checkpoint, retraining from scratch ("
                          << e.what() << ")\n";
                model.reset();
                start_epochs = 0;
            }
        }
        if (!model)
            model.emplace(space_, request.config, static_cast<int>(data.width()), request.seed);

        TrialRecord rec;
        rec.request = request;
        nn::TrainStatus status = nn::TrainStatus::Ok;
        if (request.budget_epochs > start_epochs)
            status = model->train_epochs(data, settings, request.budget_epochs - start_epochs);

        rec.checkpoint_key =
            CheckpointStore::key(chash, request.seed, phash, request.budget_epochs);
        if (status == nn::TrainStatus::Diverged) {
            rec.diverged = true;
        } else {
            store_->save_and_evict(chash, request.seed, phash, request.budget_epochs,
                                   model->serialize());
            rec.metrics = split_metrics(*model, data, request.objective_split, &rec.trivial);
            rec.train_metrics = split_metrics(*model, data, Split::Train, nullptr);
            if (request.with_test_metrics) {
                rec.test_metrics = split_metrics(*model, data, Split::Test, nullptr);
                rec.has_test_metrics = true;
            }
        }
        rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        log_->append(space_, rec);
        return rec;
    }

    // Test-split metrics for a finished trial (final reports only; never
    // consulted during search).
    MetricVector test_metrics(const TrialRecord& rec) {
        auto blob = store_->load(rec.checkpoint_key);
        if (!blob) throw TrialError("test_metrics: missing checkpoint " + rec.checkpoint_key);
        nn::Model model = nn::Model::deserialize(space_, *blob);
        const AppliedDataset& applied = applied_dataset(rec.request.pipeline);
        return split_metrics(model, applied.dataset, Split::Test, nullptr);
    }

    struct ProbeSummary {
        Configuration config;
        double mean_accuracy = 0.0;
        double mean_balanced_accuracy = 0.0;
        double mean_spd_abs = 0.0;
        double mean_aod_abs = 0.0;
        double mean_eod_abs = 0.0;
        std::optional<double> mean_disparate_impact;
        double trivial_fraction = 0.0;
        int n_diverged = 0;
        bool trivial = false; // at least half of the seeds collapse to one class
    };

    struct ProbeResult {
        std::vector<TrialRecord> records;    // n_configs * n_seeds, config-major
        std::vector<ProbeSummary> summaries; // per config, seed-averaged
        double trivial_rate = 0.0;           // fraction of trivial configs
    };

    // Seed-averaged summary of one configuration's trials. Diverged trials
    // contribute worst-case values, matching their objective semantics.
    static ProbeSummary summarize_config(const Configuration& cfg,
                                         const std::vector<const TrialRecord*>& recs) {
        ProbeSummary sum;
        sum.config = cfg;
        double di_total = 0.0;
        int di_count = 0;
        int n_trivial = 0;
        const double k = 1.0 / static_cast<double>(recs.size());
        for (const TrialRecord* rec : recs) {
            if (rec->diverged) {
                ++sum.n_diverged;
                sum.mean_spd_abs += k;
                sum.mean_aod_abs += k;
                sum.mean_eod_abs += k;
                continue;
            }
            sum.mean_accuracy += k * rec->metrics.accuracy;
            if (rec->metrics.balanced_accuracy)
                sum.mean_balanced_accuracy += k * *rec->metrics.balanced_accuracy;
            auto add = [&](FairnessMetric f, double& acc) {
                auto v = abs_fairness(rec->metrics, f);
                acc += k * (v ? *v : 1.0);
            };
            add(FairnessMetric::SpdAbs, sum.mean_spd_abs);
            add(FairnessMetric::AodAbs, sum.mean_aod_abs);
            add(FairnessMetric::EodAbs, sum.mean_eod_abs);
            if (rec->metrics.disparate_impact) {
                di_total += *rec->metrics.disparate_impact;
                ++di_count;
            }
            if (rec->trivial) ++n_trivial;
        }
        if (di_count > 0) sum.mean_disparate_impact = di_total / di_count;
        sum.trivial_fraction = static_cast<double>(n_trivial) / static_cast<double>(recs.size());
        sum.trivial = 2 * n_trivial >= static_cast<int>(recs.size());
        return sum;
    }

    // Regroup a flat record list (e.g. re-read from a run log) by
    // configuration, in order of first appearance.
    static ProbeResult regroup(const std::vector<TrialRecord>& records) {
        ProbeResult result;
        result.records = records;
        std::vector<uint64_t> order;
        std::map<uint64_t, std::vector<const TrialRecord*>> groups;
        std::map<uint64_t, Configuration> configs;
        for (const auto& r : result.records) {
            uint64_t h = r.request.config.hash();
            if (!groups.count(h)) {
                order.push_back(h);
                configs.emplace(h, r.request.config);
            }
            groups[h].push_back(&r);
        }
        size_t n_trivial = 0;
        for (uint64_t h : order) {
            result.summaries.push_back(summarize_config(configs.at(h), groups.at(h)));
            if (result.summaries.back().trivial) ++n_trivial;
        }
        result.trivial_rate =
            static_cast<double>(n_trivial) / static_cast<double>(result.summaries.size());
        return result;
    }

    // Random subset of the space, each configuration trained to full budget
    // once per seed. Workers parallelize across configurations; the result
    // order is config-major either way.
    ProbeResult probe(size_t n_configs, const std::vector<uint64_t>& seeds,
                      uint64_t sample_seed = 0, int budget = 10,
                      const std::optional<PipelineDescriptor>& pipeline = std::nullopt,
                      int workers = 1) {
        if (n_configs < 1) throw ValidationError("probe: n_configs must be >= 1");
        if (seeds.empty()) throw ValidationError("probe: seeds must be nonempty");
        std::vector<Configuration> configs;
        for (size_t c = 0; c < n_configs; ++c)
            configs.push_back(sample(space_, derive_seed(sample_seed, "probe-config", c)));
        auto run_config = [&](const Configuration& cfg) {
            std::vector<TrialRecord> recs;
            for (uint64_t seed : seeds) {
                TrialRequest req;
                req.config = cfg;
                req.budget_epochs = budget;
                req.seed = seed;
                req.pipeline = pipeline;
                recs.push_back(evaluate(req));
            }
            return recs;
        };
        ProbeResult result;
        size_t n_trivial = 0;
        std::vector<std::vector<TrialRecord>> per_config(n_configs);
        if (workers <= 1) {
            for (size_t c = 0; c < n_configs; ++c) per_config[c] = run_config(configs[c]);
        } else {
            size_t next = 0;
            while (next < n_configs) {
                size_t wave = std::min<size_t>(static_cast<size_t>(workers), n_configs - next);
                std::vector<std::future<std::vector<TrialRecord>>> futs;
                for (size_t i = 0; i < wave; ++i)
                    futs.push_back(std::async(std::launch::async, run_config,
                                              std::cref(configs[next + i])));
                for (size_t i = 0; i < wave; ++i) per_config[next + i] = futs[i].get();
                next += wave;
            }
        }
        for (size_t c = 0; c < n_configs; ++c) {
            std::vector<const TrialRecord*> ptrs;
            for (const auto& r : per_config[c]) ptrs.push_back(&r);
            result.summaries.push_back(summarize_config(configs[c], ptrs));
            if (result.summaries.back().trivial) ++n_trivial;
            for (auto& r : per_config[c]) result.records.push_back(std::move(r));
        }
        result.trivial_rate = static_cast<double>(n_trivial) / static_cast<double>(n_configs);
        return result;
    }

private:
    MetricVector split_metrics(nn::Model& model, const Dataset& data, Split split, bool* trivial) {
        Matrix x = data.features_of(split);
        std::vector<int> preds = model.predict(x);
        if (trivial) {
            bool all_same = true;
            for (size_t i = 1; i < preds.size(); ++i)
                if (preds[i] != preds[0]) { all_same = false; break; }
            *trivial = all_same;
        }
        return fairhpo::evaluate(preds, data.labels_of(split), data.protected_of(split));
    }

    const AppliedDataset& applied_dataset(const std::optional<PipelineDescriptor>& pipeline) {
        std::lock_guard<std::mutex> lock(pipeline_mu_);
        uint64_t h = pipeline ? pipeline->hash() : 0;
        auto it = pipeline_cache_.find(h);
        if (it != pipeline_cache_.end()) return *it->second;
        auto applied = std::make_unique<AppliedDataset>();
        if (!pipeline) {
            applied->dataset = dataset_;
        } else {
            PipelineStage stage = fit_stage(pipeline->kind, pipeline->repair_level, dataset_);
            *applied = apply(stage, dataset_);
        }
        auto [pos, _] = pipeline_cache_.emplace(h, std::move(applied));
        return *pos->second;
    }

    SearchSpace space_;
    Dataset dataset_;
    std::shared_ptr<CheckpointStore> store_;
    std::shared_ptr<RunLog> log_;
    std::mutex pipeline_mu_;
    std::map<uint64_t, std::unique_ptr<AppliedDataset>> pipeline_cache_;
};

} // namespace fairhpo
