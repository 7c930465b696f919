#pragma once

#include <algorithm>
#include <future>
#include <vector>

#include "fairhpo/evaluator.hpp"
#include "fairhpo/hyperband.hpp"
#include "fairhpo/pareto.hpp"
#include "fairhpo/scalarize.hpp"
#include "fairhpo/surrogate.hpp"

namespace fairhpo {

enum class SearchMode { Bayesian, RandomSearch };

struct OptimizeConfig {
    ObjectiveSpec search_objectives;   // scalarized during search
    ObjectiveSpec archive_objectives;  // axes of the Pareto archive
    ScalarizationConfig scalarization;
    HyperbandConfig hyperband;
    SearchMode mode = SearchMode::Bayesian;
    int trial_budget = 200;
    uint64_t seed = 0;
    std::optional<PipelineDescriptor> pipeline;
    int workers = 1;

    // Pinned internals of the proposal loop.
    int initial_design = 8;     // random configs before the first surrogate fit
    int n_candidates = 1000;    // acquisition samples per proposal
    int n_mutations = 10;       // one-field neighbors of the incumbent
    int random_interleave = 4;  // every 4th proposal is pure random

    void validate() const {
        hyperband.validate();
        scalarization.validate(search_objectives.arity());
        if (trial_budget < 1) throw ValidationError("optimize: trial_budget must be >= 1");
        if (workers < 1) throw ValidationError("optimize: workers must be >= 1");
    }
};

struct OptimizeResult {
    ParetoArchive archive{10};
    std::vector<TrialRecord> trials;
};

namespace detail {

struct HistoryPoint {
    std::vector<double> features; // encoded config + normalized budget
    std::vector<double> objectives;
    Configuration config;
    size_t trial_id = 0;
};

class Proposer {
public:
    Proposer(const SearchSpace& space, const OptimizeConfig& cfg)
        : space_(space), cfg_(cfg),
          lambda_rng_(derive_seed(cfg.scalarization.weight_seed ^ cfg.seed, "parego-lambda")) {
        lambda_.assign(cfg_.search_objectives.arity(),
                       1.0 / static_cast<double>(cfg_.search_objectives.arity()));
        if (cfg_.scalarization.strategy == ScalarizationStrategy::WeightedMean)
            lambda_ = cfg_.scalarization.weights;
    }

    const std::vector<double>& lambda() const { return lambda_; }

    Configuration propose(const std::vector<HistoryPoint>& history) {
        size_t k = proposal_count_++;
        if (cfg_.mode == SearchMode::RandomSearch)
            return sample(space_, derive_seed(cfg_.seed, "random-proposal", k));
        if (history.size() < static_cast<size_t>(cfg_.initial_design) ||
            (k + 1) % static_cast<size_t>(cfg_.random_interleave) == 0)
            return sample(space_, derive_seed(cfg_.seed, "random-proposal", k));

        // Fresh ParEGO lambda each iteration; the whole history is
        // rescalarized under it before the surrogate refit.
        if (cfg_.scalarization.strategy == ScalarizationStrategy::ParEGO)
            lambda_ = sample_simplex(lambda_rng_, cfg_.search_objectives.arity());
        std::vector<std::vector<double>> objs;
        objs.reserve(history.size());
        for (const auto& h : history) objs.push_back(h.objectives);
        NormalizationBounds bounds =
            NormalizationBounds::from_history(objs, cfg_.search_objectives.arity());

        std::vector<std::vector<double>> xs;
        std::vector<double> ys;
        xs.reserve(history.size());
        ys.reserve(history.size());
        double f_best = std::numeric_limits<double>::infinity();
        size_t best_idx = 0;
        for (size_t i = 0; i < history.size(); ++i) {
            xs.push_back(history[i].features);
            ys.push_back(scalarize(cfg_.scalarization, history[i].objectives, bounds, lambda_));
            if (ys.back() < f_best) {
                f_best = ys.back();
                best_idx = i;
            }
        }
        RandomForest rf;
        rf.fit(xs, ys, derive_seed(cfg_.seed, "rf-fit", k));

        Rng acq_rng(derive_seed(cfg_.seed, "acquisition", k));
        Configuration best_cfg = history[best_idx].config;
        double best_ei = -1.0;
        Configuration best_cand = best_cfg;
        auto consider = [&](const Configuration& cand) {
            std::vector<double> f = encode_for_surrogate(space_, cand);
            f.push_back(1.0); // EI is evaluated at the full budget
            double mean, var;
            rf.predict(f, mean, var);
            double ei = expected_improvement(mean, var, f_best);
            if (ei > best_ei) {
                best_ei = ei;
                best_cand = cand;
            }
        };
        for (int j = 0; j < cfg_.n_candidates; ++j)
            consider(sample(space_, derive_seed(cfg_.seed, "candidate", k * 1000003 + static_cast<uint64_t>(j))));
        for (int j = 0; j < cfg_.n_mutations; ++j)
            consider(mutate_one_field(space_, best_cfg, acq_rng));
        return best_cand;
    }

private:
    const SearchSpace& space_;
    const OptimizeConfig& cfg_;
    Rng lambda_rng_;
    std::vector<double> lambda_;
    size_t proposal_count_ = 0;
};

} // namespace detail

// Scalarized multi-objective Bayesian optimization with Hyperband
// intensification. One fixed seed per proposed configuration; promotions
// resume that configuration's checkpoint at the higher budget. Only
// full-budget trials enter the archive, with their raw objective vectors.
class Optimizer {
public:
    Optimizer(TrialEvaluator& evaluator, OptimizeConfig config)
        : eval_(evaluator), cfg_(std::move(config)), proposer_(evaluator.space(), cfg_) {
        cfg_.validate();
    }

    OptimizeResult run() {
        OptimizeResult result;
        result.archive = ParetoArchive(cfg_.hyperband.max_budget);
        if (cfg_.mode == SearchMode::RandomSearch) {
            run_random_search(result);
            return result;
        }
        auto brackets = hyperband_schedule(cfg_.hyperband);
        while (trials_done_ < cfg_.trial_budget) {
            for (const auto& bracket : brackets) {
                run_bracket(bracket, result);
                if (trials_done_ >= cfg_.trial_budget) break;
            }
        }
        return result;
    }

private:
    struct Alive {
        Configuration config;
        uint64_t trial_seed = 0;
        std::vector<double> objectives; // search objectives at the last rung
        size_t trial_id = 0;
    };

    void run_random_search(OptimizeResult& result) {
        while (trials_done_ < cfg_.trial_budget) {
            Configuration cfg = proposer_.propose(history_);
            uint64_t trial_seed = next_trial_seed();
            TrialRecord rec = submit(cfg, cfg_.hyperband.max_budget, trial_seed, result);
            (void)rec;
            if (trials_done_ >= cfg_.trial_budget) return;
        }
    }

    void run_bracket(const Bracket& bracket, OptimizeResult& result) {
        std::vector<Alive> alive;
        for (size_t r = 0; r < bracket.rungs.size(); ++r) {
            const Rung& rung = bracket.rungs[r];
            if (r == 0) {
                size_t want = static_cast<size_t>(rung.n_configs);
                if (cfg_.workers <= 1) {
                    for (size_t i = 0; i < want && trials_done_ < cfg_.trial_budget; ++i) {
                        Configuration cfg = proposer_.propose(history_);
                        uint64_t seed = next_trial_seed();
                        TrialRecord rec = submit(cfg, rung.budget, seed, result);
                        alive.push_back({cfg, seed,
                                         rec.objectives(cfg_.search_objectives), rec.trial_id});
                    }
                } else {
                    std::vector<std::pair<Configuration, uint64_t>> batch;
                    for (size_t i = 0; i < want && trials_done_ + batch.size() <
                                                        static_cast<size_t>(cfg_.trial_budget);
                         ++i)
                        batch.emplace_back(proposer_.propose(history_), next_trial_seed());
                    auto recs = submit_parallel(batch, rung.budget, result);
                    for (size_t i = 0; i < recs.size(); ++i)
                        alive.push_back({batch[i].first, batch[i].second,
                                         recs[i].objectives(cfg_.search_objectives),
                                         recs[i].trial_id});
                }
            } else {
                size_t keep = std::min<size_t>(static_cast<size_t>(rung.n_configs), alive.size());
                if (keep == 0) break;
                rank_alive(alive);
                alive.resize(keep);
                if (cfg_.workers <= 1) {
                    for (auto& a : alive) {
                        if (trials_done_ >= cfg_.trial_budget) return;
                        TrialRecord rec = submit(a.config, rung.budget, a.trial_seed, result);
                        a.objectives = rec.objectives(cfg_.search_objectives);
                        a.trial_id = rec.trial_id;
                    }
                } else {
                    std::vector<std::pair<Configuration, uint64_t>> batch;
                    for (auto& a : alive)
                        if (trials_done_ + batch.size() < static_cast<size_t>(cfg_.trial_budget))
                            batch.emplace_back(a.config, a.trial_seed);
                    auto recs = submit_parallel(batch, rung.budget, result);
                    for (size_t i = 0; i < recs.size(); ++i) {
                        alive[i].objectives = recs[i].objectives(cfg_.search_objectives);
                        alive[i].trial_id = recs[i].trial_id;
                    }
                    alive.resize(recs.size());
                }
            }
            if (trials_done_ >= cfg_.trial_budget && r + 1 < bracket.rungs.size()) return;
        }
    }

    // Promotion order: scalarized objective under the current lambda over
    // history-wide bounds, ties broken by earlier trial id.
    void rank_alive(std::vector<Alive>& alive) {
        std::vector<std::vector<double>> objs;
        for (const auto& h : history_) objs.push_back(h.objectives);
        NormalizationBounds bounds =
            NormalizationBounds::from_history(objs, cfg_.search_objectives.arity());
        std::stable_sort(alive.begin(), alive.end(), [&](const Alive& a, const Alive& b) {
            double sa = scalarize(cfg_.scalarization, a.objectives, bounds, proposer_.lambda());
            double sb = scalarize(cfg_.scalarization, b.objectives, bounds, proposer_.lambda());
            if (sa != sb) return sa < sb;
            return a.trial_id < b.trial_id;
        });
    }

    TrialRecord submit(const Configuration& cfg, int budget, uint64_t trial_seed,
                       OptimizeResult& result) {
        TrialRequest req;
        req.config = cfg;
        req.budget_epochs = budget;
        req.seed = trial_seed;
        req.objective_split = Split::Val;
        req.pipeline = cfg_.pipeline;
        req.with_test_metrics = budget == cfg_.hyperband.max_budget;
        TrialRecord rec = eval_.evaluate(req);
        ++trials_done_;
        absorb(rec, result);
        return rec;
    }

    std::vector<TrialRecord> submit_parallel(
        const std::vector<std::pair<Configuration, uint64_t>>& batch, int budget,
        OptimizeResult& result) {
        std::vector<TrialRecord> recs(batch.size());
        size_t next = 0;
        while (next < batch.size()) {
            size_t wave = std::min<size_t>(static_cast<size_t>(cfg_.workers),
                                           batch.size() - next);
            std::vector<std::future<TrialRecord>> futs;
            for (size_t i = 0; i < wave; ++i) {
                const auto& [cfg, seed] = batch[next + i];
                futs.push_back(std::async(std::launch::async, [this, cfg, seed, budget] {
                    TrialRequest req;
                    req.config = cfg;
                    req.budget_epochs = budget;
                    req.seed = seed;
                    req.objective_split = Split::Val;
                    req.pipeline = cfg_.pipeline;
                    req.with_test_metrics = budget == cfg_.hyperband.max_budget;
                    return eval_.evaluate(req);
                }));
            }
            for (size_t i = 0; i < wave; ++i) recs[next + i] = futs[i].get();
            next += wave;
        }
        for (auto& rec : recs) {
            ++trials_done_;
            absorb(rec, result);
        }
        return recs;
    }

    void absorb(const TrialRecord& rec, OptimizeResult& result) {
        detail::HistoryPoint h;
        h.features = encode_for_surrogate(eval_.space(), rec.request.config);
        double span = static_cast<double>(cfg_.hyperband.max_budget - cfg_.hyperband.min_budget);
        h.features.push_back(span > 0.0
                                 ? (rec.request.budget_epochs - cfg_.hyperband.min_budget) / span
                                 : 0.0);
        h.objectives = rec.objectives(cfg_.search_objectives);
        h.config = rec.request.config;
        h.trial_id = rec.trial_id;
        history_.push_back(std::move(h));
        if (rec.request.budget_epochs == cfg_.hyperband.max_budget) {
            ArchiveEntry e;
            e.objectives = objective_vector(rec.metrics, rec.diverged, cfg_.archive_objectives);
            e.config_hash = rec.request.config.hash();
            e.budget = rec.request.budget_epochs;
            e.trial_index = rec.trial_id;
            result.archive.update(e);
        }
        result.trials.push_back(rec);
    }

    uint64_t next_trial_seed() {
        return derive_seed(cfg_.seed, "trial-seed", trial_seed_counter_++);
    }

    TrialEvaluator& eval_;
    OptimizeConfig cfg_;
    detail::Proposer proposer_;
    std::vector<detail::HistoryPoint> history_;
    int trials_done_ = 0;
    uint64_t trial_seed_counter_ = 0;
};

inline OptimizeResult optimize(TrialEvaluator& evaluator, const OptimizeConfig& config) {
    Optimizer opt(evaluator, config);
    return opt.run();
}

} // namespace fairhpo
