#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "fairhpo/common.hpp"
#include "fairhpo/metrics.hpp"

namespace fairhpo {

enum class PerformanceMetric { BalancedError, StdError };

inline const char* performance_name(PerformanceMetric p) {
    return p == PerformanceMetric::BalancedError ? "balanced_error" : "std_error";
}

// The minimized objective vector: a performance error, optionally paired
// with an absolute fairness difference. Disparate impact is deliberately
// not selectable as an objective (ratio of conditional probabilities is
// numerically unstable on imbalanced data); it is reported only.
struct ObjectiveSpec {
    PerformanceMetric performance = PerformanceMetric::BalancedError;
    std::optional<FairnessMetric> fairness = FairnessMetric::SpdAbs;

    size_t arity() const { return fairness ? 2 : 1; }

    std::vector<std::string> names() const {
        std::vector<std::string> n{performance_name(performance)};
        if (fairness) n.push_back(fairness_name(*fairness));
        return n;
    }
};

// Undefined metrics and diverged trials enter the optimizer as worst-case
// 1.0 so the surrogate learns to avoid those regions.
inline std::vector<double> objective_vector(const MetricVector& m, bool diverged,
                                            const ObjectiveSpec& spec) {
    std::vector<double> v;
    if (diverged) {
        v.assign(spec.arity(), 1.0);
        return v;
    }
    if (spec.performance == PerformanceMetric::BalancedError)
        v.push_back(m.balanced_accuracy ? 1.0 - *m.balanced_accuracy : 1.0);
    else
        v.push_back(1.0 - m.accuracy);
    if (spec.fairness) {
        auto f = abs_fairness(m, *spec.fairness);
        v.push_back(f ? *f : 1.0);
    }
    return v;
}

struct NormalizationBounds {
    std::vector<double> lo, hi;

    static NormalizationBounds from_history(const std::vector<std::vector<double>>& objectives,
                                            size_t arity) {
        NormalizationBounds b;
        b.lo.assign(arity, std::numeric_limits<double>::infinity());
        b.hi.assign(arity, -std::numeric_limits<double>::infinity());
        for (const auto& o : objectives)
            for (size_t i = 0; i < arity; ++i) {
                b.lo[i] = std::min(b.lo[i], o[i]);
                b.hi[i] = std::max(b.hi[i], o[i]);
            }
        for (size_t i = 0; i < arity; ++i) {
            if (!std::isfinite(b.lo[i])) { b.lo[i] = 0.0; b.hi[i] = 1.0; }
            if (b.hi[i] - b.lo[i] < 1e-12) b.hi[i] = b.lo[i] + 1e-12; // degenerate: widen
        }
        return b;
    }

    std::vector<double> normalize(const std::vector<double>& o) const {
        std::vector<double> f(o.size());
        for (size_t i = 0; i < o.size(); ++i) f[i] = (o[i] - lo[i]) / (hi[i] - lo[i]);
        return f;
    }
};

enum class ScalarizationStrategy { WeightedMean, ParEGO };

struct ScalarizationConfig {
    ScalarizationStrategy strategy = ScalarizationStrategy::ParEGO;
    std::vector<double> weights; // weighted-mean; must be nonnegative, sum 1
    double rho = 0.05;           // ParEGO augmentation
    uint64_t weight_seed = 0;    // ParEGO lambda stream

    void validate(size_t arity) const {
        if (strategy == ScalarizationStrategy::WeightedMean) {
            if (weights.size() != arity)
                throw ValidationError("scalarization: weights arity mismatch");
            double sum = 0.0;
            for (double w : weights) {
                if (w < 0.0) throw ValidationError("scalarization: negative weight");
                sum += w;
            }
            if (std::fabs(sum - 1.0) > 1e-9)
                throw ValidationError("scalarization: weights must sum to 1");
        } else if (rho <= 0.0) {
            throw ValidationError("scalarization: rho must be positive");
        }
    }
};

// Uniform sample from the probability simplex.
inline std::vector<double> sample_simplex(Rng& rng, size_t k) {
    std::vector<double> lam(k);
    double sum = 0.0;
    for (size_t i = 0; i < k; ++i) {
        double u = rng.uniform();
        while (u <= 0.0) u = rng.uniform();
        lam[i] = -std::log(u);
        sum += lam[i];
    }
    for (double& l : lam) l /= sum;
    return lam;
}

// Augmented Tchebycheff (ParEGO): max_i(l_i * f_i) + rho * sum_i(l_i * f_i),
// weighted mean: sum_i(w_i * f_i) -- both on min-max normalized objectives.
inline double scalarize(const ScalarizationConfig& cfg, const std::vector<double>& objectives,
                        const NormalizationBounds& bounds, const std::vector<double>& lambda) {
    std::vector<double> f = bounds.normalize(objectives);
    if (cfg.strategy == ScalarizationStrategy::WeightedMean) {
        double s = 0.0;
        for (size_t i = 0; i < f.size(); ++i) s += cfg.weights[i] * f[i];
        return s;
    }
    double mx = -std::numeric_limits<double>::infinity();
    double sum = 0.0;
    for (size_t i = 0; i < f.size(); ++i) {
        double t = lambda[i] * f[i];
        mx = std::max(mx, t);
        sum += t;
    }
    return mx + cfg.rho * sum;
}

} // namespace fairhpo
