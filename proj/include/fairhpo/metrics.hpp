#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "fairhpo/common.hpp"

namespace fairhpo {

// Confusion counts split by protected group. protected == 1 marks the
// privileged group, label/prediction == 1 the favorable outcome.
struct GroupCounts {
    int64_t tp = 0, fp = 0, tn = 0, fn = 0;
    int64_t total() const { return tp + fp + tn + fn; }
    int64_t positives() const { return tp + fn; }
    int64_t negatives() const { return fp + tn; }
    int64_t predicted_positive() const { return tp + fp; }
};

struct GroupConfusion {
    GroupCounts privileged;
    GroupCounts unprivileged;
    int64_t n() const { return privileged.total() + unprivileged.total(); }
};

// All metrics of the evaluation protocol. Fairness signs follow the
// unprivileged-minus-privileged convention: negative SPD/AOD/EOD means the
// unprivileged group is disadvantaged. Optimization consumes the absolute
// values (see abs_fairness). Metrics whose denominators vanish are left
// unset instead of silently reporting 0.
struct MetricVector {
    double accuracy = 0.0;
    std::optional<double> balanced_accuracy;
    std::optional<double> statistical_parity_difference;
    std::optional<double> disparate_impact;
    std::optional<double> average_odds_difference;
    std::optional<double> equal_opportunity_difference;
};

inline GroupConfusion confusion(const std::vector<int>& predictions,
                                const std::vector<int>& labels,
                                const std::vector<int>& protected_group) {
    if (predictions.size() != labels.size() || labels.size() != protected_group.size())
        throw ValidationError("confusion: input length mismatch");
    if (predictions.empty()) throw ValidationError("confusion: empty inputs");
    GroupConfusion c;
    bool saw_priv = false, saw_unpriv = false;
    for (size_t i = 0; i < predictions.size(); ++i) {
        GroupCounts& g = protected_group[i] ? c.privileged : c.unprivileged;
        (protected_group[i] ? saw_priv : saw_unpriv) = true;
        if (labels[i]) {
            if (predictions[i]) ++g.tp; else ++g.fn;
        } else {
            if (predictions[i]) ++g.fp; else ++g.tn;
        }
    }
    if (!saw_priv) throw ValidationError("confusion: privileged group absent");
    if (!saw_unpriv) throw ValidationError("confusion: unprivileged group absent");
    return c;
}

namespace detail {
inline std::optional<double> rate(int64_t num, int64_t den) {
    if (den == 0) return std::nullopt;
    return static_cast<double>(num) / static_cast<double>(den);
}
} // namespace detail

inline MetricVector evaluate(const GroupConfusion& c) {
    const GroupCounts& p = c.privileged;
    const GroupCounts& u = c.unprivileged;
    MetricVector m;
    int64_t n = c.n();
    m.accuracy = static_cast<double>(p.tp + p.tn + u.tp + u.tn) / static_cast<double>(n);

    auto tpr_pooled = detail::rate(p.tp + u.tp, p.positives() + u.positives());
    auto tnr_pooled = detail::rate(p.tn + u.tn, p.negatives() + u.negatives());
    if (tpr_pooled && tnr_pooled) m.balanced_accuracy = 0.5 * (*tpr_pooled + *tnr_pooled);

    auto sel_p = detail::rate(p.predicted_positive(), p.total());
    auto sel_u = detail::rate(u.predicted_positive(), u.total());
    if (sel_p && sel_u) {
        m.statistical_parity_difference = *sel_u - *sel_p;
        // Ratio of selection rates is numerically unstable near zero; flag
        // it undefined rather than returning inf when the privileged rate
        // vanishes.
        if (*sel_p > 0.0) m.disparate_impact = *sel_u / *sel_p;
    }

    auto tpr_p = detail::rate(p.tp, p.positives());
    auto tpr_u = detail::rate(u.tp, u.positives());
    auto fpr_p = detail::rate(p.fp, p.negatives());
    auto fpr_u = detail::rate(u.fp, u.negatives());
    if (tpr_p && tpr_u) m.equal_opportunity_difference = *tpr_u - *tpr_p;
    if (tpr_p && tpr_u && fpr_p && fpr_u)
        m.average_odds_difference = 0.5 * ((*fpr_u - *fpr_p) + (*tpr_u - *tpr_p));
    return m;
}

inline MetricVector evaluate(const std::vector<int>& predictions,
                             const std::vector<int>& labels,
                             const std::vector<int>& protected_group) {
    return evaluate(confusion(predictions, labels, protected_group));
}

enum class FairnessMetric { SpdAbs, AodAbs, EodAbs };

inline const char* fairness_name(FairnessMetric f) {
    switch (f) {
        case FairnessMetric::SpdAbs: return "spd_abs";
        case FairnessMetric::AodAbs: return "aod_abs";
        case FairnessMetric::EodAbs: return "eod_abs";
    }
    return "?";
}

// |metric| as consumed by the optimizer; unset stays unset.
inline std::optional<double> abs_fairness(const MetricVector& m, FairnessMetric f) {
    std::optional<double> v;
    switch (f) {
        case FairnessMetric::SpdAbs: v = m.statistical_parity_difference; break;
        case FairnessMetric::AodAbs: v = m.average_odds_difference; break;
        case FairnessMetric::EodAbs: v = m.equal_opportunity_difference; break;
    }
    if (v) return std::fabs(*v);
    return std::nullopt;
}

} // namespace fairhpo
