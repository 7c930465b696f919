#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <json.hpp>

#include "fairhpo/common.hpp"
#include "fairhpo/dataset.hpp"

namespace fairhpo {

namespace detail {

// Empirical CDF / quantile pair over one group's train values. Tied values
// collapse to one node at the midpoint of their ranks; between nodes both
// maps interpolate linearly, outside they clamp. F and Q are exact inverses
// on the observed values.
struct QuantileMap {
    std::vector<double> values;    // unique, ascending
    std::vector<double> positions; // matching plotting positions in (0,1)

    static QuantileMap fit(std::vector<double> sorted) {
        QuantileMap q;
        const size_t m = sorted.size();
        size_t i = 0;
        while (i < m) {
            size_t j = i;
            while (j + 1 < m && sorted[j + 1] == sorted[i]) ++j;
            // ranks i+1..j+1 (1-based), midpoint position
            double mid_rank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
            q.values.push_back(sorted[i]);
            q.positions.push_back((mid_rank - 0.5) / static_cast<double>(m));
            i = j + 1;
        }
        return q;
    }

    static double interp(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
        if (x <= xs.front()) return ys.front();
        if (x >= xs.back()) return ys.back();
        size_t hi = static_cast<size_t>(
            std::upper_bound(xs.begin(), xs.end(), x) - xs.begin());
        size_t lo = hi - 1;
        double t = (x - xs[lo]) / (xs[hi] - xs[lo]);
        return ys[lo] + t * (ys[hi] - ys[lo]);
    }

    double cdf(double x) const { return interp(values, positions, x); }
    double quantile(double u) const { return interp(positions, values, u); }
};

} // namespace detail

// A fitted pre-processing stage. Reweighing attaches train sample weights
// w(s,y) = P(s)P(y)/P(s,y); the Disparate Impact Remover maps each group's
// numeric feature distribution toward the cross-group median distribution,
// x -> (1-lambda)x + lambda*Q_target(F_group(x)), rank-preserving within
// groups. Categorical one-hot blocks pass through unchanged.
struct PipelineStage {
    enum class Kind { Reweigh, DirRepair };

    Kind kind = Kind::Reweigh;
    double repair_level = 1.0;
    bool fitted = false;

    // reweigh state: weight[group][label]
    double weight[2][2] = {{1.0, 1.0}, {1.0, 1.0}};

    // dir state, one entry per numeric feature spec
    struct FeatureRepair {
        size_t encoded_column = 0;
        detail::QuantileMap group[2]; // [unprivileged, privileged]
    };
    std::vector<FeatureRepair> repairs;
    size_t fitted_width = 0;

    std::string kind_name() const { return kind == Kind::Reweigh ? "reweigh" : "dir-repair"; }

    // Hash of the stage descriptor (not the fitted state): the fitted state
    // is a deterministic function of (descriptor, dataset).
    uint64_t descriptor_hash() const {
        uint64_t h = fnv1a64(kind_name());
        if (kind == Kind::DirRepair) {
            uint64_t bits;
            std::memcpy(&bits, &repair_level, sizeof(bits));
            h = fnv1a64(&bits, sizeof(bits), h);
        }
        return h;
    }

    nlohmann::json descriptor_json() const {
        nlohmann::json j{{"kind", kind_name()}};
        if (kind == Kind::DirRepair) j["repair_level"] = repair_level;
        return j;
    }
};

inline PipelineStage fit_reweigh(const Dataset& data) {
    PipelineStage st;
    st.kind = PipelineStage::Kind::Reweigh;
    double n = 0.0, n_s[2] = {0, 0}, n_y[2] = {0, 0}, n_sy[2][2] = {{0, 0}, {0, 0}};
    for (size_t i = 0; i < data.n_rows(); ++i) {
        if (data.split[i] != Split::Train) continue;
        int s = data.protected_group[i], y = data.labels[i];
        n += 1;
        n_s[s] += 1;
        n_y[y] += 1;
        n_sy[s][y] += 1;
    }
    for (int s = 0; s < 2; ++s)
        for (int y = 0; y < 2; ++y) {
            if (n_sy[s][y] == 0)
                throw ValidationError("reweigh: empty train cell (group=" + std::to_string(s) +
                                      ", label=" + std::to_string(y) + ")");
            st.weight[s][y] = (n_s[s] * n_y[y]) / (n * n_sy[s][y]);
        }
    st.fitted = true;
    st.fitted_width = data.width();
    return st;
}

inline PipelineStage fit_dir(const Dataset& data, double repair_level) {
    if (repair_level < 0.0 || repair_level > 1.0)
        throw ValidationError("dir: repair_level must be in [0,1]");
    PipelineStage st;
    st.kind = PipelineStage::Kind::DirRepair;
    st.repair_level = repair_level;
    st.fitted_width = data.width();
    for (size_t sidx = 0; sidx < data.specs.size(); ++sidx) {
        if (!data.specs[sidx].numeric) continue;
        size_t col = data.encoded_offset(sidx);
        std::vector<double> vals[2];
        for (size_t i = 0; i < data.n_rows(); ++i) {
            if (data.split[i] != Split::Train) continue;
            vals[data.protected_group[i]].push_back(
                data.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(col)));
        }
        for (int g = 0; g < 2; ++g) {
            if (vals[g].size() < 2)
                throw ValidationError("dir: group " + std::to_string(g) +
                                      " has fewer than 2 train rows");
            std::sort(vals[g].begin(), vals[g].end());
        }
        PipelineStage::FeatureRepair fr;
        fr.encoded_column = col;
        fr.group[0] = detail::QuantileMap::fit(std::move(vals[0]));
        fr.group[1] = detail::QuantileMap::fit(std::move(vals[1]));
        st.repairs.push_back(std::move(fr));
    }
    st.fitted = true;
    return st;
}

inline PipelineStage fit_stage(PipelineStage::Kind kind, double repair_level,
                               const Dataset& data) {
    return kind == PipelineStage::Kind::Reweigh ? fit_reweigh(data)
                                                : fit_dir(data, repair_level);
}

struct AppliedDataset {
    Dataset dataset;
    std::vector<double> train_weights; // empty unless reweighing
};

// Transform every split with the train-fitted state; labels and the
// protected vector are never touched.
inline AppliedDataset apply(const PipelineStage& stage, const Dataset& data) {
    if (!stage.fitted) throw ValidationError("pipeline stage applied before fitting");
    if (stage.fitted_width != data.width())
        throw ValidationError("pipeline stage fitted on width " +
                              std::to_string(stage.fitted_width) + ", dataset has " +
                              std::to_string(data.width()));
    AppliedDataset out;
    out.dataset = data;
    if (stage.kind == PipelineStage::Kind::Reweigh) {
        for (size_t i = 0; i < data.n_rows(); ++i)
            if (data.split[i] == Split::Train)
                out.train_weights.push_back(
                    stage.weight[data.protected_group[i]][data.labels[i]]);
        return out;
    }
    const double lam = stage.repair_level;
    for (const auto& fr : stage.repairs) {
        for (size_t i = 0; i < data.n_rows(); ++i) {
            int g = data.protected_group[i];
            double x = data.features(static_cast<Eigen::Index>(i),
                                     static_cast<Eigen::Index>(fr.encoded_column));
            double u = fr.group[g].cdf(x);
            double target = 0.5 * (fr.group[0].quantile(u) + fr.group[1].quantile(u));
            out.dataset.features(static_cast<Eigen::Index>(i),
                                 static_cast<Eigen::Index>(fr.encoded_column)) =
                (1.0 - lam) * x + lam * target;
        }
    }
    return out;
}

} // namespace fairhpo
