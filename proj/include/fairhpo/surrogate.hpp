#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "fairhpo/common.hpp"

namespace fairhpo {

// Random-forest regressor over encoded configurations: 50 trees, bootstrap
// resampling, MSE splits over a random 5/6 feature subset per node, leaves
// of at least 3 samples. Uncertainty is the empirical variance of the
// per-tree predictions.
class RandomForest {
public:
    struct Options {
        int n_trees = 50;
        int min_leaf = 3;
        double feature_fraction = 5.0 / 6.0;
    };

    RandomForest() = default;
    explicit RandomForest(Options opt) : opt_(opt) {}

    void fit(const std::vector<std::vector<double>>& x, const std::vector<double>& y,
             uint64_t seed) {
        if (x.size() != y.size() || x.empty())
            throw ValidationError("random forest: bad training data");
        dim_ = x.front().size();
        trees_.assign(static_cast<size_t>(opt_.n_trees), Tree{});
        for (size_t t = 0; t < trees_.size(); ++t) {
            Rng rng(derive_seed(seed, "rf-tree", t));
            std::vector<size_t> rows(x.size());
            for (size_t i = 0; i < rows.size(); ++i) rows[i] = rng.index(x.size());
            build(trees_[t], x, y, rows, rng);
        }
    }

    bool fitted() const { return !trees_.empty(); }

    void predict(const std::vector<double>& x, double& mean, double& var) const {
        double sum = 0.0, sq = 0.0;
        for (const auto& t : trees_) {
            double p = t.predict(x);
            sum += p;
            sq += p * p;
        }
        const double n = static_cast<double>(trees_.size());
        mean = sum / n;
        var = std::max(0.0, sq / n - mean * mean);
    }

private:
    struct Node {
        int feature = -1; // -1: leaf
        double threshold = 0.0;
        double value = 0.0;
        int left = -1, right = -1;
    };

    struct Tree {
        std::vector<Node> nodes;

        double predict(const std::vector<double>& x) const {
            int i = 0;
            while (nodes[static_cast<size_t>(i)].feature >= 0) {
                const Node& n = nodes[static_cast<size_t>(i)];
                i = x[static_cast<size_t>(n.feature)] <= n.threshold ? n.left : n.right;
            }
            return nodes[static_cast<size_t>(i)].value;
        }
    };

    void build(Tree& tree, const std::vector<std::vector<double>>& x,
               const std::vector<double>& y, std::vector<size_t>& rows, Rng& rng) {
        tree.nodes.clear();
        grow(tree, x, y, rows, 0, rows.size(), rng);
    }

    // Grows the subtree over rows[lo, hi); returns its node index.
    int grow(Tree& tree, const std::vector<std::vector<double>>& x,
             const std::vector<double>& y, std::vector<size_t>& rows, size_t lo, size_t hi,
             Rng& rng) {
        int idx = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        const size_t n = hi - lo;
        double sum = 0.0, sq = 0.0;
        for (size_t i = lo; i < hi; ++i) {
            sum += y[rows[i]];
            sq += y[rows[i]] * y[rows[i]];
        }
        double mean = sum / static_cast<double>(n);
        tree.nodes[static_cast<size_t>(idx)].value = mean;
        if (n < 2 * static_cast<size_t>(opt_.min_leaf)) return idx;
        double node_sse = sq - sum * sum / static_cast<double>(n);
        if (node_sse <= 1e-18) return idx;

        size_t n_feat = std::max<size_t>(
            1, static_cast<size_t>(std::llround(opt_.feature_fraction * static_cast<double>(dim_))));
        std::vector<size_t> feats(dim_);
        for (size_t i = 0; i < dim_; ++i) feats[i] = i;
        rng.shuffle(feats);
        feats.resize(n_feat);

        int best_feat = -1;
        double best_thresh = 0.0, best_sse = node_sse;
        std::vector<std::pair<double, double>> vals(n); // (feature value, target)
        for (size_t f : feats) {
            for (size_t i = 0; i < n; ++i)
                vals[i] = {x[rows[lo + i]][f], y[rows[lo + i]]};
            std::sort(vals.begin(), vals.end());
            double lsum = 0.0, lsq = 0.0;
            for (size_t i = 0; i + 1 < n; ++i) {
                lsum += vals[i].second;
                lsq += vals[i].second * vals[i].second;
                if (vals[i].first == vals[i + 1].first) continue;
                size_t nl = i + 1, nr = n - nl;
                if (nl < static_cast<size_t>(opt_.min_leaf) ||
                    nr < static_cast<size_t>(opt_.min_leaf))
                    continue;
                double rsum = sum - lsum, rsq = sq - lsq;
                double sse = (lsq - lsum * lsum / static_cast<double>(nl)) +
                             (rsq - rsum * rsum / static_cast<double>(nr));
                if (sse < best_sse - 1e-15) {
                    best_sse = sse;
                    best_feat = static_cast<int>(f);
                    best_thresh = 0.5 * (vals[i].first + vals[i + 1].first);
                }
            }
        }
        if (best_feat < 0) return idx;

        auto mid = std::partition(rows.begin() + static_cast<std::ptrdiff_t>(lo),
                                  rows.begin() + static_cast<std::ptrdiff_t>(hi),
                                  [&](size_t r) {
                                      return x[r][static_cast<size_t>(best_feat)] <= best_thresh;
                                  });
        size_t split_at = static_cast<size_t>(mid - rows.begin());
        if (split_at == lo || split_at == hi) return idx;
        tree.nodes[static_cast<size_t>(idx)].feature = best_feat;
        tree.nodes[static_cast<size_t>(idx)].threshold = best_thresh;
        int l = grow(tree, x, y, rows, lo, split_at, rng);
        int r = grow(tree, x, y, rows, split_at, hi, rng);
        tree.nodes[static_cast<size_t>(idx)].left = l;
        tree.nodes[static_cast<size_t>(idx)].right = r;
        return idx;
    }

    Options opt_;
    size_t dim_ = 0;
    std::vector<Tree> trees_;
};

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

inline double normal_pdf(double z) {
    return std::exp(-0.5 * z * z) / std::sqrt(2.0 * 3.14159265358979323846);
}

// Expected improvement below f_best for a minimized objective.
inline double expected_improvement(double mean, double var, double f_best) {
    double sigma = std::sqrt(std::max(0.0, var));
    if (sigma < 1e-12) return std::max(0.0, f_best - mean);
    double z = (f_best - mean) / sigma;
    return (f_best - mean) * normal_cdf(z) + sigma * normal_pdf(z);
}

} // namespace fairhpo
