#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "fairhpo/common.hpp"
#include "fairhpo/csv.hpp"
#include "fairhpo/schema.hpp"

namespace fairhpo {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

enum class Split : int { Train = 0, Val = 1, Test = 2 };

inline const char* split_name(Split s) {
    switch (s) {
        case Split::Train: return "train";
        case Split::Val: return "val";
        case Split::Test: return "test";
    }
    return "?";
}

struct SplitFractions {
    double train = 0.6, val = 0.2, test = 0.2;

    void validate() const {
        if (!(train > 0.0 && val > 0.0 && test > 0.0))
            throw ValidationError("split fractions must all be positive");
        if (std::fabs(train + val + test - 1.0) > 1e-9)
            throw ValidationError("split fractions must sum to 1");
    }
};

// One feature column after fitting on the train split. A numeric column is
// standardized with train-split mean and sample std; a categorical column
// is one-hot encoded over its fitted category list. "<missing>" is always
// the last category and absorbs both missing and unseen values.
struct FeatureSpec {
    std::string name;
    bool numeric = true;
    double mean = 0.0;
    double std = 1.0;
    double median = 0.0; // train median, used to impute missing numerics
    std::vector<std::string> categories;

    size_t encoded_width() const { return numeric ? 1 : categories.size(); }
};

inline const std::string kMissingCategory = "<missing>";

// Raw (pre-encoding) column values, retained so a dataset can be re-split
// and re-encoded with fresh train statistics.
struct RawColumn {
    std::string name;
    bool numeric = true;
    std::vector<std::optional<double>> numbers;
    std::vector<std::string> strings;
};

struct Dataset {
    std::string name;
    Matrix features; // n_rows x encoded width
    std::vector<int> labels;          // 1 = favorable outcome
    std::vector<int> protected_group; // 1 = privileged
    std::vector<Split> split;
    std::vector<FeatureSpec> specs;
    std::vector<RawColumn> raw;
    std::vector<std::string> warnings;

    size_t n_rows() const { return labels.size(); }
    size_t width() const { return static_cast<size_t>(features.cols()); }

    std::vector<size_t> rows_of(Split s) const {
        std::vector<size_t> idx;
        for (size_t i = 0; i < split.size(); ++i)
            if (split[i] == s) idx.push_back(i);
        return idx;
    }

    Matrix features_of(Split s) const {
        auto idx = rows_of(s);
        Matrix out(static_cast<Eigen::Index>(idx.size()), features.cols());
        for (size_t i = 0; i < idx.size(); ++i)
            out.row(static_cast<Eigen::Index>(i)) = features.row(static_cast<Eigen::Index>(idx[i]));
        return out;
    }

    std::vector<int> labels_of(Split s) const {
        std::vector<int> out;
        for (size_t i = 0; i < split.size(); ++i)
            if (split[i] == s) out.push_back(labels[i]);
        return out;
    }

    std::vector<int> protected_of(Split s) const {
        std::vector<int> out;
        for (size_t i = 0; i < split.size(); ++i)
            if (split[i] == s) out.push_back(protected_group[i]);
        return out;
    }

    // Column offset of spec `spec_index` in the encoded matrix.
    size_t encoded_offset(size_t spec_index) const {
        size_t off = 0;
        for (size_t i = 0; i < spec_index; ++i) off += specs[i].encoded_width();
        return off;
    }

    // Inverse of one-hot encoding; for round-trip checks.
    std::string decode_categorical(size_t spec_index, size_t row) const {
        const FeatureSpec& fs = specs.at(spec_index);
        if (fs.numeric) throw ValidationError("decode_categorical: spec is numeric");
        size_t off = encoded_offset(spec_index);
        for (size_t k = 0; k < fs.categories.size(); ++k)
            if (features(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(off + k)) == 1.0)
                return fs.categories[k];
        throw ValidationError("decode_categorical: no active category");
    }
};

namespace detail {

// Stratified assignment on the (label, protected) cells. Each cell's rows
// are distributed across splits within one row of its proportional share
// (largest-remainder quotas), shuffled deterministically per (seed, cell).
inline std::vector<Split> assign_splits(const std::vector<int>& labels,
                                        const std::vector<int>& protected_group,
                                        SplitFractions fractions, uint64_t seed,
                                        bool reject_small_cells) {
    fractions.validate();
    const size_t n = labels.size();
    std::vector<Split> out(n, Split::Train);
    const double fr[3] = {fractions.train, fractions.val, fractions.test};
    for (int label = 0; label <= 1; ++label) {
        for (int grp = 0; grp <= 1; ++grp) {
            std::vector<size_t> cell;
            for (size_t i = 0; i < n; ++i)
                if (labels[i] == label && protected_group[i] == grp) cell.push_back(i);
            if (cell.empty()) continue;
            if (reject_small_cells && cell.size() < 3)
                throw ValidationError("split: cell (label=" + std::to_string(label) +
                                      ", group=" + std::to_string(grp) + ") has " +
                                      std::to_string(cell.size()) + " rows, fewer than 3 splits");
            Rng rng(derive_seed(seed, "split-cell", static_cast<uint64_t>(label * 2 + grp)));
            rng.shuffle(cell);
            size_t quota[3];
            double rem[3];
            size_t assigned = 0;
            for (int s = 0; s < 3; ++s) {
                double share = fr[s] * static_cast<double>(cell.size());
                quota[s] = static_cast<size_t>(std::floor(share));
                rem[s] = share - std::floor(share);
                assigned += quota[s];
            }
            while (assigned < cell.size()) {
                int best = 0;
                for (int s = 1; s < 3; ++s)
                    if (rem[s] > rem[best]) best = s;
                ++quota[best];
                rem[best] = -1.0;
                ++assigned;
            }
            size_t pos = 0;
            for (int s = 0; s < 3; ++s)
                for (size_t k = 0; k < quota[s]; ++k) out[cell[pos++]] = static_cast<Split>(s);
        }
    }
    return out;
}

inline void check_split_invariant(const std::vector<int>& labels,
                                  const std::vector<int>& protected_group,
                                  const std::vector<Split>& split) {
    for (int s = 0; s < 3; ++s) {
        bool lab[2] = {false, false}, grp[2] = {false, false};
        for (size_t i = 0; i < split.size(); ++i) {
            if (static_cast<int>(split[i]) != s) continue;
            lab[labels[i] ? 1 : 0] = true;
            grp[protected_group[i] ? 1 : 0] = true;
        }
        Split sp = static_cast<Split>(s);
        if (!lab[0] || !lab[1])
            throw ValidationError(std::string("label missing in split ") + split_name(sp));
        if (!grp[0] || !grp[1])
            throw ValidationError(std::string("group missing in split ") + split_name(sp));
    }
}

inline double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    size_t n = v.size();
    if (n % 2 == 1) return v[n / 2];
    return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Fit specs on the train split and encode every row. Constant numeric
// columns are dropped with a warning.
inline void fit_and_encode(Dataset& d) {
    const size_t n = d.n_rows();
    d.specs.clear();
    d.warnings.clear();
    std::vector<size_t> spec_to_raw;
    for (size_t c = 0; c < d.raw.size(); ++c) {
        const RawColumn& col = d.raw[c];
        FeatureSpec fs;
        fs.name = col.name;
        fs.numeric = col.numeric;
        if (col.numeric) {
            std::vector<double> train_vals;
            for (size_t i = 0; i < n; ++i)
                if (d.split[i] == Split::Train && col.numbers[i]) train_vals.push_back(*col.numbers[i]);
            if (train_vals.size() < 2) {
                d.warnings.push_back("dropped numeric column '" + col.name +
                                     "': fewer than 2 train values");
                continue;
            }
            double mean = 0.0;
            for (double v : train_vals) mean += v;
            mean /= static_cast<double>(train_vals.size());
            double ss = 0.0;
            for (double v : train_vals) ss += (v - mean) * (v - mean);
            double sd = std::sqrt(ss / static_cast<double>(train_vals.size() - 1));
            if (sd <= 0.0) {
                d.warnings.push_back("dropped constant numeric column '" + col.name + "'");
                continue;
            }
            fs.mean = mean;
            fs.std = sd;
            fs.median = median_of(train_vals);
        } else {
            std::map<std::string, bool> seen;
            for (size_t i = 0; i < n; ++i)
                if (d.split[i] == Split::Train && col.strings[i] != kMissingCategory)
                    seen[col.strings[i]] = true;
            for (const auto& [v, _] : seen) fs.categories.push_back(v);
            fs.categories.push_back(kMissingCategory);
        }
        spec_to_raw.push_back(c);
        d.specs.push_back(std::move(fs));
    }
    if (d.specs.empty()) throw ValidationError("all-constant feature set: no usable columns");

    size_t width = 0;
    for (const auto& fs : d.specs) width += fs.encoded_width();
    d.features.setZero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(width));
    for (size_t i = 0; i < n; ++i) {
        size_t off = 0;
        for (size_t s = 0; s < d.specs.size(); ++s) {
            const FeatureSpec& fs = d.specs[s];
            const RawColumn& col = d.raw[spec_to_raw[s]];
            if (fs.numeric) {
                double v = col.numbers[i] ? *col.numbers[i] : fs.median;
                d.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(off)) =
                    (v - fs.mean) / fs.std;
                off += 1;
            } else {
                const std::string& v = col.strings[i];
                size_t k = fs.categories.size() - 1; // <missing>
                for (size_t j = 0; j + 1 < fs.categories.size(); ++j)
                    if (fs.categories[j] == v) { k = j; break; }
                d.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(off + k)) = 1.0;
                off += fs.categories.size();
            }
        }
    }
}

} // namespace detail

struct LoadOptions {
    SplitFractions fractions;
    uint64_t split_seed = 0;
    // The paper's setting keeps the protected column among the model inputs;
    // removing it alone does not remove correlated bias. Toggle per run.
    bool include_protected_in_features = true;
};

// Re-assign splits and re-encode with fresh train statistics.
inline Dataset split(const Dataset& dataset, SplitFractions fractions, uint64_t seed) {
    Dataset d = dataset;
    d.split = detail::assign_splits(d.labels, d.protected_group, fractions, seed,
                                    /*reject_small_cells=*/true);
    detail::check_split_invariant(d.labels, d.protected_group, d.split);
    detail::fit_and_encode(d);
    return d;
}

inline Dataset load_csv(const std::string& path, const DatasetSchema& schema,
                        const LoadOptions& options = {}) {
    options.fractions.validate();
    csv::Table t = csv::read_file(path);
    size_t label_col, prot_col;
    try {
        label_col = t.column(schema.label_column);
        prot_col = t.column(schema.protected_column);
    } catch (const ValidationError& e) {
        throw ValidationError("load_csv: " + std::string(e.what()) + " in " + path);
    }
    std::vector<size_t> feat_cols;
    for (const auto& [cname, kind] : schema.feature_columns) {
        (void)kind;
        feat_cols.push_back(t.column(cname));
    }

    Dataset d;
    d.name = schema.name;
    for (const auto& [cname, kind] : schema.feature_columns) {
        if (!options.include_protected_in_features && cname == schema.protected_column) continue;
        RawColumn col;
        col.name = cname;
        col.numeric = (kind == "numeric");
        d.raw.push_back(std::move(col));
    }

    for (const auto& row : t.rows) {
        const std::string& lab = row[label_col];
        const std::string& prot = row[prot_col];
        if (schema.is_missing(lab) || schema.is_missing(prot)) continue; // drop row
        d.labels.push_back(lab == schema.favorable_value ? 1 : 0);
        d.protected_group.push_back(prot == schema.privileged_value ? 1 : 0);
        size_t rc = 0;
        for (size_t f = 0; f < schema.feature_columns.size(); ++f) {
            const auto& [cname, kind] = schema.feature_columns[f];
            if (!options.include_protected_in_features && cname == schema.protected_column) continue;
            const std::string& v = row[feat_cols[f]];
            RawColumn& col = d.raw[rc++];
            if (col.numeric) {
                if (schema.is_missing(v)) {
                    col.numbers.push_back(std::nullopt);
                } else {
                    try {
                        col.numbers.push_back(std::stod(v));
                    } catch (const std::exception&) {
                        throw ValidationError("load_csv: column '" + cname +
                                              "' declared numeric but holds '" + v + "'");
                    }
                }
            } else {
                col.strings.push_back(schema.is_missing(v) ? kMissingCategory : v);
            }
        }
    }
    if (d.labels.empty()) throw ValidationError("load_csv: no usable rows in " + path);
    if (schema.expected_rows && *schema.expected_rows != static_cast<int64_t>(d.labels.size()))
        throw ValidationError("load_csv: " + path + " has " + std::to_string(d.labels.size()) +
                              " usable rows, schema expects " + std::to_string(*schema.expected_rows));

    d.split = detail::assign_splits(d.labels, d.protected_group, options.fractions,
                                    options.split_seed, /*reject_small_cells=*/false);
    detail::check_split_invariant(d.labels, d.protected_group, d.split);
    detail::fit_and_encode(d);
    return d;
}

// Deterministic test fixture: two standard-normal features, labels linearly
// separable (x0 + x1 > 0), protected attribute equal to the label with
// probability `bias` and a fair coin otherwise.
inline Dataset synthetic(size_t n, double bias, uint64_t seed,
                         SplitFractions fractions = {}) {
    if (n < 40) throw ValidationError("synthetic: n must be >= 40");
    if (bias < 0.0 || bias > 1.0) throw ValidationError("synthetic: bias must be in [0,1]");
    Rng rng(derive_seed(seed, "synthetic"));
    Dataset d;
    d.name = "synthetic";
    RawColumn c0{"f0", true, {}, {}}, c1{"f1", true, {}, {}};
    for (size_t i = 0; i < n; ++i) {
        double x0 = rng.normal(), x1 = rng.normal();
        int y = (x0 + x1 > 0.0) ? 1 : 0;
        int p = rng.bernoulli(bias) ? y : (rng.bernoulli(0.5) ? 1 : 0);
        c0.numbers.push_back(x0);
        c1.numbers.push_back(x1);
        d.labels.push_back(y);
        d.protected_group.push_back(p);
    }
    d.raw = {std::move(c0), std::move(c1)};
    d.split = detail::assign_splits(d.labels, d.protected_group, fractions,
                                    derive_seed(seed, "synthetic-split"),
                                    /*reject_small_cells=*/false);
    detail::check_split_invariant(d.labels, d.protected_group, d.split);
    detail::fit_and_encode(d);
    return d;
}

} // namespace fairhpo
