#include <catch2/catch_amalgamated.hpp>

#include "fairhpo/preprocessing.hpp"

using namespace fairhpo;

namespace {

// All rows in train; labels/groups as given, one numeric feature.
Dataset train_only(const std::vector<double>& x, const std::vector<int>& labels,
                   const std::vector<int>& groups) {
    Dataset d;
    d.name = "fixture";
    RawColumn c{"x", true, {}, {}};
    for (double v : x) c.numbers.push_back(v);
    d.raw = {c};
    d.labels = labels;
    d.protected_group = groups;
    d.split.assign(labels.size(), Split::Train);
    detail::fit_and_encode(d);
    return d;
}

} // namespace

TEST_CASE("reweighing: independent group and label give unit weights", "[preprocessing]") {
    // 2x2 balanced: counts 5 per cell
    std::vector<double> x;
    std::vector<int> y, g;
    for (int label = 0; label <= 1; ++label)
        for (int grp = 0; grp <= 1; ++grp)
            for (int i = 0; i < 5; ++i) {
                x.push_back(static_cast<double>(x.size()));
                y.push_back(label);
                g.push_back(grp);
            }
    Dataset d = train_only(x, y, g);
    PipelineStage st = fit_reweigh(d);
    for (int s = 0; s < 2; ++s)
        for (int l = 0; l < 2; ++l) REQUIRE(st.weight[s][l] == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("reweighing: 10-row counting fixture", "[preprocessing]") {
    // P(u) = 0.5, P(y=1) = 0.4, P(u, y=1) = 0.1 -> w(u,1) = 2.0
    // rows: (g=0,y=1) x1, (g=0,y=0) x4, (g=1,y=1) x3, (g=1,y=0) x2
    std::vector<int> y{1, 0, 0, 0, 0, 1, 1, 1, 0, 0};
    std::vector<int> g{0, 0, 0, 0, 0, 1, 1, 1, 1, 1};
    std::vector<double> x;
    for (size_t i = 0; i < y.size(); ++i) x.push_back(static_cast<double>(i));
    Dataset d = train_only(x, y, g);
    PipelineStage st = fit_reweigh(d);
    REQUIRE(st.weight[0][1] == Catch::Approx(0.5 * 0.4 / 0.1).margin(1e-12));
    REQUIRE(st.weight[0][0] == Catch::Approx(0.5 * 0.6 / 0.4).margin(1e-12));
    REQUIRE(st.weight[1][1] == Catch::Approx(0.5 * 0.4 / 0.3).margin(1e-12));
    REQUIRE(st.weight[1][0] == Catch::Approx(0.5 * 0.6 / 0.2).margin(1e-12));

    SECTION("weighted joint is exactly independent and mass is preserved") {
        AppliedDataset ad = apply(st, d);
        REQUIRE(ad.train_weights.size() == 10);
        double mass = 0.0, m_sy[2][2] = {{0, 0}, {0, 0}}, m_s[2] = {0, 0}, m_y[2] = {0, 0};
        for (size_t i = 0; i < y.size(); ++i) {
            double w = ad.train_weights[i];
            REQUIRE(w > 0.0);
            mass += w;
            m_sy[g[i]][y[i]] += w;
            m_s[g[i]] += w;
            m_y[y[i]] += w;
        }
        REQUIRE(mass == Catch::Approx(10.0).margin(1e-9));
        for (int s = 0; s < 2; ++s)
            for (int l = 0; l < 2; ++l)
                REQUIRE(m_sy[s][l] == Catch::Approx(m_s[s] * m_y[l] / mass).margin(1e-9));
        // features untouched
        REQUIRE(ad.dataset.features == d.features);
    }
}

TEST_CASE("reweighing: empty cell is an error naming the cell", "[preprocessing]") {
    std::vector<int> y{1, 1, 0, 0, 1, 1};
    std::vector<int> g{1, 1, 1, 1, 0, 0}; // (g=0, y=0) empty
    std::vector<double> x{0, 1, 2, 3, 4, 5};
    Dataset d = train_only(x, y, g);
    REQUIRE_THROWS_WITH(fit_reweigh(d), Catch::Matchers::ContainsSubstring("group=0") &&
                                            Catch::Matchers::ContainsSubstring("label=0"));
}

TEST_CASE("dir: repair level zero is the identity", "[preprocessing]") {
    Rng rng(4);
    std::vector<double> x;
    std::vector<int> y, g;
    for (int i = 0; i < 40; ++i) {
        x.push_back(rng.normal(g.size() % 2 ? 1.0 : -1.0, 1.0));
        y.push_back(rng.bernoulli(0.5));
        g.push_back(i % 2);
    }
    Dataset d = train_only(x, y, g);
    PipelineStage st = fit_dir(d, 0.0);
    AppliedDataset ad = apply(st, d);
    REQUIRE((ad.dataset.features - d.features).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("dir: identical group distributions are a fixed point", "[preprocessing]") {
    // same multiset of values in both groups
    std::vector<double> vals{0.3, 1.2, -0.7, 2.5, 0.0, -1.1, 0.9, 1.7};
    std::vector<double> x;
    std::vector<int> y, g;
    for (int grp = 0; grp <= 1; ++grp)
        for (double v : vals) {
            x.push_back(v);
            y.push_back(x.size() % 2);
            g.push_back(grp);
        }
    Dataset d = train_only(x, y, g);
    for (double lam : {0.25, 0.5, 1.0}) {
        PipelineStage st = fit_dir(d, lam);
        AppliedDataset ad = apply(st, d);
        REQUIRE((ad.dataset.features - d.features).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("dir: 4-point quantile oracle", "[preprocessing]") {
    // group 0 holds {1, 2}, group 1 holds {3, 4}; full repair sends both to
    // the midpoint distribution {2, 3}, preserving within-group ranks.
    std::vector<double> x{1, 2, 3, 4};
    std::vector<int> y{0, 1, 0, 1};
    std::vector<int> g{0, 0, 1, 1};
    Dataset d = train_only(x, y, g);
    PipelineStage st = fit_dir(d, 1.0);
    AppliedDataset ad = apply(st, d);
    // values are standardized; undo with the fitted affine map
    const FeatureSpec& fs = ad.dataset.specs[0];
    auto raw = [&](size_t row) {
        return ad.dataset.features(static_cast<Eigen::Index>(row), 0) * fs.std + fs.mean;
    };
    REQUIRE(raw(0) == Catch::Approx(2.0).margin(1e-9));
    REQUIRE(raw(1) == Catch::Approx(3.0).margin(1e-9));
    REQUIRE(raw(2) == Catch::Approx(2.0).margin(1e-9));
    REQUIRE(raw(3) == Catch::Approx(3.0).margin(1e-9));
}

TEST_CASE("dir: within-group monotone and interpolating in lambda", "[preprocessing]") {
    Rng rng(9);
    std::vector<double> x;
    std::vector<int> y, g;
    for (int i = 0; i < 60; ++i) {
        int grp = i % 2;
        x.push_back(rng.normal(grp ? 0.8 : -0.5, grp ? 1.4 : 0.9));
        y.push_back(rng.bernoulli(0.5));
        g.push_back(grp);
    }
    Dataset d = train_only(x, y, g);
    PipelineStage full = fit_dir(d, 1.0);
    PipelineStage half = fit_dir(d, 0.5);
    Dataset r0 = d;
    Dataset r1 = apply(full, d).dataset;
    Dataset rh = apply(half, d).dataset;

    SECTION("lambda 0.5 is the pointwise midpoint") {
        for (size_t i = 0; i < d.n_rows(); ++i) {
            double mid = 0.5 * (r0.features(static_cast<Eigen::Index>(i), 0) +
                                r1.features(static_cast<Eigen::Index>(i), 0));
            REQUIRE(rh.features(static_cast<Eigen::Index>(i), 0) ==
                    Catch::Approx(mid).margin(1e-12));
        }
    }
    SECTION("repair preserves within-group order") {
        for (int grp = 0; grp <= 1; ++grp) {
            std::vector<std::pair<double, double>> pairs; // (orig, repaired)
            for (size_t i = 0; i < d.n_rows(); ++i)
                if (g[i] == grp)
                    pairs.emplace_back(d.features(static_cast<Eigen::Index>(i), 0),
                                       r1.features(static_cast<Eigen::Index>(i), 0));
            std::sort(pairs.begin(), pairs.end());
            for (size_t i = 1; i < pairs.size(); ++i)
                REQUIRE(pairs[i].second >= pairs[i - 1].second - 1e-12);
        }
    }
    SECTION("full repair shrinks the between-group quantile gap") {
        auto quantile_gap = [&](const Dataset& ds) {
            std::vector<double> v[2];
            for (size_t i = 0; i < ds.n_rows(); ++i)
                v[g[i]].push_back(ds.features(static_cast<Eigen::Index>(i), 0));
            for (auto& vv : v) std::sort(vv.begin(), vv.end());
            double gap = 0.0;
            for (double u : {0.1, 0.25, 0.5, 0.75, 0.9}) {
                double q0 = v[0][static_cast<size_t>(u * (v[0].size() - 1))];
                double q1 = v[1][static_cast<size_t>(u * (v[1].size() - 1))];
                gap = std::max(gap, std::fabs(q0 - q1));
            }
            return gap;
        };
        REQUIRE(quantile_gap(r1) <= quantile_gap(r0));
    }
}

TEST_CASE("dir: categorical columns pass through unchanged", "[preprocessing]") {
    Dataset d;
    d.name = "mixed";
    RawColumn num{"x", true, {}, {}};
    RawColumn cat{"c", false, {}, {}};
    std::vector<int> y, g;
    Rng rng(2);
    for (int i = 0; i < 30; ++i) {
        num.numbers.push_back(rng.normal(i % 2 ? 1.0 : 0.0, 1.0));
        cat.strings.push_back(i % 3 ? "a" : "b");
        y.push_back(rng.bernoulli(0.5));
        g.push_back(i % 2);
    }
    d.raw = {num, cat};
    d.labels = y;
    d.protected_group = g;
    d.split.assign(30, Split::Train);
    detail::fit_and_encode(d);
    PipelineStage st = fit_dir(d, 1.0);
    AppliedDataset ad = apply(st, d);
    size_t off = d.encoded_offset(1);
    for (size_t i = 0; i < d.n_rows(); ++i)
        for (size_t k = 0; k < d.specs[1].categories.size(); ++k)
            REQUIRE(ad.dataset.features(static_cast<Eigen::Index>(i),
                                        static_cast<Eigen::Index>(off + k)) ==
                    d.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(off + k)));
    REQUIRE(ad.dataset.labels == d.labels);
    REQUIRE(ad.dataset.protected_group == d.protected_group);
}

TEST_CASE("dir: val and test are transformed with train-fitted maps", "[preprocessing]") {
    Dataset d = synthetic(300, 0.6, 13);
    PipelineStage st = fit_dir(d, 1.0);
    AppliedDataset ad = apply(st, d);
    // train rows unchanged in the original, changed in the repaired copy
    bool val_changed = false;
    for (size_t i = 0; i < d.n_rows(); ++i)
        if (d.split[i] == Split::Val &&
            ad.dataset.features.row(static_cast<Eigen::Index>(i)) !=
                d.features.row(static_cast<Eigen::Index>(i)))
            val_changed = true;
    REQUIRE(val_changed);
}

TEST_CASE("pipeline stage errors", "[preprocessing]") {
    Dataset d = synthetic(100, 0.0, 1);
    SECTION("unfitted stage") {
        PipelineStage st;
        st.fitted = false;
        REQUIRE_THROWS_AS(apply(st, d), ValidationError);
    }
    SECTION("width mismatch") {
        PipelineStage st = fit_dir(d, 1.0);
        Dataset other = synthetic(100, 0.0, 2);
        other.features.conservativeResize(other.features.rows(), 1);
        other.specs.resize(1);
        REQUIRE_THROWS_AS(apply(st, other), ValidationError);
    }
    SECTION("repair level out of range") {
        REQUIRE_THROWS_AS(fit_dir(d, 1.5), ValidationError);
    }
    SECTION("degenerate group") {
        std::vector<double> x{1, 2, 3, 4, 5};
        std::vector<int> y{0, 1, 0, 1, 1};
        std::vector<int> g{0, 0, 0, 0, 1}; // one privileged row
        Dataset tiny = train_only(x, y, g);
        REQUIRE_THROWS_AS(fit_dir(tiny, 1.0), ValidationError);
    }
}

TEST_CASE("pipeline descriptor hash distinguishes kinds and levels", "[preprocessing]") {
    PipelineStage rw;
    rw.kind = PipelineStage::Kind::Reweigh;
    PipelineStage d1;
    d1.kind = PipelineStage::Kind::DirRepair;
    d1.repair_level = 1.0;
    PipelineStage d2 = d1;
    d2.repair_level = 0.5;
    REQUIRE(rw.descriptor_hash() != d1.descriptor_hash());
    REQUIRE(d1.descriptor_hash() != d2.descriptor_hash());
}
