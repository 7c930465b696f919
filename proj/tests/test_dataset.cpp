#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "fairhpo/dataset.hpp"

using namespace fairhpo;

namespace {

std::string write_temp_csv(const std::string& name, const std::string& content) {
    std::string path = std::filesystem::temp_directory_path() / name;
    std::ofstream out(path);
    out << content;
    return path;
}

DatasetSchema tiny_schema() {
    nlohmann::json j{
        {"name", "tiny"},
        {"label", {{"column", "y"}, {"favorable", "yes"}}},
        {"protected", {{"column", "g"}, {"privileged", "p"}}},
        {"columns", nlohmann::json::array({{{"name", "x"}, {"kind", "numeric"}},
                                           {{"name", "c"}, {"kind", "categorical"}}})},
    };
    return DatasetSchema::from_json(j);
}

// Deterministic balanced CSV: every (label, group) cell gets `per_cell` rows.
std::string balanced_csv(int per_cell) {
    std::string s = "x,c,y,g\n";
    int v = 0;
    for (const char* y : {"yes", "no"})
        for (const char* g : {"p", "u"})
            for (int i = 0; i < per_cell; ++i)
                s += std::to_string(v++) + ",k" + std::to_string(i % 3) + "," + y + "," + g + "\n";
    return s;
}

} // namespace

TEST_CASE("train column standardized to mean 0, sample std 1", "[dataset]") {
    auto big = write_temp_csv("std40.csv", balanced_csv(10));
    Dataset d = load_csv(big, tiny_schema(), {});
    // numeric train column: |mean| ~ 0, sample std ~ 1
    auto idx = d.rows_of(Split::Train);
    double mean = 0.0;
    for (size_t i : idx) mean += d.features(static_cast<Eigen::Index>(i), 0);
    mean /= static_cast<double>(idx.size());
    double ss = 0.0;
    for (size_t i : idx) {
        double v = d.features(static_cast<Eigen::Index>(i), 0) - mean;
        ss += v * v;
    }
    double sd = std::sqrt(ss / static_cast<double>(idx.size() - 1));
    REQUIRE(std::fabs(mean) < 1e-9);
    REQUIRE(sd == Catch::Approx(1.0).margin(1e-9));
}

TEST_CASE("pure standardization identity", "[dataset]") {
    // direct check of the fitting rule on {1,2,3,4}: mean 2.5, sample std
    // sqrt(5/3)
    Dataset d;
    d.name = "manual";
    RawColumn c{"x", true, {1.0, 2.0, 3.0, 4.0}, {}};
    d.raw = {c};
    d.labels = {1, 0, 1, 0};
    d.protected_group = {1, 1, 0, 0};
    d.split = {Split::Train, Split::Train, Split::Train, Split::Train};
    detail::fit_and_encode(d);
    REQUIRE(d.specs[0].mean == Catch::Approx(2.5));
    REQUIRE(d.specs[0].std == Catch::Approx(std::sqrt(5.0 / 3.0)).margin(1e-12));
    double mean = d.features.col(0).mean();
    double ss = (d.features.col(0).array() - mean).square().sum() / 3.0;
    REQUIRE(std::fabs(mean) < 1e-9);
    REQUIRE(std::sqrt(ss) == Catch::Approx(1.0).margin(1e-9));
}

TEST_CASE("stratified split counting oracle", "[dataset]") {
    auto path = write_temp_csv("bal100.csv", balanced_csv(25)); // 100 rows, 25 per cell
    Dataset d0 = load_csv(path, tiny_schema(), {});
    Dataset d = split(d0, {0.6, 0.2, 0.2}, 0);
    int counts[3] = {0, 0, 0};
    int cell_counts[2][2][3] = {};
    for (size_t i = 0; i < d.n_rows(); ++i) {
        ++counts[static_cast<int>(d.split[i])];
        ++cell_counts[d.labels[i]][d.protected_group[i]][static_cast<int>(d.split[i])];
    }
    REQUIRE(counts[0] == 60);
    REQUIRE(counts[1] == 20);
    REQUIRE(counts[2] == 20);
    for (int y = 0; y < 2; ++y)
        for (int g = 0; g < 2; ++g) {
            REQUIRE(cell_counts[y][g][0] == 15);
            REQUIRE(cell_counts[y][g][1] == 5);
            REQUIRE(cell_counts[y][g][2] == 5);
        }
}

TEST_CASE("split preconditions and determinism", "[dataset]") {
    auto path = write_temp_csv("bal40.csv", balanced_csv(10));
    Dataset d = load_csv(path, tiny_schema(), {});
    REQUIRE_THROWS_AS(split(d, {1.0, 0.0, 0.0}, 0), ValidationError);
    REQUIRE_THROWS_AS(split(d, {0.5, 0.3, 0.3}, 0), ValidationError);
    Dataset a = split(d, {0.6, 0.2, 0.2}, 7);
    Dataset b = split(d, {0.6, 0.2, 0.2}, 7);
    REQUIRE(a.split == b.split);
    REQUIRE(a.features == b.features);
    // a different seed moves at least one row at this size
    Dataset c = split(d, {0.6, 0.2, 0.2}, 8);
    REQUIRE(a.split != c.split);
}

TEST_CASE("split is a partition with non-proportional fractions", "[dataset]") {
    auto path = write_temp_csv("bal52.csv", balanced_csv(13));
    Dataset d = load_csv(path, tiny_schema(), {});
    Dataset s = split(d, {0.5, 0.25, 0.25}, 3);
    size_t total = s.rows_of(Split::Train).size() + s.rows_of(Split::Val).size() +
                   s.rows_of(Split::Test).size();
    REQUIRE(total == s.n_rows());
    // each cell within one row of its share
    for (int y = 0; y < 2; ++y)
        for (int g = 0; g < 2; ++g) {
            int cell[3] = {0, 0, 0};
            int cell_n = 0;
            for (size_t i = 0; i < s.n_rows(); ++i)
                if (s.labels[i] == y && s.protected_group[i] == g) {
                    ++cell[static_cast<int>(s.split[i])];
                    ++cell_n;
                }
            double fr[3] = {0.5, 0.25, 0.25};
            for (int k = 0; k < 3; ++k)
                REQUIRE(std::fabs(cell[k] - fr[k] * cell_n) < 1.0);
        }
}

TEST_CASE("group missing in a split is rejected", "[dataset]") {
    // 3 privileged rows cannot cover 3 splits after stratification of the
    // two privileged cells (sizes 2 and 1).
    std::string csv = "x,c,y,g\n";
    for (int i = 0; i < 30; ++i)
        csv += std::to_string(i) + ",a," + (i % 2 ? "yes" : "no") + ",u\n";
    csv += "100,a,yes,p\n101,a,yes,p\n102,a,no,p\n";
    auto path = write_temp_csv("missing_grp.csv", csv);
    REQUIRE_THROWS_WITH(load_csv(path, tiny_schema(), {}),
                        Catch::Matchers::ContainsSubstring("missing in split"));
}

TEST_CASE("categorical round trip and one-hot invariant", "[dataset]") {
    auto path = write_temp_csv("cat.csv", balanced_csv(10));
    Dataset d = load_csv(path, tiny_schema(), {});
    const FeatureSpec& fs = d.specs[1];
    REQUIRE_FALSE(fs.numeric);
    REQUIRE(fs.categories.back() == kMissingCategory);
    size_t off = d.encoded_offset(1);
    for (size_t r = 0; r < d.n_rows(); ++r) {
        double sum = 0.0;
        for (size_t k = 0; k < fs.categories.size(); ++k)
            sum += d.features(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(off + k));
        REQUIRE(sum == 1.0);
        std::string decoded = d.decode_categorical(1, r);
        REQUIRE(decoded == d.raw[1].strings[r]);
    }
}

TEST_CASE("missing values, unseen categories, constant columns", "[dataset]") {
    std::string csv = "x,c,y,g\n";
    // x constant, c has a missing marker; label/protected never missing
    for (int i = 0; i < 48; ++i) {
        std::string cat = i % 7 == 0 ? "?" : (i % 2 ? "a" : "b");
        csv += "5," + cat + "," + (i % 2 ? "yes" : "no") + "," + (i % 4 < 2 ? "p" : "u") + "\n";
    }
    auto path = write_temp_csv("missing.csv", csv);
    nlohmann::json sj = tiny_schema().to_json();
    DatasetSchema schema = DatasetSchema::from_json(sj);
    Dataset d = load_csv(path, schema, {});
    REQUIRE(d.specs.size() == 1); // constant x dropped
    REQUIRE_FALSE(d.warnings.empty());
    REQUIRE(d.specs[0].name == "c");
    bool saw_missing = false;
    for (size_t r = 0; r < d.n_rows(); ++r)
        if (d.decode_categorical(0, r) == kMissingCategory) saw_missing = true;
    REQUIRE(saw_missing);
}

TEST_CASE("rows with missing label or protected are dropped", "[dataset]") {
    std::string csv = balanced_csv(10);
    csv += "9,a,?,p\n9,a,yes,?\n";
    auto path = write_temp_csv("droprows.csv", csv);
    Dataset d = load_csv(path, tiny_schema(), {});
    REQUIRE(d.n_rows() == 40);
}

TEST_CASE("schema errors", "[dataset]") {
    auto path = write_temp_csv("schema_err.csv", "a,b\n1,2\n");
    REQUIRE_THROWS_AS(load_csv(path, tiny_schema(), {}), ValidationError);
    REQUIRE_THROWS_AS(load_csv("/nonexistent/file.csv", tiny_schema(), {}), ValidationError);
}

TEST_CASE("expected_rows verified at load", "[dataset]") {
    auto path = write_temp_csv("expected.csv", balanced_csv(10));
    DatasetSchema schema = tiny_schema();
    schema.expected_rows = 40;
    REQUIRE_NOTHROW(load_csv(path, schema, {}));
    schema.expected_rows = 48842;
    REQUIRE_THROWS_AS(load_csv(path, schema, {}), ValidationError);
}

TEST_CASE("protected column exclusion flag", "[dataset]") {
    std::string csv = "x,c,y,g\n";
    int v = 0;
    for (const char* y : {"yes", "no"})
        for (const char* g : {"p", "u"})
            for (int i = 0; i < 10; ++i)
                csv += std::to_string(v++) + "," + g + "," + y + "," + g + "\n";
    auto path = write_temp_csv("prot.csv", csv);
    DatasetSchema schema = tiny_schema();
    schema.feature_columns[1] = {"g", "categorical"}; // protected as feature
    LoadOptions with_prot;
    Dataset d1 = load_csv(path, schema, with_prot);
    LoadOptions without_prot;
    without_prot.include_protected_in_features = false;
    Dataset d2 = load_csv(path, schema, without_prot);
    REQUIRE(d1.specs.size() == 2);
    REQUIRE(d2.specs.size() == 1);
    REQUIRE(d2.specs[0].name == "x");
}

TEST_CASE("synthetic fixture", "[dataset]") {
    SECTION("precondition") { REQUIRE_THROWS_AS(synthetic(10, 0.0, 0), ValidationError); }
    SECTION("determinism") {
        Dataset a = synthetic(200, 0.4, 9);
        Dataset b = synthetic(200, 0.4, 9);
        REQUIRE(a.features == b.features);
        REQUIRE(a.labels == b.labels);
        REQUIRE(a.protected_group == b.protected_group);
        REQUIRE(a.split == b.split);
    }
    SECTION("bias 0: label independent of group within 0.05") {
        Dataset d = synthetic(1000, 0.0, 0);
        double p1 = 0, n1 = 0, p0 = 0, n0 = 0;
        for (size_t i = 0; i < d.n_rows(); ++i) {
            if (d.protected_group[i]) {
                n1 += 1;
                p1 += d.labels[i];
            } else {
                n0 += 1;
                p0 += d.labels[i];
            }
        }
        REQUIRE(std::fabs(p0 / n0 - p1 / n1) <= 0.05);
    }
    SECTION("bias 1: privileged iff favorable") {
        Dataset d = synthetic(500, 1.0, 3);
        for (size_t i = 0; i < d.n_rows(); ++i)
            REQUIRE(d.labels[i] == d.protected_group[i]);
    }
    SECTION("labels linearly separable in raw features") {
        Dataset d = synthetic(300, 0.0, 5);
        for (size_t i = 0; i < d.n_rows(); ++i) {
            double x0 = *d.raw[0].numbers[i], x1 = *d.raw[1].numbers[i];
            REQUIRE(d.labels[i] == (x0 + x1 > 0.0 ? 1 : 0));
        }
    }
    SECTION("every split carries both labels and groups") {
        Dataset d = synthetic(120, 0.7, 1);
        for (Split s : {Split::Train, Split::Val, Split::Test}) {
            auto labs = d.labels_of(s);
            auto grps = d.protected_of(s);
            REQUIRE(std::count(labs.begin(), labs.end(), 1) > 0);
            REQUIRE(std::count(labs.begin(), labs.end(), 0) > 0);
            REQUIRE(std::count(grps.begin(), grps.end(), 1) > 0);
            REQUIRE(std::count(grps.begin(), grps.end(), 0) > 0);
        }
    }
}
