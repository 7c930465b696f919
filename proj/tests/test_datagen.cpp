#include <catch2/catch_amalgamated.hpp>

#include <filesystem>

#include "fairhpo/datagen.hpp"
#include "fairhpo/dataset.hpp"

using namespace fairhpo;

namespace {

std::string write_table(const std::string& name, const csv::Table& t) {
    std::string path = (std::filesystem::temp_directory_path() / name).string();
    csv::write_file(path, t);
    return path;
}

} // namespace

TEST_CASE("generators are deterministic", "[datagen]") {
    for (const char* kind : {"adult", "compas", "acs-income"}) {
        csv::Table a = datagen::generate(kind, 300, 7);
        csv::Table b = datagen::generate(kind, 300, 7);
        REQUIRE(a.rows == b.rows);
        csv::Table c = datagen::generate(kind, 300, 8);
        REQUIRE(a.rows != c.rows);
    }
}

TEST_CASE("adult-like marginals and group gap", "[datagen]") {
    csv::Table t = datagen::adult_like(20000, 1);
    size_t male = 0, rich = 0, rich_m = 0, rich_f = 0, n_m = 0, n_f = 0;
    size_t sex_col = t.column("sex"), income_col = t.column("income");
    for (const auto& row : t.rows) {
        bool m = row[sex_col] == "Male";
        bool r = row[income_col] == ">50K";
        male += m;
        rich += r;
        if (m) {
            ++n_m;
            rich_m += r;
        } else {
            ++n_f;
            rich_f += r;
        }
    }
    double n = static_cast<double>(t.rows.size());
    REQUIRE(static_cast<double>(male) / n == Catch::Approx(0.67).margin(0.02));
    double base = static_cast<double>(rich) / n;
    REQUIRE(base > 0.15);
    REQUIRE(base < 0.35);
    double gap = static_cast<double>(rich_m) / static_cast<double>(n_m) -
                 static_cast<double>(rich_f) / static_cast<double>(n_f);
    REQUIRE(gap > 0.08); // privileged group favored, clearly learnable
    REQUIRE(gap < 0.30);
}

TEST_CASE("generated tables load through their schemas", "[datagen]") {
    for (const char* kind : {"adult", "compas", "acs-income"}) {
        csv::Table t = datagen::generate(kind, 400, 3);
        std::string path = write_table(std::string("fairhpo_gen_") + kind + ".csv", t);
        DatasetSchema schema = datagen::schema_for(kind);
        Dataset d = load_csv(path, schema, {});
        REQUIRE(d.n_rows() == 400);
        REQUIRE(d.width() > 5);
        for (Split s : {Split::Train, Split::Val, Split::Test})
            REQUIRE_FALSE(d.rows_of(s).empty());
        std::filesystem::remove(path);
    }
}

TEST_CASE("compas-like: unprivileged group has higher recidivism label rate", "[datagen]") {
    csv::Table t = datagen::compas_like(8000, 2);
    size_t race_col = t.column("race"), label_col = t.column("two_year_recid");
    double recid_c = 0, n_c = 0, recid_o = 0, n_o = 0;
    for (const auto& row : t.rows) {
        bool cauc = row[race_col] == "Caucasian";
        double r = row[label_col] == "1" ? 1.0 : 0.0;
        if (cauc) {
            n_c += 1;
            recid_c += r;
        } else {
            n_o += 1;
            recid_o += r;
        }
    }
    REQUIRE(recid_o / n_o > recid_c / n_c);
}

TEST_CASE("unknown generator kind rejected", "[datagen]") {
    REQUIRE_THROWS_AS(datagen::generate("mystery", 100, 0), ValidationError);
}
