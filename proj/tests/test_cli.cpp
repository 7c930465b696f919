#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "fairhpo/commands.hpp"

using namespace fairhpo;
namespace fs = std::filesystem;

namespace {

struct TempTree {
    fs::path root;
    explicit TempTree(const std::string& name) : root(fs::temp_directory_path() / name) {
        fs::remove_all(root);
        fs::create_directories(root);
    }
    ~TempTree() { fs::remove_all(root); }
    std::string operator/(const std::string& p) const { return (root / p).string(); }
};

RunConfig tiny_run_config(const TempTree& tmp, size_t rows = 300) {
    commands::cmd_gen("adult", rows, 3, tmp / "adult.csv");
    RunConfig rc;
    rc.csv_path = tmp / "adult.csv";
    rc.schema_path = tmp / "adult.schema.json";
    rc.family = Family::MLP;
    rc.trial_budget = 6;
    rc.hyperband = {1, 2, 3};
    rc.n_configs = 2;
    rc.seeds = {0, 1};
    rc.out_dir = tmp / "runs";
    return rc;
}

int run_cli(const std::string& args) {
    std::string cmd = std::string(FAIRHPO_BIN) + " " + args + " >/dev/null 2>&1";
    int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

} // namespace

TEST_CASE("gen writes a loadable csv + schema pair", "[cli]") {
    TempTree tmp("fairhpo_cli_gen");
    std::string schema_path = commands::cmd_gen("compas", 120, 1, tmp / "c.csv");
    REQUIRE(fs::exists(tmp / "c.csv"));
    REQUIRE(fs::exists(schema_path));
    Dataset d = load_csv(tmp / "c.csv", DatasetSchema::load(schema_path), {});
    REQUIRE(d.n_rows() == 120);
}

TEST_CASE("probe command emits scatter, summary and log", "[cli]") {
    TempTree tmp("fairhpo_cli_probe");
    RunConfig rc = tiny_run_config(tmp);
    rc.svg = true;
    std::string dir = commands::cmd_probe(rc, tmp / "probe-run");
    REQUIRE(fs::exists(dir + "/scatter.csv"));
    REQUIRE(fs::exists(dir + "/summary.json"));
    REQUIRE(fs::exists(dir + "/log.jsonl"));
    REQUIRE(fs::exists(dir + "/resolved_config.json"));
    REQUIRE(fs::exists(dir + "/scatter.svg"));

    SECTION("scatter arity and round trip through the csv parser") {
        csv::Table t = csv::read_file(dir + "/scatter.csv");
        REQUIRE(t.rows.size() == rc.n_configs);
        REQUIRE(t.has_column("mean_spd_abs"));
        REQUIRE(t.has_column("mean_accuracy"));
    }
    SECTION("summary parses and reports dispersion stats") {
        nlohmann::json j = commands::read_json(dir + "/summary.json");
        REQUIRE(j.at("n_configs") == rc.n_configs);
        REQUIRE(j.at("n_seeds") == rc.seeds.size());
        REQUIRE(j.at("stats").at("spd_abs").contains("std"));
        REQUIRE(j.at("stats").at("spd_abs").contains("spread"));
        REQUIRE(j.at("trivial_rate").is_number());
    }
    SECTION("report regenerates identical outputs from the log") {
        std::ifstream f1(dir + "/scatter.csv");
        std::string before((std::istreambuf_iterator<char>(f1)), {});
        std::ifstream s1(dir + "/summary.json");
        std::string sum_before((std::istreambuf_iterator<char>(s1)), {});
        commands::cmd_report(dir);
        std::ifstream f2(dir + "/scatter.csv");
        std::string after((std::istreambuf_iterator<char>(f2)), {});
        std::ifstream s2(dir + "/summary.json");
        std::string sum_after((std::istreambuf_iterator<char>(s2)), {});
        REQUIRE(before == after);
        REQUIRE(sum_before == sum_after);
    }
}

TEST_CASE("optimize command: archive files, invariants, determinism", "[cli]") {
    TempTree tmp("fairhpo_cli_opt");
    RunConfig rc = tiny_run_config(tmp);
    std::string dir = commands::cmd_optimize(rc, tmp / "opt-run");
    REQUIRE(fs::exists(dir + "/archive.csv"));
    REQUIRE(fs::exists(dir + "/archive.json"));
    REQUIRE(fs::exists(dir + "/archive_summary.json"));

    csv::Table archive = csv::read_file(dir + "/archive.csv");
    REQUIRE_FALSE(archive.rows.empty());

    SECTION("no archive row dominates another on the val objectives") {
        size_t e0 = archive.column("objective_balanced_error");
        size_t e1 = archive.column("objective_spd_abs");
        std::vector<std::vector<double>> pts;
        for (const auto& row : archive.rows)
            pts.push_back({std::stod(row[e0]), std::stod(row[e1])});
        // distinct configs may tie exactly on both objectives; ties are
        // mutually nondominated
        for (size_t i = 0; i < pts.size(); ++i)
            for (size_t j = 0; j < pts.size(); ++j)
                if (i != j) REQUIRE_FALSE(dominates(pts[i], pts[j]));
    }
    SECTION("test metrics are filled for archive points") {
        size_t tacc = archive.column("test_accuracy");
        for (const auto& row : archive.rows) REQUIRE_FALSE(row[tacc].empty());
    }
    SECTION("re-running the same config and seed reproduces the archive csv") {
        std::string dir2 = commands::cmd_optimize(rc, tmp / "opt-run2");
        std::ifstream f1(dir + "/archive.csv"), f2(dir2 + "/archive.csv");
        std::string a((std::istreambuf_iterator<char>(f1)), {});
        std::string b((std::istreambuf_iterator<char>(f2)), {});
        REQUIRE(a == b);
    }
    SECTION("report rebuilds the archive from the log") {
        std::ifstream f1(dir + "/archive.csv");
        std::string before((std::istreambuf_iterator<char>(f1)), {});
        commands::cmd_report(dir);
        std::ifstream f2(dir + "/archive.csv");
        std::string after((std::istreambuf_iterator<char>(f2)), {});
        REQUIRE(before == after);
    }
}

TEST_CASE("optimize with a pre-processing pipeline records it", "[cli]") {
    TempTree tmp("fairhpo_cli_dir");
    RunConfig rc = tiny_run_config(tmp);
    rc.pipeline = PipelineDescriptor{PipelineStage::Kind::DirRepair, 1.0};
    rc.trial_budget = 3;
    std::string dir = commands::cmd_optimize(rc, tmp / "dir-run");
    csv::Table archive = csv::read_file(dir + "/archive.csv");
    size_t pcol = archive.column("pipeline");
    for (const auto& row : archive.rows)
        REQUIRE(row[pcol].find("dir-repair") != std::string::npos);
    // every logged trial carries the pipeline descriptor
    auto records = read_run_log(rc.make_space(), dir + "/log.jsonl");
    for (const auto& r : records) {
        REQUIRE(r.request.pipeline.has_value());
        REQUIRE(r.request.pipeline->repair_level == 1.0);
    }
}

TEST_CASE("compare command emits overlaid fronts and headline deltas", "[cli]") {
    TempTree tmp("fairhpo_cli_cmp");
    RunConfig rc = tiny_run_config(tmp);
    rc.trial_budget = 4;
    rc.seeds = {0};
    std::string dir = commands::cmd_compare(rc, tmp / "cmp-run");
    csv::Table fronts = csv::read_file(dir + "/fronts.csv");
    size_t mode_col = fronts.column("mode");
    bool saw_single = false, saw_multi = false;
    for (const auto& row : fronts.rows) {
        saw_single |= row[mode_col] == "single";
        saw_multi |= row[mode_col] == "multi";
    }
    REQUIRE(saw_single);
    REQUIRE(saw_multi);
    nlohmann::json cmp = commands::read_json(dir + "/compare.json");
    REQUIRE(cmp.at("seeds").size() == 1);
    REQUIRE(cmp.at("seeds")[0].contains("single_best"));
}

TEST_CASE("run config validation failures happen before any training", "[cli]") {
    TempTree tmp("fairhpo_cli_val");
    RunConfig rc = tiny_run_config(tmp);
    SECTION("missing schema file") {
        rc.schema_path = tmp / "nope.json";
        REQUIRE_THROWS_AS(commands::cmd_probe(rc, tmp / "x"), ValidationError);
    }
    SECTION("zero seeds") {
        rc.seeds.clear();
        REQUIRE_THROWS_AS(commands::cmd_probe(rc, tmp / "x"), ValidationError);
    }
    SECTION("disparate impact not selectable") {
        REQUIRE_THROWS_AS(RunConfig::parse_fairness("disparate_impact"), ValidationError);
    }
    SECTION("bad fractions") {
        rc.fractions = {0.5, 0.5, 0.5};
        REQUIRE_THROWS_AS(commands::cmd_probe(rc, tmp / "x"), ValidationError);
    }
}

TEST_CASE("cli binary: exit codes and end-to-end probe", "[cli][binary]") {
    TempTree tmp("fairhpo_cli_bin");
    REQUIRE(run_cli("gen --kind adult --rows 200 --seed 1 -o " + (tmp / "a.csv")) == 0);
    REQUIRE(fs::exists(tmp / "a.csv"));
    REQUIRE(fs::exists(tmp / "a.schema.json"));

    nlohmann::json cfg{
        {"dataset", {{"csv", tmp / "a.csv"}, {"schema", tmp / "a.schema.json"}}},
        {"family", "mlp"},
        {"hyperband", {{"min_budget", 1}, {"max_budget", 1}, {"eta", 3}}},
        {"n_configs", 2},
        {"seeds", {0}},
        {"out_dir", tmp / "runs"},
    };
    {
        std::ofstream out(tmp / "run.json");
        out << cfg.dump();
    }
    REQUIRE(run_cli("probe -c " + (tmp / "run.json") + " --serial --run-dir " + (tmp / "rd")) == 0);
    REQUIRE(fs::exists(tmp / "rd/summary.json"));
    REQUIRE(run_cli("report --run " + (tmp / "rd")) == 0);

    SECTION("validation failure exits 1") {
        nlohmann::json bad = cfg;
        bad["dataset"]["schema"] = tmp / "missing.json";
        std::ofstream out(tmp / "bad.json");
        out << bad.dump();
        out.close();
        REQUIRE(run_cli("probe -c " + (tmp / "bad.json")) == 1);
    }
    SECTION("unknown flags exit nonzero") {
        REQUIRE(run_cli("probe --definitely-not-a-flag") != 0);
    }
}
