#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "fairhpo/commands.hpp"

namespace {

fairhpo::RunConfig load_config(const std::string& path, int workers, bool serial, bool svg) {
    fairhpo::RunConfig rc = fairhpo::RunConfig::load(path);
    if (workers > 0) rc.workers = workers;
    if (serial) rc.workers = 1;
    if (svg) rc.svg = true;
    return rc;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"fairness-aware multi-objective NAS+HPO for tabular classification"};
    app.require_subcommand(1);

    std::string config_path, run_dir, report_dir;
    int workers = 0;
    bool serial = false, svg = false;

    auto add_run_flags = [&](CLI::App* cmd) {
        cmd->add_option("-c,--config", config_path, "run config JSON")->required();
        cmd->add_option("--run-dir", run_dir, "explicit run directory (default: timestamped)");
        cmd->add_option("--workers", workers, "evaluation worker pool size");
        cmd->add_flag("--serial", serial, "force serialized (deterministic) execution");
        cmd->add_flag("--svg", svg, "also write SVG scatter plots");
    };

    CLI::App* probe = app.add_subcommand("probe", "random search-space probing scatter");
    add_run_flags(probe);
    CLI::App* optimize = app.add_subcommand("optimize", "multi-objective NAS+HPO run");
    add_run_flags(optimize);
    CLI::App* compare = app.add_subcommand("compare", "single- vs multi-objective comparison");
    add_run_flags(compare);

    CLI::App* report = app.add_subcommand("report", "regenerate reports from a run directory");
    report->add_option("--run", report_dir, "existing run directory")->required();

    std::string gen_kind = "adult", gen_out;
    size_t gen_rows = 2000;
    uint64_t gen_seed = 0;
    CLI::App* gen = app.add_subcommand("gen", "generate a benchmark stand-in CSV + schema");
    gen->add_option("--kind", gen_kind, "adult | compas | acs-income");
    gen->add_option("--rows", gen_rows, "row count");
    gen->add_option("--seed", gen_seed, "generator seed");
    gen->add_option("-o,--out", gen_out, "output CSV path")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (probe->parsed()) {
            std::string dir =
                fairhpo::commands::cmd_probe(load_config(config_path, workers, serial, svg), run_dir);
            std::cout << dir << "\n";
        } else if (optimize->parsed()) {
            std::string dir = fairhpo::commands::cmd_optimize(
                load_config(config_path, workers, serial, svg), run_dir);
            std::cout << dir << "\n";
        } else if (compare->parsed()) {
            std::string dir = fairhpo::commands::cmd_compare(
                load_config(config_path, workers, serial, svg), run_dir);
            std::cout << dir << "\n";
        } else if (report->parsed()) {
            std::cout << fairhpo::commands::cmd_report(report_dir) << "\n";
        } else if (gen->parsed()) {
            std::string schema = fairhpo::commands::cmd_gen(gen_kind, gen_rows, gen_seed, gen_out);
            std::cout << gen_out << "\n" << schema << "\n";
        }
    } catch (const fairhpo::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
