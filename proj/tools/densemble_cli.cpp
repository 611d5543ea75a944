// Experiment harness for the dual-noise ensemble trainer.
//
//   densemble run <config>
//   densemble sweep <config> --grid <file>
//
// Exit codes: 0 success, 1 config error, 2 runtime error.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "densemble/config.hpp"
#include "densemble/experiment.hpp"

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw densemble::ConfigError("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

densemble::RunConfig load_config(const std::string& path) {
    densemble::ParsedConfig parsed = densemble::parse_config(read_file(path));
    for (const std::string& w : parsed.warnings) std::cerr << "warning: " << w << '\n';
    if (!parsed.ok()) {
        for (const std::string& e : parsed.errors) std::cerr << "config error: " << e << '\n';
        throw densemble::ConfigError("invalid config " + path);
    }
    return parsed.config;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"dual-noise deep-ensemble experiment harness"};
    app.require_subcommand(1);

    std::string run_config_path;
    CLI::App* run_cmd = app.add_subcommand("run", "execute one training run");
    run_cmd->add_option("config", run_config_path, "run configuration file")->required();

    std::string sweep_config_path, grid_path;
    CLI::App* sweep_cmd = app.add_subcommand("sweep", "grid of runs over eps1/eps2/M");
    sweep_cmd->add_option("config", sweep_config_path, "base configuration file")->required();
    sweep_cmd->add_option("--grid", grid_path, "grid file (eps1/eps2_percent/M = comma-separated values)")
        ->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1; // usage problems are config errors; --help stays 0
    }

    try {
        if (run_cmd->parsed()) {
            return densemble::execute(load_config(run_config_path));
        }
        densemble::RunConfig base = load_config(sweep_config_path);
        densemble::SweepGrid grid = densemble::parse_sweep_grid(read_file(grid_path));
        return densemble::sweep(base, grid);
    } catch (const densemble::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
