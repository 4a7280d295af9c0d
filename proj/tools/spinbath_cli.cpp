// spinbath — exact-dynamics simulator of two central spins decohered by an
// interacting spin-1/2 bath.
//
// Usage: spinbath <command> --config <file> [--out <dir>] [--workers <n>]
//                 [--seed <u64>]
// Commands: propagate, spectrum, fit, sweep, collapse.
// Exit codes: 0 success, 2 config error, 3 runtime failure.

#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "spinbath/experiment.hpp"
#include "spinbath/version.hpp"

namespace {

struct CommonOptions {
    std::string config_path;
    std::string out_dir;
    int workers = 0;
    std::uint64_t seed = 0;
    bool seed_given = false;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
    cmd->add_option("--config", opts.config_path, "experiment configuration file (JSON)")
        ->required();
    cmd->add_option("--out", opts.out_dir, "output directory (overrides config)");
    cmd->add_option("--workers", opts.workers,
                    "parallel workers (default: hardware concurrency)");
    cmd->add_option("--seed", opts.seed, "master seed (overrides config)")
        ->each([&opts](const std::string&) { opts.seed_given = true; });
}

int run(spinbath::Command command, const CommonOptions& opts) {
    spinbath::ExperimentConfig config;
    try {
        config = spinbath::load_config_file(opts.config_path);
        if (opts.seed_given) config.model.seed = opts.seed;
    } catch (const spinbath::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    }
    try {
        const std::string out =
            spinbath::run_experiment(config, command, opts.out_dir, opts.workers);
        std::cout << "wrote " << out << '\n';
        return 0;
    } catch (const spinbath::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"spin-bath decoherence simulator"};
    app.set_version_flag("--version", spinbath::kVersion);
    app.require_subcommand(1);

    CommonOptions opts;
    spinbath::Command command = spinbath::Command::propagate;

    for (const auto& name : {"propagate", "spectrum", "fit", "sweep", "collapse"}) {
        CLI::App* sub = app.add_subcommand(
            name, std::string("run the ") + name + " experiment");
        add_common(sub, opts);
        sub->callback([&command, name] {
            command = spinbath::command_from_string(name);
        });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }
    return run(command, opts);
}
