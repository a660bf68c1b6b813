// Command-line entry point: evolve, transfer, replay, report.

#include <iostream>

#include <CLI11.hpp>

#include "voxevo/commands.hpp"
#include "voxevo/config.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Voxel soft-robot brain-body co-optimization"};
    app.require_subcommand(1);

    voxevo::CommandOptions opts;
    std::string out_path;
    std::uint64_t seed = 0;
    int workers = 0;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--seed", seed, "Override the master seed");
        cmd->add_option("--workers", workers, "Parallel episode evaluations (default: VOXEVO_WORKERS or all cores)");
        cmd->add_option("--out", out_path, "Output path");
    };

    auto* evolve = app.add_subcommand("evolve", "Run evolution (a battery when n_runs > 1)");
    evolve->add_option("--config", opts.config, "Run configuration file")->required()->check(CLI::ExistingFile);
    add_common(evolve);

    auto* transfer = app.add_subcommand("transfer", "Zero- and one-shot transfer to neighboring bodies");
    transfer->add_option("--config", opts.config, "Run configuration file")->required()->check(CLI::ExistingFile);
    transfer->add_option("champion", opts.champion, "Champion checkpoint")->required();
    add_common(transfer);

    auto* replay = app.add_subcommand("replay", "Record one episode of a champion as JSON lines");
    replay->add_option("champion", opts.champion, "Champion checkpoint")->required();
    replay->add_option("--config", opts.config, "Run configuration (physics/episode settings)")
        ->check(CLI::ExistingFile);
    add_common(replay);

    auto* report = app.add_subcommand("report", "Summarize a run or battery directory");
    report->add_option("run_dir", opts.run_dir, "Run or battery directory")->required();
    add_common(report);

    auto* example = app.add_subcommand("default-config", "Print a configuration with every key and its default");

    CLI11_PARSE(app, argc, argv);

    if (!out_path.empty()) opts.out = out_path;
    for (auto* cmd : {evolve, transfer, replay, report}) {
        if (!cmd->parsed()) continue;
        if (cmd->count("--seed")) opts.seed = seed;
        if (cmd->count("--workers")) opts.workers = workers;
    }

    if (evolve->parsed()) return voxevo::cmd_evolve(opts, std::cout, std::cerr);
    if (transfer->parsed()) return voxevo::cmd_transfer(opts, std::cout, std::cerr);
    if (replay->parsed()) return voxevo::cmd_replay(opts, std::cout, std::cerr);
    if (report->parsed()) return voxevo::cmd_report(opts, std::cout, std::cerr);
    if (example->parsed()) {
        std::cout << voxevo::default_config_text();
        return 0;
    }
    return 2;
}
