#include <iostream>

#include <CLI11.hpp>

#include "stochmem/commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Stochastic memristor simulations: trajectories, ensembles, spectra and sweeps"};
    app.require_subcommand(1);

    stochmem::Invocation inv;
    std::uint64_t seed = 0;
    std::size_t workers = 0;
    std::string out_dir;

    for (auto name : stochmem::kCommandNames) {
        auto* sub = app.add_subcommand(std::string(name));
        sub->add_option("--config", inv.config, "experiment config, or a .meta sidecar to replay")
            ->check(CLI::ExistingFile);
        sub->add_option("--seed", seed, "base seed (overrides run.seed)");
        sub->add_option("--workers", workers, "worker threads (default: hardware parallelism)");
        sub->add_option("--out", out_dir, "output directory (overrides out.dir)");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : stochmem::kExitConfig;
    }

    const auto* sub = app.get_subcommands().front();
    inv.command = sub->get_name();
    if (sub->count("--seed")) inv.seed = seed;
    if (sub->count("--workers")) inv.workers = workers;
    if (sub->count("--out")) inv.out_dir = out_dir;
    return stochmem::run_command(inv, std::cout, std::cerr);
}
