#pragma once

// Subcommands behind the stochmem executable. Each writes CSV files into the
// configured output directory, with a `<file>.meta` sidecar holding the full
// effective configuration. Passing a sidecar back as --config replays the run.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "stochmem/config.hpp"

namespace stochmem {

enum ExitCode : int {
    kExitOk = 0,
    kExitRuntime = 1,
    kExitConfig = 2,
    kExitValidity = 3,
    kExitBlowUp = 4,
};

struct CommandOutput {
    std::vector<std::filesystem::path> files;
    std::vector<std::string> summary;  // human-readable lines for stdout
    int exit_code = kExitOk;
};

struct CommandContext {
    std::size_t workers = 1;
};

CommandOutput cmd_simulate(const ExperimentConfig& config, const CommandContext& ctx);
CommandOutput cmd_ensemble(const ExperimentConfig& config, const CommandContext& ctx);
CommandOutput cmd_spectrum(const ExperimentConfig& config, const CommandContext& ctx);
CommandOutput cmd_hysteresis(const ExperimentConfig& config, const CommandContext& ctx);
CommandOutput cmd_sweep(const ExperimentConfig& config, const CommandContext& ctx);
CommandOutput cmd_oracle(const ExperimentConfig& config, const CommandContext& ctx);
CommandOutput cmd_validate(const ExperimentConfig& config, const CommandContext& ctx);

inline constexpr std::string_view kCommandNames[] = {"simulate",   "ensemble", "spectrum", "hysteresis",
                                                     "sweep",      "oracle",   "validate"};

struct Invocation {
    std::string command;
    std::filesystem::path config;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> workers;
    std::optional<std::string> out_dir;
};

/// Loads the config, applies overrides, runs the command and maps failures
/// to exit codes. Diagnostics go to err, summaries to out.
int run_command(const Invocation& inv, std::ostream& out, std::ostream& err);

}  // namespace stochmem
