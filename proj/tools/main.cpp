#include <exception>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "commands.hpp"
#include "iteqd/error.hpp"

namespace {

using iteqd::cli::CommandIo;
using iteqd::cli::RunConfig;

constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

/// Values given on the command line for hashed configuration keys.
struct FlagValues {
    std::string config_path;
    std::map<std::string, std::string> values;
};

void key_option(CLI::App* cmd, const std::string& flag, const std::string& key, FlagValues& flags,
                const std::string& help) {
    cmd->add_option_function<std::string>(flag, [&flags, key](const std::string& v) { flags.values[key] = v; }, help);
}

RunConfig resolve(const FlagValues& flags) {
    RunConfig config;
    if (!flags.config_path.empty())
        config.load_file(flags.config_path);
    config.apply_environment();
    for (const auto& [k, v] : flags.values)
        config.set(k, v);
    config.resolve_task_defaults();
    return config;
}

void map_options(CLI::App* cmd, FlagValues& flags) {
    key_option(cmd, "--task", "task", flags, "arm or synthetic");
    key_option(cmd, "--iterations", "iterations", flags, "total evaluations, random initialization included");
    key_option(cmd, "--init-random", "init_random", flags, "random genomes before selection starts");
    key_option(cmd, "--mutation", "mutation", flags, "polynomial or discrete");
    key_option(cmd, "--mutation-rate", "mutation_rate", flags, "per-gene mutation probability");
    key_option(cmd, "--genome-length", "genome_length", flags, "genes per controller");
    key_option(cmd, "--dims", "dims", flags, "behavior dimensions (synthetic task)");
    key_option(cmd, "--bins", "bins", flags, "bins per behavior dimension (synthetic task)");
    key_option(cmd, "--seed", "seed", flags, "random seed");
    key_option(cmd, "--workers", "workers", flags, "evaluation threads; more than 1 is not bit-identical to serial");
    key_option(cmd, "--checkpoint-every", "checkpoint_every", flags, "iterations between progress lines");
}

void adapt_options(CLI::App* cmd, FlagValues& flags) {
    key_option(cmd, "--task", "task", flags, "arm or synthetic");
    key_option(cmd, "--seed", "seed", flags, "random seed");
    key_option(cmd, "--rho", "rho", flags, "kernel length scale");
    key_option(cmd, "--kappa", "kappa", flags, "exploration weight of the acquisition");
    key_option(cmd, "--alpha", "alpha", flags, "stop when the best trial reaches alpha times the best prediction");
    key_option(cmd, "--alpha-stop", "alpha_stop", flags, "enable the alpha stopping rule");
    key_option(cmd, "--noise-var", "noise_var", flags, "observation noise variance");
    key_option(cmd, "--max-trials", "max_trials", flags, "trial budget");
    key_option(cmd, "--bin-x", "bin_x", flags, "target x (m)");
    key_option(cmd, "--bin-y", "bin_y", flags, "target y (m)");
    key_option(cmd, "--radius", "radius", flags, "success radius around the target (m)");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Behavior-performance maps and trial-and-error damage recovery", "iteqd"};
    app.set_version_flag("--version", ITEQD_VERSION);
    app.require_subcommand(1);

    FlagValues flags;
    CommandIo io;
    app.add_option("--config", flags.config_path, "key=value configuration file")->check(CLI::ExistingFile);

    auto* map = app.add_subcommand("map", "create and inspect behavior-performance maps");
    map->require_subcommand(1);
    auto* create = map->add_subcommand("create", "illuminate the behavior space with MAP-Elites");
    map_options(create, flags);
    create->add_option("--out", io.out, "archive file to write")->required();
    create->add_option("--progress", io.progress, "progress JSONL file (default: stdout)");

    auto* stats = map->add_subcommand("stats", "summarize an archive");
    stats->add_option("archive", io.archive, "archive file")->required();
    auto* exporter = map->add_subcommand("export", "write an archive as plain CSV");
    exporter->add_option("archive", io.archive, "archive file")->required();
    exporter->add_option("--out", io.out, "CSV file (default: stdout)");

    auto* adapt = app.add_subcommand("adapt", "recover from damage with a map prior");
    adapt->require_subcommand(1);
    auto* run = adapt->add_subcommand("run", "map-based Bayesian optimization on a damaged system");
    adapt_options(run, flags);
    run->add_option("--map", io.maps, "archive file; repeat for several maps")->required();
    key_option(run, "--damage", "damage", flags, "none, C1..C14 or a damage CSV file");
    key_option(run, "--shift", "shift", flags, "optimum shift of the synthetic task");
    key_option(run, "--drop-threshold", "drop_threshold", flags,
               "adapt only if the best stored behavior measures below this value");
    run->add_option("--out-prefix", io.out_prefix, "prefix of the trial JSONL and summary CSV (default: adapt)");

    auto* bench = app.add_subcommand("bench", "compare IT&E with its knockout variants");
    bench->require_subcommand(1);
    auto* variants = bench->add_subcommand("variants", "run every variant on maps x damages x seeds");
    adapt_options(variants, flags);
    variants->add_option("--maps", io.maps, "archive files")->required()->delimiter(',');
    key_option(variants, "--damages", "damages", flags, "comma-separated damages (C1..C14 or files)");
    key_option(variants, "--seeds", "seeds", flags, "replicates per map and damage");
    key_option(variants, "--budget", "budget", flags, "evaluations per run");
    key_option(variants, "--variants", "variants", flags, "comma-separated variants or 'all'");
    key_option(variants, "--noise", "noise", flags, "multiplicative measurement noise (true/false)");
    key_option(variants, "--cuts", "cuts", flags, "trial counts at which results are summarized");
    key_option(variants, "--raw-candidates", "raw_candidates", flags, "random genomes scored by raw-space BO");
    key_option(variants, "--workers", "workers", flags, "threads; results do not depend on it");
    variants->add_option("--out-prefix", io.out_prefix, "prefix of the output files (default: bench)");

    auto* desc = app.add_subcommand("descriptors", "hexapod behavior descriptors");
    desc->require_subcommand(1);
    auto* compute = desc->add_subcommand("compute", "descriptor of a recorded trajectory");
    key_option(compute, "--kind", "kind", flags, "descriptor name or 'random'");
    key_option(compute, "--basis-seed", "basis_seed", flags, "seed of the random 6-component basis");
    compute->add_option("--traj", io.traj, "trajectory CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        const auto config = resolve(flags);
        if (*create)
            iteqd::cli::map_create(config, io);
        else if (*stats)
            iteqd::cli::map_stats(config, io);
        else if (*exporter)
            iteqd::cli::map_export(config, io);
        else if (*run)
            iteqd::cli::adapt_run(config, io);
        else if (*variants)
            iteqd::cli::bench_variants(config, io);
        else if (*compute)
            iteqd::cli::descriptors_compute(config, io);
    } catch (const iteqd::ConfigError& e) {
        std::cerr << "iteqd: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "iteqd: " << e.what() << '\n';
        return kExitRuntime;
    }
    return 0;
}
