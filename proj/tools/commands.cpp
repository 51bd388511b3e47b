#include "commands.hpp"

#include <chrono>
#include <fstream>
#include <iostream>
#include <memory>
#include <thread>

#include "iteqd/adapt.hpp"
#include "iteqd/archive.hpp"
#include "iteqd/arm.hpp"
#include "iteqd/bench.hpp"
#include "iteqd/descriptors.hpp"
#include "iteqd/error.hpp"
#include "iteqd/map_elites.hpp"
#include "iteqd/text.hpp"
#include "json.hpp"

#ifndef ITEQD_VERSION
#define ITEQD_VERSION "0.0.0"
#endif

namespace iteqd::cli {

namespace {

using nlohmann::json;
using text::format_double;

// Seconds one arm trial takes on the real robot; only used for the reported adaptation time.
constexpr double kSecondsPerTrial = 2.5;

std::string comment_header(const RunConfig& config) {
    return std::string("# iteqd ") + ITEQD_VERSION + " config_hash=" + config.hash();
}

json json_header(const RunConfig& config) {
    return json{{"tool", "iteqd"}, {"version", ITEQD_VERSION}, {"config_hash", config.hash()}};
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot write '" + path + "'");
    return out;
}

void check_written(std::ostream& out, const std::string& path) {
    out.flush();
    if (!out)
        throw IoError("write to '" + path + "' failed");
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

void require_trial_task(const RunConfig& config) {
    const auto task = config.str("task");
    if (task == "trajectory")
        throw ConfigError("task 'trajectory' has no simulator; use 'descriptors compute' on recorded trajectories");
}

MutationConfig mutation_of(const RunConfig& config) {
    if (config.str("mutation") == "discrete")
        return MutationConfig::discrete(config.real("mutation_rate"));
    return MutationConfig::polynomial(config.real("mutation_rate"), config.real("eta_m"));
}

// Synthetic map task: behavior = leading genes, performance peaks at the cube center.
Evaluator synthetic_evaluator(std::size_t dims) {
    return Evaluator{"synthetic", [dims](const Genome& g) {
                         Evaluation e;
                         e.descriptor.assign(g.begin(), g.begin() + static_cast<std::ptrdiff_t>(dims));
                         for (double v : g)
                             e.performance -= (v - 0.5) * (v - 0.5);
                         return e;
                     }};
}

double synthetic_trial(const Genome& g, double shift) {
    double p = 0.0;
    for (double v : g)
        p -= (v - 0.5 - shift) * (v - 0.5 - shift);
    return p;
}

arm::DamageSpec damage_by_name(const std::string& name) {
    if (name == "none" || name.empty())
        return arm::DamageSpec{};
    if (name.size() >= 2 && (name[0] == 'C' || name[0] == 'c')) {
        const auto rest = std::string_view(name).substr(1);
        if (!rest.empty() && rest.find_first_not_of("0123456789") == std::string_view::npos) {
            const auto suite = arm::damage_suite();
            const auto k = text::parse_uint(rest, "damage index");
            if (k < 1 || k > suite.size())
                throw ConfigError("damage " + name + " is not in C1..C" + std::to_string(suite.size()));
            return suite[k - 1];
        }
    }
    return arm::load_damage(name);
}

AdaptConfig adapt_config(const RunConfig& config, bool arm_task) {
    auto c = arm_task ? AdaptConfig::arm_defaults() : AdaptConfig::unit_cube_defaults();
    c.kappa = config.real("kappa");
    c.alpha = config.real("alpha");
    c.noise_var = config.real("noise_var");
    c.kernel.rho = config.real("rho");
    c.max_trials = config.uint("max_trials");
    c.alpha_stop = config.flag("alpha_stop");
    if (arm_task)
        c.target_performance = -config.real("radius");
    c.seed = config.uint("seed");
    return c;
}

arm::Target target_of(const RunConfig& config) {
    return arm::Target{{config.real("bin_x"), config.real("bin_y")}, config.real("radius")};
}

LoadedArchive load_map_for_task(const std::string& path, const RunConfig& config) {
    auto loaded = load_archive(path);
    const auto expected = config.uint("genome_length");
    if (loaded.meta.genome_length != expected)
        throw SchemaError("archive '" + path + "' stores genomes of length " +
                          std::to_string(loaded.meta.genome_length) + ", task expects " + std::to_string(expected));
    if (loaded.grid.empty())
        throw EmptyArchiveError("archive '" + path + "' has no filled cells");
    return loaded;
}

json trial_json(const TrialEntry& t) {
    return json{{"trial", t.trial},
                {"cell", t.cell},
                {"descriptor", t.descriptor},
                {"predicted_mu", t.predicted_mu},
                {"predicted_sigma", t.predicted_sigma},
                {"acquisition", t.acquisition},
                {"measured", t.measured},
                {"cumulative_best", t.cumulative_best},
                {"max_mu_after", t.max_mu_after},
                {"condition_estimate", t.condition_estimate},
                {"random_pick", t.random_pick},
                {"stop", t.stop}};
}

std::vector<std::size_t> parse_sizes(const std::vector<std::string>& items, const std::string& what) {
    std::vector<std::size_t> out;
    for (const auto& s : items)
        out.push_back(text::parse_uint(s, what));
    return out;
}

} // namespace

void map_create(const RunConfig& config, const CommandIo& io) {
    require_trial_task(config);
    if (io.out.empty())
        throw ConfigError("map create needs --out");
    const bool arm_task = config.str("task") == "arm";

    MapElitesConfig me;
    me.total_iterations = config.uint("iterations");
    me.init_random_count = config.uint("init_random");
    me.genome_length = config.uint("genome_length");
    me.mutation = mutation_of(config);
    me.seed = config.uint("seed");
    me.workers = config.uint("workers");
    me.checkpoint_every = config.uint("checkpoint_every");

    GridSpec spec;
    Evaluator evaluator;
    if (arm_task) {
        spec = arm::Workspace{}.grid();
        evaluator = arm::map_evaluator();
    } else {
        const auto dims = config.uint("dims");
        if (dims == 0 || dims > me.genome_length)
            throw ConfigError("dims must lie in 1..genome_length");
        spec = GridSpec::uniform(dims, 0.0, 1.0, config.uint("bins"));
        evaluator = synthetic_evaluator(dims);
    }

    std::ofstream progress_file;
    std::ostream* progress = &std::cout;
    if (!io.progress.empty()) {
        progress_file = open_out(io.progress);
        progress = &progress_file;
    }
    *progress << json_header(config).dump() << '\n';
    auto sink = [progress](const Checkpoint& c) {
        *progress << json{{"iterations", c.iterations},
                          {"filled", c.stats.filled},
                          {"mean_perf", optional_number(c.stats.mean_performance)},
                          {"max_perf", optional_number(c.stats.max_performance)},
                          {"wall_seconds", c.wall_seconds}}
                         .dump()
                  << '\n';
        progress->flush();
    };

    const auto result = run_map_elites(me, spec, evaluator, sink);
    ArchiveMetadata meta{me.genome_length, result.evaluations, me.seed, config.hash(), ITEQD_VERSION};
    save_archive(io.out, result.archive, meta);
}

void map_stats(const RunConfig&, const CommandIo& io) {
    const auto loaded = load_archive(io.archive);
    const auto s = loaded.grid.stats();
    std::cout << "filled=" << s.filled << '\n'
              << "cells=" << loaded.grid.spec().total_cells() << '\n'
              << "mean_perf=" << (s.mean_performance ? format_double(*s.mean_performance) : "none") << '\n'
              << "max_perf=" << (s.max_performance ? format_double(*s.max_performance) : "none") << '\n'
              << "genome_length=" << loaded.meta.genome_length << '\n'
              << "evaluations=" << loaded.meta.evaluations << '\n'
              << "seed=" << loaded.meta.seed << '\n'
              << "config_hash=" << loaded.meta.config_hash << '\n'
              << "tool_version=" << loaded.meta.tool_version << '\n';
}

void map_export(const RunConfig& config, const CommandIo& io) {
    const auto loaded = load_archive(io.archive);
    std::ofstream file;
    std::ostream* out = &std::cout;
    if (!io.out.empty()) {
        file = open_out(io.out);
        out = &file;
    }
    const auto& spec = loaded.grid.spec();
    *out << comment_header(config) << " source_config_hash=" << loaded.meta.config_hash << '\n';
    *out << "cell";
    for (std::size_t d = 0; d < spec.dims(); ++d)
        *out << ",d" << d + 1;
    *out << ",performance";
    for (std::size_t g = 0; g < loaded.meta.genome_length; ++g)
        *out << ",g" << g + 1;
    *out << '\n';
    for (const auto* cell : loaded.grid.sorted_cells()) {
        *out << cell->index;
        for (double v : cell->elite.descriptor)
            *out << ',' << format_double(v);
        *out << ',' << format_double(cell->elite.performance);
        for (double v : cell->elite.genome)
            *out << ',' << format_double(v);
        *out << '\n';
    }
    if (!io.out.empty())
        check_written(*out, io.out);
}

void adapt_run(const RunConfig& config, const CommandIo& io) {
    require_trial_task(config);
    if (io.maps.empty())
        throw ConfigError("adapt run needs at least one --map");
    const bool arm_task = config.str("task") == "arm";
    const auto cfg = adapt_config(config, arm_task);
    const auto target = target_of(config);

    TrialEvaluator evaluate;
    CellPrior prior;
    std::string condition;
    if (arm_task) {
        const auto damage = damage_by_name(config.str("damage"));
        condition = damage.name;
        evaluate = [damage, target](const Genome& g) { return arm::adaptation_eval(g, damage, target); };
        prior = [target](const Elite& e) { return arm::target_prior(e.descriptor, target); };
    } else {
        const double shift = config.real("shift");
        condition = "shift=" + config.str("shift");
        evaluate = [shift](const Genome& g) { return synthetic_trial(g, shift); };
    }
    const bool drop_trigger = config.has("drop_threshold");
    const double drop_threshold = drop_trigger ? config.real("drop_threshold") : 0.0;

    const auto prefix = io.out_prefix.empty() ? std::string("adapt") : io.out_prefix;
    const auto trials_path = prefix + "_trials.jsonl";
    const auto summary_path = prefix + "_summary.csv";
    auto trials = open_out(trials_path);
    auto summary = open_out(summary_path);
    trials << json_header(config).dump() << '\n';
    summary << comment_header(config) << '\n' << "condition,map_id,trials,seconds,best_perf,stop_reason\n";

    for (std::size_t m = 0; m < io.maps.size(); ++m) {
        const auto loaded = load_map_for_task(io.maps[m], config);
        auto run_cfg = cfg;
        run_cfg.seed = split_seed(cfg.seed, m);

        AdaptResult result;
        std::string reason;
        bool adapted = true;
        if (drop_trigger) {
            // Adaptation starts only when the best stored behavior no longer performs.
            const auto candidates = map_candidates(loaded.grid, prior);
            std::size_t top = 0;
            for (std::size_t i = 1; i < candidates.size(); ++i)
                if (candidates[i].prior > candidates[top].prior)
                    top = i;
            const double measured = evaluate(candidates[top].genome);
            if (measured >= drop_threshold) {
                adapted = false;
                TrialEntry e;
                e.trial = 1;
                e.cell = candidates[top].id;
                e.descriptor = candidates[top].descriptor;
                e.predicted_mu = candidates[top].prior;
                e.measured = measured;
                e.cumulative_best = measured;
                e.stop = true;
                result.log.entries.push_back(e);
                result.best = Elite{candidates[top].genome, candidates[top].descriptor, measured};
                reason = "no_drop";
            }
        }
        if (adapted) {
            result = adapt(loaded.grid, evaluate, run_cfg, prior);
            reason = to_string(result.reason);
        }

        for (const auto& t : result.log.entries) {
            auto j = trial_json(t);
            j["map_id"] = m;
            j["condition"] = condition;
            trials << j.dump() << '\n';
        }
        const auto n = result.log.entries.size();
        summary << condition << ',' << m << ',' << n << ',' << format_double(kSecondsPerTrial * static_cast<double>(n))
                << ',' << format_double(result.best.performance) << ',' << reason << '\n';
    }
    check_written(trials, trials_path);
    check_written(summary, summary_path);
}

void bench_variants(const RunConfig& config, const CommandIo& io) {
    if (config.str("task") != "arm")
        throw ConfigError("bench variants runs on the arm task only");
    if (io.maps.empty())
        throw ConfigError("bench variants needs at least one --map");

    std::vector<LoadedArchive> maps;
    for (const auto& path : io.maps)
        maps.push_back(load_map_for_task(path, config));

    ArmBenchConfig bench;
    for (const auto& m : maps)
        bench.maps.push_back(&m.grid);
    for (const auto& d : config.list("damages"))
        bench.damages.push_back(damage_by_name(d));
    bench.seeds = config.uint("seeds");
    bench.budget = config.uint("budget");
    bench.target = target_of(config);
    bench.noise.enabled = config.flag("noise");
    bench.seed = config.uint("seed");
    bench.prescreen_raw = config.flag("prescreen_raw");
    bench.settings.bo = adapt_config(config, true);
    bench.settings.raw_candidates = config.uint("raw_candidates");
    const auto variant_names = config.list("variants");
    if (!(variant_names.size() == 1 && variant_names[0] == "all")) {
        bench.variants.clear();
        for (const auto& name : variant_names) {
            const auto kind = parse_variant(name);
            if (!kind)
                throw ConfigError("unknown variant '" + name + "'");
            bench.variants.push_back(*kind);
        }
    }
    if (bench.variants.empty())
        throw ConfigError("no variants selected");
    const auto cuts = parse_sizes(config.list("cuts"), "cut");

    // Run seeds do not depend on the variant list, so variants split across workers reproduce the serial runs.
    const auto workers = std::max<std::size_t>(1, std::min<std::size_t>(config.uint("workers"), bench.variants.size()));
    std::vector<std::vector<VariantRun>> per_variant(bench.variants.size());
    std::vector<std::exception_ptr> errors(workers);
    {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back([&, w] {
                try {
                    for (std::size_t v = w; v < bench.variants.size(); v += workers) {
                        auto one = bench;
                        one.variants = {bench.variants[v]};
                        per_variant[v] = run_arm_bench(one);
                    }
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        for (auto& t : pool)
            t.join();
    }
    for (const auto& e : errors)
        if (e)
            std::rethrow_exception(e);
    std::vector<VariantRun> runs;
    const auto per = per_variant.front().size();
    for (std::size_t i = 0; i < per; ++i)
        for (auto& v : per_variant)
            runs.push_back(std::move(v[i]));

    const auto prefix = io.out_prefix.empty() ? std::string("bench") : io.out_prefix;
    const auto summary_path = prefix + "_summary.csv";
    const auto runs_path = prefix + "_runs.csv";
    const auto trials_path = prefix + "_trials.jsonl";
    auto summary = open_out(summary_path);
    auto runs_csv = open_out(runs_path);
    auto trials = open_out(trials_path);

    summary << comment_header(config) << '\n' << "variant,cut,runs,median_perf_at_cut,p25,p75\n";
    for (const auto& s : summarize(runs, cuts))
        summary << to_string(s.variant) << ',' << s.cut << ',' << s.runs << ',' << format_double(s.median) << ','
                << format_double(s.p25) << ',' << format_double(s.p75) << '\n';

    runs_csv << comment_header(config) << '\n' << "variant,damage,map_id,seed,cut,best_perf_at_cut\n";
    trials << json_header(config).dump() << '\n';
    for (const auto& r : runs) {
        for (auto cut : cuts)
            if (cut <= bench.budget)
                runs_csv << to_string(r.variant) << ',' << r.damage << ',' << r.map_id << ',' << r.seed << ',' << cut
                         << ',' << format_double(best_at_cut(r.log, cut)) << '\n';
        for (const auto& t : r.log.entries) {
            auto j = trial_json(t);
            j["variant"] = to_string(r.variant);
            j["damage"] = r.damage;
            j["map_id"] = r.map_id;
            j["seed"] = r.seed;
            trials << j.dump() << '\n';
        }
    }
    check_written(summary, summary_path);
    check_written(runs_csv, runs_path);
    check_written(trials, trials_path);
}

void descriptors_compute(const RunConfig& config, const CommandIo& io) {
    if (io.traj.empty())
        throw ConfigError("descriptors compute needs --traj");
    const auto traj = gait::load_trajectory(io.traj);
    const auto kind_name = config.str("kind");
    std::vector<double> values;
    std::cout << comment_header(config) << '\n';
    if (kind_name == "random") {
        const auto basis = gait::random_descriptor_basis(config.uint("basis_seed"));
        std::cout << "# basis";
        for (const auto& c : basis)
            std::cout << ' ' << to_string(c.kind) << '.' << c.component;
        std::cout << '\n';
        values = gait::composed_descriptor(basis, traj);
    } else {
        const auto kind = gait::parse_descriptor_kind(kind_name);
        if (!kind)
            throw ConfigError("unknown descriptor kind '" + kind_name + "'");
        values = gait::descriptor(*kind, traj);
    }
    std::cout << kind_name;
    for (double v : values)
        std::cout << ',' << format_double(v);
    std::cout << '\n';
}

} // namespace iteqd::cli
