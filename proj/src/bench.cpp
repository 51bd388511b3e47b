#include "iteqd/bench.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include "iteqd/error.hpp"

namespace iteqd {

std::string_view to_string(VariantKind kind) {
    switch (kind) {
    case VariantKind::ite:
        return "ite";
    case VariantKind::map_random:
        return "map_random";
    case VariantKind::map_bo_noprior:
        return "map_bo_noprior";
    case VariantKind::map_policy_gradient:
        return "map_policy_gradient";
    case VariantKind::raw_bo:
        return "raw_bo";
    case VariantKind::raw_policy_gradient:
        return "raw_policy_gradient";
    }
    return "unknown";
}

std::optional<VariantKind> parse_variant(std::string_view name) {
    for (auto k : kAllVariants)
        if (to_string(k) == name)
            return k;
    return std::nullopt;
}

bool uses_map(VariantKind kind) {
    return kind == VariantKind::ite || kind == VariantKind::map_random || kind == VariantKind::map_bo_noprior ||
           kind == VariantKind::map_policy_gradient;
}

std::size_t minimum_budget(VariantKind kind) {
    if (kind == VariantKind::map_policy_gradient || kind == VariantKind::raw_policy_gradient)
        return PolicyGradientConfig{}.perturbations;
    return 1;
}

TrialEvaluator with_noise(TrialEvaluator evaluate, const NoiseModel& noise) {
    if (!noise.enabled)
        return evaluate;
    auto rng = std::make_shared<Rng>(noise.seed);
    return [evaluate = std::move(evaluate), rng, noise](const Genome& g) {
        return evaluate(g) * rng->normal(noise.mean, noise.stddev);
    };
}

namespace {

struct Probe {
    std::uint64_t id = 0;
    Descriptor descriptor;
    Genome genome;
};

void record(TrialLog& log, const Probe& probe, double measured) {
    TrialEntry e;
    e.trial = log.entries.size() + 1;
    e.cell = probe.id;
    e.descriptor = probe.descriptor;
    e.measured = measured;
    e.cumulative_best = log.entries.empty() ? measured : std::max(measured, log.entries.back().cumulative_best);
    e.random_pick = true;
    log.entries.push_back(std::move(e));
}

TrialLog map_random_search(const std::vector<Candidate>& cells, const TrialEvaluator& evaluate, std::size_t budget,
                           Rng& rng) {
    TrialLog log;
    std::vector<std::size_t> untested(cells.size());
    for (std::size_t i = 0; i < untested.size(); ++i)
        untested[i] = i;
    for (std::size_t t = 0; t < budget; ++t) {
        std::size_t pick;
        if (untested.empty()) {
            pick = rng.index(cells.size());
        } else {
            const auto k = rng.index(untested.size());
            pick = untested[k];
            untested[k] = untested.back();
            untested.pop_back();
        }
        const auto& c = cells[pick];
        record(log, Probe{c.id, c.descriptor, c.genome}, evaluate(c.genome));
    }
    return log;
}

// Kohl & Stone style gradient estimate from +eps / 0 / -eps perturbation groups.
template <typename Propose>
TrialLog policy_gradient(std::vector<double> theta, const std::vector<double>& lower, const std::vector<double>& upper,
                         Propose propose, const TrialEvaluator& evaluate, std::size_t budget,
                         const PolicyGradientConfig& cfg, Rng& rng) {
    const auto dims = theta.size();
    TrialLog log;
    std::vector<std::vector<int>> signs(cfg.perturbations, std::vector<int>(dims));
    std::vector<double> scores(cfg.perturbations);

    while (log.entries.size() < budget) {
        std::size_t done = 0;
        for (std::size_t j = 0; j < cfg.perturbations && log.entries.size() < budget; ++j, ++done) {
            std::vector<double> point(dims);
            for (std::size_t d = 0; d < dims; ++d) {
                signs[j][d] = static_cast<int>(rng.index(3)) - 1;
                const double range = upper[d] - lower[d];
                point[d] = std::clamp(theta[d] + cfg.epsilon * range * signs[j][d], lower[d], upper[d]);
            }
            Probe probe = propose(point);
            scores[j] = evaluate(probe.genome);
            record(log, probe, scores[j]);
        }
        if (done < cfg.perturbations)
            break; // truncated last iteration: budget exhausted

        std::vector<double> adjust(dims, 0.0);
        for (std::size_t d = 0; d < dims; ++d) {
            double sum[3] = {0, 0, 0};
            std::size_t count[3] = {0, 0, 0};
            for (std::size_t j = 0; j < cfg.perturbations; ++j) {
                sum[signs[j][d] + 1] += scores[j];
                ++count[signs[j][d] + 1];
            }
            if (count[0] == 0 || count[2] == 0)
                continue;
            const double minus = sum[0] / count[0];
            const double plus = sum[2] / count[2];
            const double zero = count[1] ? sum[1] / count[1] : -std::numeric_limits<double>::infinity();
            if (zero > plus && zero > minus)
                continue;
            adjust[d] = plus - minus;
        }
        double norm = 0.0;
        for (double a : adjust)
            norm += a * a;
        norm = std::sqrt(norm);
        if (norm > 0.0)
            for (std::size_t d = 0; d < dims; ++d)
                theta[d] = std::clamp(theta[d] + cfg.step * (upper[d] - lower[d]) * adjust[d] / norm, lower[d], upper[d]);
    }
    return log;
}

std::size_t nearest(const std::vector<Candidate>& cells, const std::vector<double>& point) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < cells.size(); ++i) {
        double d = 0.0;
        for (std::size_t k = 0; k < point.size(); ++k) {
            const double diff = cells[i].descriptor[k] - point[k];
            d += diff * diff;
        }
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return best;
}

} // namespace

TrialLog run_variant(VariantKind kind, const VariantTask& task, std::size_t budget, std::uint64_t seed,
                     const VariantSettings& settings) {
    if (budget < minimum_budget(kind))
        throw ConfigError("budget " + std::to_string(budget) + " is below the minimum of " +
                          std::to_string(minimum_budget(kind)) + " for variant " + std::string(to_string(kind)));
    if (!task.evaluate)
        throw ConfigError("variant task has no trial evaluator");
    if (uses_map(kind) && (task.map == nullptr || task.map->empty()))
        throw EmptyArchiveError("variant " + std::string(to_string(kind)) + " needs a non-empty map");

    Rng rng(seed);
    switch (kind) {
    case VariantKind::ite: {
        AdaptConfig cfg = settings.bo;
        cfg.max_trials = budget;
        cfg.alpha_stop = false;
        cfg.target_performance.reset();
        cfg.random_initial_trials = 0;
        cfg.seed = seed;
        return adapt(*task.map, task.evaluate, cfg, task.prior).log;
    }
    case VariantKind::map_random:
        return map_random_search(map_candidates(*task.map, task.prior), task.evaluate, budget, rng);
    case VariantKind::map_bo_noprior: {
        auto cells = map_candidates(*task.map, task.prior);
        double mean = 0.0;
        for (const auto& c : cells)
            mean += c.prior;
        mean /= static_cast<double>(cells.size());
        double var = 0.0;
        for (const auto& c : cells)
            var += (c.prior - mean) * (c.prior - mean);
        var /= static_cast<double>(cells.size());
        for (auto& c : cells)
            c.prior = mean;

        AdaptConfig cfg = settings.bo;
        cfg.max_trials = budget;
        cfg.alpha_stop = false;
        cfg.target_performance.reset();
        cfg.random_initial_trials = settings.random_initial_trials;
        cfg.kernel.signal_var = var > 0.0 ? var : 1.0;
        cfg.seed = seed;
        return bayes_search(cells, task.evaluate, cfg).log;
    }
    case VariantKind::map_policy_gradient: {
        auto cells = map_candidates(*task.map, task.prior);
        const auto& spec = task.map->spec();
        const auto start = cells[rng.index(cells.size())].descriptor;
        auto propose = [&cells](const std::vector<double>& point) {
            const auto& c = cells[nearest(cells, point)];
            return Probe{c.id, c.descriptor, c.genome};
        };
        return policy_gradient(start, spec.lower, spec.upper, propose, task.evaluate, budget,
                               settings.policy_gradient, rng);
    }
    case VariantKind::raw_bo: {
        std::vector<Candidate> pool(settings.raw_candidates);
        for (std::size_t i = 0; i < pool.size(); ++i) {
            Genome g(task.genome_length);
            for (auto& v : g)
                v = rng.uniform();
            pool[i] = Candidate{i, g, g, 0.0};
        }
        AdaptConfig cfg = settings.bo;
        cfg.max_trials = budget;
        cfg.alpha_stop = false;
        cfg.target_performance.reset();
        cfg.random_initial_trials = settings.random_initial_trials;
        cfg.kernel = settings.raw_kernel;
        cfg.seed = split_seed(seed, 1);
        return bayes_search(pool, task.evaluate, cfg).log;
    }
    case VariantKind::raw_policy_gradient: {
        std::vector<double> start(task.genome_length);
        for (auto& v : start)
            v = rng.uniform();
        auto propose = [](const std::vector<double>& point) { return Probe{0, point, point}; };
        return policy_gradient(start, std::vector<double>(task.genome_length, 0.0),
                               std::vector<double>(task.genome_length, 1.0), propose, task.evaluate, budget,
                               settings.policy_gradient, rng);
    }
    }
    throw ContractViolation("unknown variant");
}

double percentile(std::vector<double> values, double p) {
    require(!values.empty(), "percentile of an empty set");
    require(p >= 0.0 && p <= 1.0, "percentile rank must lie in [0,1]");
    std::sort(values.begin(), values.end());
    const double h = p * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

double best_at_cut(const TrialLog& log, std::size_t cut) {
    require(!log.entries.empty() && cut >= 1, "best_at_cut needs a non-empty log and a positive cut");
    return log.entries[std::min(cut, log.entries.size()) - 1].cumulative_best;
}

std::vector<CutSummary> summarize(const std::vector<VariantRun>& runs, const std::vector<std::size_t>& cuts) {
    std::vector<CutSummary> out;
    for (auto kind : kAllVariants) {
        std::size_t longest = 0;
        for (const auto& r : runs)
            if (r.variant == kind)
                longest = std::max(longest, r.log.entries.size());
        if (longest == 0)
            continue;
        for (auto cut : cuts) {
            if (cut > longest)
                continue;
            std::vector<double> values;
            for (const auto& r : runs)
                if (r.variant == kind)
                    values.push_back(best_at_cut(r.log, cut));
            out.push_back(CutSummary{kind, cut, values.size(), percentile(values, 0.5), percentile(values, 0.25),
                                     percentile(values, 0.75)});
        }
    }
    return out;
}

std::vector<VariantRun> run_arm_bench(const ArmBenchConfig& config) {
    if (config.damages.empty())
        throw ConfigError("bench needs at least one damage condition");
    if (config.maps.empty())
        throw ConfigError("bench needs at least one map");
    for (auto kind : config.variants)
        if (config.budget < minimum_budget(kind))
            throw ConfigError("budget " + std::to_string(config.budget) + " is below the minimum of " +
                              std::to_string(minimum_budget(kind)) + " for variant " + std::string(to_string(kind)));

    std::vector<VariantRun> runs;
    std::uint64_t stream = 0;
    for (std::size_t m = 0; m < config.maps.size(); ++m)
        for (const auto& damage : config.damages)
            for (std::size_t r = 0; r < config.seeds; ++r, ++stream) {
                const auto run_seed = split_seed(config.seed, stream);
                for (auto kind : config.variants) {
                    const bool raw = !uses_map(kind);
                    arm::TrialOptions opts{raw && config.prescreen_raw};
                    TrialEvaluator eval = [damage, target = config.target, opts](const Genome& g) {
                        return arm::adaptation_eval(g, damage, target, {}, {}, opts);
                    };
                    NoiseModel noise = config.noise;
                    noise.seed = split_seed(run_seed, 100 + static_cast<std::uint64_t>(kind));
                    VariantTask task{config.maps[m],
                                     [target = config.target](const Elite& e) { return arm::target_prior(e.descriptor, target); },
                                     arm::kJoints, with_noise(eval, noise)};
                    runs.push_back(VariantRun{kind, damage.name, m, run_seed,
                                              run_variant(kind, task, config.budget, run_seed, config.settings)});
                }
            }
    return runs;
}

} // namespace iteqd
