#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "iteqd/adapt.hpp"
#include "iteqd/archive.hpp"
#include "iteqd/arm.hpp"

namespace iteqd {

/// IT&E and its five knockouts: which of map / prior / BO is kept or replaced.
enum class VariantKind { ite, map_random, map_bo_noprior, map_policy_gradient, raw_bo, raw_policy_gradient };

inline constexpr std::array<VariantKind, 6> kAllVariants{
    VariantKind::ite,    VariantKind::map_random,         VariantKind::map_bo_noprior, VariantKind::map_policy_gradient,
    VariantKind::raw_bo, VariantKind::raw_policy_gradient,
};

std::string_view to_string(VariantKind kind);
std::optional<VariantKind> parse_variant(std::string_view name);
bool uses_map(VariantKind kind);
/// Smallest budget a variant accepts (one full gradient iteration for policy gradient).
std::size_t minimum_budget(VariantKind kind);

/// Multiplicative Gaussian noise on measured performance.
struct NoiseModel {
    bool enabled = false;
    double mean = 0.95;
    double stddev = 0.1;
    std::uint64_t seed = 0;
};

/// Wraps `evaluate` so each call multiplies its result by an independent N(mean, stddev) draw.
TrialEvaluator with_noise(TrialEvaluator evaluate, const NoiseModel& noise);

/// Finite-difference policy gradient with +eps / 0 / -eps perturbation groups.
struct PolicyGradientConfig {
    std::size_t perturbations = 15;
    double epsilon = 0.05; // fraction of each dimension's range
    double step = 0.05;    // fraction of each dimension's range
};

struct VariantSettings {
    AdaptConfig bo = AdaptConfig::arm_defaults(); // kappa / noise / rho for map-based BO
    KernelParams raw_kernel{0.4, 1.0};            // genome-space units
    std::size_t raw_candidates = 10000;           // random genomes scored by raw-space UCB
    std::size_t random_initial_trials = 5;
    PolicyGradientConfig policy_gradient;
};

/// Inputs shared by all variants on one task.
struct VariantTask {
    const ArchiveGrid* map = nullptr; // required by map-based kinds
    CellPrior prior;                  // map prediction per elite; stored performance when empty
    std::size_t genome_length = 8;
    TrialEvaluator evaluate;
};

/// Runs `kind` for exactly `budget` evaluations. No early stopping.
TrialLog run_variant(VariantKind kind, const VariantTask& task, std::size_t budget, std::uint64_t seed,
                     const VariantSettings& settings = {});

/// Linear-interpolation percentile (p in [0,1]) of the sorted values at rank p * (n - 1).
double percentile(std::vector<double> values, double p);

/// Best measured value within the first `cut` trials (all trials if the log is shorter).
double best_at_cut(const TrialLog& log, std::size_t cut);

struct VariantRun {
    VariantKind variant;
    std::string damage;
    std::size_t map_id = 0;
    std::uint64_t seed = 0;
    TrialLog log;
};

struct CutSummary {
    VariantKind variant;
    std::size_t cut = 0;
    std::size_t runs = 0;
    double median = 0.0;
    double p25 = 0.0;
    double p75 = 0.0;
};

/// Per variant and cut (cuts beyond the budget are skipped): median and quartiles of best_at_cut.
std::vector<CutSummary> summarize(const std::vector<VariantRun>& runs, const std::vector<std::size_t>& cuts);

/// Arm knockout experiment over maps x damages x seeds.
struct ArmBenchConfig {
    std::vector<VariantKind> variants{kAllVariants.begin(), kAllVariants.end()};
    std::vector<const ArchiveGrid*> maps;
    std::vector<arm::DamageSpec> damages;
    std::size_t seeds = 1; // replicates per (map, damage)
    std::size_t budget = 17;
    arm::Target target;
    NoiseModel noise;
    VariantSettings settings;
    std::uint64_t seed = 0;
    bool prescreen_raw = true; // score self-colliding raw-space genomes as -1
};

std::vector<VariantRun> run_arm_bench(const ArmBenchConfig& config);

} // namespace iteqd
