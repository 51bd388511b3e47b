#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "iteqd/archive.hpp"
#include "iteqd/gp.hpp"
#include "iteqd/random.hpp"

namespace iteqd {

/// Measures one genome on the (possibly damaged) system. Higher is better.
using TrialEvaluator = std::function<double(const Genome&)>;

struct AdaptConfig {
    double kappa = 0.05;
    double alpha = 0.9;
    double noise_var = 0.001;
    std::size_t max_trials = 20;
    KernelParams kernel{0.4, 1.0};

    bool alpha_stop = true;
    /// Stop as soon as a measurement reaches this value (arm: -target radius).
    std::optional<double> target_performance;
    /// Measurements below the floor are raised to it.
    std::optional<double> performance_floor;
    /// When set, an evaluator exception is recorded as this value instead of aborting.
    std::optional<double> failure_sentinel;
    /// Leading trials drawn uniformly among untested candidates instead of by UCB.
    std::size_t random_initial_trials = 0;
    std::uint64_t seed = 0;

    /// kappa 0.05, alpha 0.9, noise 0.001, rho 0.4, 20 trials.
    static AdaptConfig unit_cube_defaults();
    /// kappa 0.3, noise 0.03, rho 0.1 m, 31 trials, 5 cm target radius, alpha rule off.
    static AdaptConfig arm_defaults();
};

/// One point the search may test: a map cell (or a raw genome for direct search).
struct Candidate {
    std::uint64_t id = 0;   // flattened cell index; ties go to the lowest id
    Descriptor descriptor;  // location in the GP input space
    Genome genome;          // controller that gets tested
    double prior = 0.0;     // prior mean at `descriptor`
};

enum class StopReason { alpha_criterion, target_reached, max_trials };

std::string to_string(StopReason reason);

struct TrialEntry {
    std::size_t trial = 0; // 1-based
    std::uint64_t cell = 0;
    Descriptor descriptor;
    double predicted_mu = 0.0;
    double predicted_sigma = 0.0;
    double acquisition = 0.0;
    double measured = 0.0;
    double cumulative_best = 0.0;
    double max_mu_after = 0.0; // over all candidates, after the GP update
    double condition_estimate = 1.0;
    bool random_pick = false;
    bool stop = false;
};

struct TrialLog {
    std::vector<TrialEntry> entries;
};

struct AdaptResult {
    Elite best; // performance = measured value
    std::uint64_t best_cell = 0;
    StopReason reason = StopReason::max_trials;
    TrialLog log;
};

/// Index into `ids` of the largest mu + kappa * sqrt(var); ties go to the lowest id.
std::size_t ucb_argmax(std::span<const double> mu, std::span<const double> var, double kappa,
                       std::span<const std::uint64_t> ids);

/// Exhaustive UCB over the candidates. Returns the chosen candidate's id.
std::uint64_t ucb_select(const GpState& gp, std::span<const Candidate> candidates, double kappa);

/// True iff best_measured >= alpha * max_predicted_mu.
bool stop_check(double best_measured, double max_predicted_mu, double alpha);

/// Select / test / update loop over a fixed candidate set.
AdaptResult bayes_search(std::span<const Candidate> candidates, const TrialEvaluator& evaluate,
                         const AdaptConfig& config);

/// Prior value of a map cell during adaptation; defaults to the stored performance.
using CellPrior = std::function<double(const Elite&)>;

/// Map-based adaptation: every filled cell is a candidate at its stored descriptor.
AdaptResult adapt(const ArchiveGrid& grid, const TrialEvaluator& evaluate, const AdaptConfig& config,
                  const CellPrior& prior = {});

/// Candidates for every filled cell, ordered by flattened index.
std::vector<Candidate> map_candidates(const ArchiveGrid& grid, const CellPrior& prior = {});

} // namespace iteqd
