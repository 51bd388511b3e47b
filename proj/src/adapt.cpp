#include "iteqd/adapt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "iteqd/error.hpp"

namespace iteqd {

AdaptConfig AdaptConfig::unit_cube_defaults() { return AdaptConfig{}; }

AdaptConfig AdaptConfig::arm_defaults() {
    AdaptConfig c;
    c.kappa = 0.3;
    c.noise_var = 0.03;
    c.kernel = KernelParams{0.1, 1.0};
    c.max_trials = 31;
    c.alpha_stop = false;
    c.target_performance = -0.05;
    return c;
}

std::string to_string(StopReason reason) {
    switch (reason) {
    case StopReason::alpha_criterion:
        return "alpha_criterion";
    case StopReason::target_reached:
        return "target_reached";
    case StopReason::max_trials:
        return "max_trials";
    }
    return "unknown";
}

std::size_t ucb_argmax(std::span<const double> mu, std::span<const double> var, double kappa,
                       std::span<const std::uint64_t> ids) {
    if (mu.empty())
        throw ContractViolation("acquisition over an empty candidate set");
    require(var.size() == mu.size() && ids.size() == mu.size(), "acquisition inputs differ in length");
    std::size_t best = 0;
    double best_score = mu[0] + kappa * std::sqrt(var[0]);
    for (std::size_t i = 1; i < mu.size(); ++i) {
        const double score = mu[i] + kappa * std::sqrt(var[i]);
        if (score > best_score || (score == best_score && ids[i] < ids[best])) {
            best = i;
            best_score = score;
        }
    }
    return best;
}

namespace {

Eigen::MatrixXd points_of(std::span<const Candidate> candidates) {
    const auto dims = static_cast<Eigen::Index>(candidates.front().descriptor.size());
    Eigen::MatrixXd pts(static_cast<Eigen::Index>(candidates.size()), dims);
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        require(static_cast<Eigen::Index>(candidates[i].descriptor.size()) == dims,
                "candidates differ in descriptor dimension");
        for (Eigen::Index d = 0; d < dims; ++d)
            pts(static_cast<Eigen::Index>(i), d) = candidates[i].descriptor[static_cast<std::size_t>(d)];
    }
    return pts;
}

} // namespace

std::uint64_t ucb_select(const GpState& gp, std::span<const Candidate> candidates, double kappa) {
    if (candidates.empty())
        throw ContractViolation("ucb_select needs at least one candidate");
    const auto pts = points_of(candidates);
    std::vector<double> prior, mu(candidates.size()), var(candidates.size());
    std::vector<std::uint64_t> ids;
    for (const auto& c : candidates) {
        prior.push_back(c.prior);
        ids.push_back(c.id);
    }
    gp.posterior_batch(pts, prior, mu, var);
    return candidates[ucb_argmax(mu, var, kappa, ids)].id;
}

bool stop_check(double best_measured, double max_predicted_mu, double alpha) {
    return best_measured >= alpha * max_predicted_mu;
}

AdaptResult bayes_search(std::span<const Candidate> candidates, const TrialEvaluator& evaluate,
                         const AdaptConfig& config) {
    if (candidates.empty())
        throw ContractViolation("adaptation needs a non-empty candidate set");
    require(config.max_trials >= 1, "max_trials must be positive");
    require(config.kappa >= 0.0, "kappa must be non-negative");
    require(config.alpha > 0.0 && config.alpha <= 1.0, "alpha must lie in (0, 1]");

    const auto n = candidates.size();
    const auto pts = points_of(candidates);
    std::vector<double> prior(n), mu(n), var(n);
    std::vector<std::uint64_t> ids(n);
    for (std::size_t i = 0; i < n; ++i) {
        prior[i] = candidates[i].prior;
        ids[i] = candidates[i].id;
    }

    Rng rng(config.seed);
    std::vector<bool> tested(n, false);
    std::size_t tested_count = 0;
    std::vector<Observation> observations;

    auto gp = GpState::fit(PriorMean::constant(0.0), {}, config.noise_var, config.kernel);
    gp.posterior_batch(pts, prior, mu, var);

    AdaptResult result;
    double best = -std::numeric_limits<double>::infinity();
    std::size_t best_idx = 0;

    for (std::size_t trial = 1; trial <= config.max_trials; ++trial) {
        std::size_t pick;
        const bool random_pick = trial <= config.random_initial_trials && tested_count < n;
        if (random_pick) {
            auto k = rng.index(n - tested_count);
            pick = 0;
            for (;; ++pick)
                if (!tested[pick] && k-- == 0)
                    break;
        } else {
            pick = ucb_argmax(mu, var, config.kappa, ids);
        }
        const auto& cand = candidates[pick];

        TrialEntry e;
        e.trial = trial;
        e.cell = cand.id;
        e.descriptor = cand.descriptor;
        e.predicted_mu = mu[pick];
        e.predicted_sigma = std::sqrt(var[pick]);
        e.acquisition = mu[pick] + config.kappa * e.predicted_sigma;
        e.random_pick = random_pick;

        double measured;
        try {
            measured = evaluate(cand.genome);
        } catch (const std::exception&) {
            if (!config.failure_sentinel)
                throw;
            measured = *config.failure_sentinel;
        }
        if (config.performance_floor)
            measured = std::max(measured, *config.performance_floor);
        e.measured = measured;

        if (!tested[pick]) {
            tested[pick] = true;
            ++tested_count;
        }
        if (measured > best) {
            best = measured;
            best_idx = pick;
        }
        e.cumulative_best = best;

        observations.push_back(Observation{cand.descriptor, measured, cand.prior});
        gp = GpState::fit(PriorMean::constant(0.0), observations, config.noise_var, config.kernel);
        gp.posterior_batch(pts, prior, mu, var);
        e.max_mu_after = *std::max_element(mu.begin(), mu.end());
        e.condition_estimate = gp.condition_estimate();

        std::optional<StopReason> reason;
        if (config.target_performance && measured >= *config.target_performance)
            reason = StopReason::target_reached;
        else if (config.alpha_stop && stop_check(best, e.max_mu_after, config.alpha))
            reason = StopReason::alpha_criterion;
        else if (trial == config.max_trials)
            reason = StopReason::max_trials;

        e.stop = reason.has_value();
        result.log.entries.push_back(std::move(e));
        if (reason) {
            result.reason = *reason;
            break;
        }
    }

    const auto& winner = candidates[best_idx];
    result.best = Elite{winner.genome, winner.descriptor, best};
    result.best_cell = winner.id;
    return result;
}

std::vector<Candidate> map_candidates(const ArchiveGrid& grid, const CellPrior& prior) {
    std::vector<Candidate> out;
    out.reserve(grid.filled_count());
    for (const Cell* cell : grid.sorted_cells())
        out.push_back(Candidate{cell->index, cell->elite.descriptor, cell->elite.genome,
                                prior ? prior(cell->elite) : cell->elite.performance});
    return out;
}

AdaptResult adapt(const ArchiveGrid& grid, const TrialEvaluator& evaluate, const AdaptConfig& config,
                  const CellPrior& prior) {
    if (grid.empty())
        throw EmptyArchiveError("cannot adapt with an empty archive");
    const auto candidates = map_candidates(grid, prior);
    return bayes_search(candidates, evaluate, config);
}

} // namespace iteqd
