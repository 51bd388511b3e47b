#pragma once

#include <functional>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Cholesky>

#include "iteqd/archive.hpp"

namespace iteqd {

/// Matérn kernel with nu = 5/2. `signal_var` scales k(x,x); M-BOA uses 1.
struct KernelParams {
    double rho = 0.4;
    double signal_var = 1.0;
};

/// Unit-variance Matérn-5/2 correlation between two points of equal dimension.
double matern52(std::span<const double> x1, std::span<const double> x2, double rho);

/// Same kernel as a function of the Euclidean distance.
double matern52_distance(double d, double rho);

double kernel(const KernelParams& params, std::span<const double> x1, std::span<const double> x2);

/// Prior mean of the GP: either a constant or a per-point function (e.g. the map's prediction).
class PriorMean {
public:
    static PriorMean constant(double value);
    static PriorMean function(std::function<double(std::span<const double>)> fn);

    double operator()(std::span<const double> x) const { return fn_ ? fn_(x) : constant_; }

private:
    double constant_ = 0.0;
    std::function<double(std::span<const double>)> fn_;
};

struct Observation {
    Descriptor chi;
    double measured = 0.0;
    double prior_at_chi = 0.0;
};

struct Posterior {
    double mu = 0.0;
    double var = 0.0;
};

/// GP conditioned on a list of observations; immutable after fit().
///
/// The mean models the residual between measurements and the prior:
///   mu(x)  = prior(x) + k^T K^-1 (P - prior(chi))
///   var(x) = k(x,x) - k^T K^-1 k,   K = [k(chi_i, chi_j)] + noise_var I
class GpState {
public:
    /// Factorizes K. If plain Cholesky fails, retries with diagonal jitter
    /// 1e-10, 1e-9, ..., 1e-6; throws IllConditionedKernel after the last step.
    static GpState fit(PriorMean prior, std::vector<Observation> observations, double noise_var,
                       KernelParams kernel);

    Posterior posterior(std::span<const double> x) const;
    Posterior posterior(std::span<const double> x, double prior_at_x) const;

    /// Posterior at every row of `points` (one point per row) given the prior value there.
    void posterior_batch(const Eigen::MatrixXd& points, std::span<const double> prior_at_points,
                         std::span<double> mu_out, std::span<double> var_out) const;

    const std::vector<Observation>& observations() const noexcept { return observations_; }
    const KernelParams& kernel_params() const noexcept { return kernel_; }
    double noise_var() const noexcept { return noise_var_; }
    double jitter() const noexcept { return jitter_; }
    /// Reciprocal of the Cholesky reciprocal-condition estimate of K (1 with no observations).
    double condition_estimate() const noexcept { return condition_; }

private:
    GpState() = default;

    PriorMean prior_;
    std::vector<Observation> observations_;
    double noise_var_ = 0.0;
    KernelParams kernel_;
    double jitter_ = 0.0;
    double condition_ = 1.0;
    Eigen::MatrixXd chi_;     // t x dims
    Eigen::LLT<Eigen::MatrixXd> llt_;
    Eigen::VectorXd weights_; // K^-1 (P - prior(chi))
};

} // namespace iteqd
