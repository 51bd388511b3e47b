#include "iteqd/gp.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>

#include "iteqd/error.hpp"

namespace iteqd {

namespace {
const double kSqrt5 = std::sqrt(5.0);
}

double matern52_distance(double d, double rho) {
    const double r = kSqrt5 * d / rho;
    return (1.0 + r + r * r / 3.0) * std::exp(-r);
}

double matern52(std::span<const double> x1, std::span<const double> x2, double rho) {
    if (x1.size() != x2.size())
        throw ContractViolation("kernel arguments differ in dimension");
    require(rho > 0.0, "kernel length scale must be positive");
    double sq = 0.0;
    for (std::size_t i = 0; i < x1.size(); ++i) {
        const double diff = x1[i] - x2[i];
        sq += diff * diff;
    }
    return matern52_distance(std::sqrt(sq), rho);
}

double kernel(const KernelParams& params, std::span<const double> x1, std::span<const double> x2) {
    return params.signal_var * matern52(x1, x2, params.rho);
}

PriorMean PriorMean::constant(double value) {
    PriorMean p;
    p.constant_ = value;
    return p;
}

PriorMean PriorMean::function(std::function<double(std::span<const double>)> fn) {
    PriorMean p;
    p.fn_ = std::move(fn);
    return p;
}

GpState GpState::fit(PriorMean prior, std::vector<Observation> observations, double noise_var,
                     KernelParams kernel_params) {
    require(noise_var > 0.0, "noise variance must be positive");
    require(kernel_params.rho > 0.0 && kernel_params.signal_var > 0.0, "kernel parameters must be positive");

    GpState s;
    s.prior_ = std::move(prior);
    s.noise_var_ = noise_var;
    s.kernel_ = kernel_params;
    s.observations_ = std::move(observations);

    const auto t = static_cast<Eigen::Index>(s.observations_.size());
    if (t == 0)
        return s;

    const auto dims = static_cast<Eigen::Index>(s.observations_.front().chi.size());
    s.chi_.resize(t, dims);
    Eigen::VectorXd residual(t);
    for (Eigen::Index i = 0; i < t; ++i) {
        const auto& o = s.observations_[static_cast<std::size_t>(i)];
        if (static_cast<Eigen::Index>(o.chi.size()) != dims)
            throw ContractViolation("observations differ in descriptor dimension");
        for (Eigen::Index d = 0; d < dims; ++d) {
            require(std::isfinite(o.chi[static_cast<std::size_t>(d)]), "observation descriptor is not finite");
            s.chi_(i, d) = o.chi[static_cast<std::size_t>(d)];
        }
        require(std::isfinite(o.measured) && std::isfinite(o.prior_at_chi), "observation value is not finite");
        residual(i) = o.measured - o.prior_at_chi;
    }

    Eigen::MatrixXd k(t, t);
    for (Eigen::Index i = 0; i < t; ++i) {
        k(i, i) = kernel_params.signal_var + noise_var;
        for (Eigen::Index j = 0; j < i; ++j) {
            const double d = (s.chi_.row(i) - s.chi_.row(j)).norm();
            k(i, j) = k(j, i) = kernel_params.signal_var * matern52_distance(d, kernel_params.rho);
        }
    }

    double jitter = 0.0;
    while (true) {
        Eigen::MatrixXd kj = k;
        kj.diagonal().array() += jitter;
        s.llt_.compute(kj);
        if (s.llt_.info() == Eigen::Success) {
            s.jitter_ = jitter;
            break;
        }
        jitter = jitter == 0.0 ? 1e-10 : jitter * 10.0;
        if (jitter > 1e-6 * 1.5) {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(k, Eigen::EigenvaluesOnly);
            const auto& ev = eig.eigenvalues();
            const double cond = ev.minCoeff() > 0.0 ? ev.maxCoeff() / ev.minCoeff()
                                                    : std::numeric_limits<double>::infinity();
            throw IllConditionedKernel("kernel matrix is not positive definite after jitter 1e-6 (condition estimate " +
                                           std::to_string(cond) + ")",
                                       cond);
        }
    }
    const double rcond = s.llt_.rcond();
    s.condition_ = rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity();
    s.weights_ = s.llt_.solve(residual);
    return s;
}

Posterior GpState::posterior(std::span<const double> x) const { return posterior(x, prior_(x)); }

Posterior GpState::posterior(std::span<const double> x, double prior_at_x) const {
    if (observations_.empty())
        return {prior_at_x, kernel_.signal_var};
    if (static_cast<Eigen::Index>(x.size()) != chi_.cols())
        throw ContractViolation("query point dimension differs from observations");

    const auto t = chi_.rows();
    Eigen::VectorXd kx(t);
    const Eigen::Map<const Eigen::RowVectorXd> xr(x.data(), static_cast<Eigen::Index>(x.size()));
    for (Eigen::Index i = 0; i < t; ++i)
        kx(i) = kernel_.signal_var * matern52_distance((chi_.row(i) - xr).norm(), kernel_.rho);

    const double mu = prior_at_x + kx.dot(weights_);
    const Eigen::VectorXd v = llt_.matrixL().solve(kx);
    const double var = std::max(0.0, kernel_.signal_var - v.squaredNorm());
    return {mu, var};
}

void GpState::posterior_batch(const Eigen::MatrixXd& points, std::span<const double> prior_at_points,
                              std::span<double> mu_out, std::span<double> var_out) const {
    const auto n = points.rows();
    require(prior_at_points.size() == static_cast<std::size_t>(n) && mu_out.size() == static_cast<std::size_t>(n) &&
                var_out.size() == static_cast<std::size_t>(n),
            "posterior_batch buffers must match the number of points");
    if (observations_.empty()) {
        std::copy(prior_at_points.begin(), prior_at_points.end(), mu_out.begin());
        std::fill(var_out.begin(), var_out.end(), kernel_.signal_var);
        return;
    }
    if (points.cols() != chi_.cols())
        throw ContractViolation("query point dimension differs from observations");

    const auto t = chi_.rows();
    Eigen::MatrixXd kx(t, n);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < t; ++i)
            kx(i, j) = kernel_.signal_var * matern52_distance((chi_.row(i) - points.row(j)).norm(), kernel_.rho);

    const Eigen::VectorXd shift = kx.transpose() * weights_;
    llt_.matrixL().solveInPlace(kx);
    const Eigen::VectorXd reduction = kx.colwise().squaredNorm().transpose();
    for (Eigen::Index j = 0; j < n; ++j) {
        mu_out[static_cast<std::size_t>(j)] = prior_at_points[static_cast<std::size_t>(j)] + shift(j);
        var_out[static_cast<std::size_t>(j)] = std::max(0.0, kernel_.signal_var - reduction(j));
    }
}

} // namespace iteqd
