#include "iteqd/gait.hpp"

#include <cmath>

#include "iteqd/error.hpp"

namespace iteqd::gait {

namespace {

void check_unit(double v, const char* what) {
    if (!(v >= 0.0 && v <= 1.0))
        throw ContractViolation(std::string("gait parameter ") + what + " outside [0,1]");
}

} // namespace

GaitParams GaitParams::from_genome(std::span<const double> genome) {
    if (genome.size() != kParams)
        throw ContractViolation("gait genome must have 36 components, got " + std::to_string(genome.size()));
    GaitParams p;
    for (std::size_t leg = 0; leg < kLegs; ++leg) {
        const auto* g = genome.data() + leg * kParamsPerLeg;
        p.legs[leg].first = Oscillator{g[0], g[1], g[2]};
        p.legs[leg].second = Oscillator{g[3], g[4], g[5]};
    }
    return p;
}

std::vector<double> GaitParams::to_genome() const {
    std::vector<double> g;
    g.reserve(kParams);
    for (const auto& leg : legs)
        for (const auto* o : {&leg.first, &leg.second}) {
            g.push_back(o->alpha);
            g.push_back(o->phi);
            g.push_back(o->tau);
        }
    return g;
}

GaitParams GaitParams::reference_tripod() {
    constexpr std::array<double, kLegs> phi1{0.0, 0.0, 0.5, 0.5, 0.0, 0.0};
    constexpr std::array<double, kLegs> phi2{0.75, 0.25, 0.25, 0.75, 0.75, 0.25};
    GaitParams p;
    for (std::size_t leg = 0; leg < kLegs; ++leg) {
        p.legs[leg].first = Oscillator{1.0, phi1[leg], 0.5};
        p.legs[leg].second = Oscillator{0.25, phi2[leg], 0.5};
    }
    return p;
}

GaitSignal::GaitSignal(Oscillator osc, SmoothingConfig smoothing) : osc_(osc) {
    check_unit(osc.alpha, "alpha");
    check_unit(osc.phi, "phi");
    check_unit(osc.tau, "tau");
    require(smoothing.samples_per_period >= 2, "gait profile needs at least two samples");
    require(smoothing.sigma_seconds >= 0.0 && smoothing.truncate_sigmas >= 0.0, "smoothing width must be non-negative");

    const auto n = smoothing.samples_per_period;
    const auto high = static_cast<std::size_t>(std::llround(osc.tau * static_cast<double>(n)));
    std::vector<double> square(n);
    for (std::size_t i = 0; i < n; ++i)
        square[i] = i < high ? 1.0 : -1.0;

    const double sigma = smoothing.sigma_seconds * static_cast<double>(n);
    const auto half = static_cast<long>(std::floor(smoothing.truncate_sigmas * sigma));
    std::vector<double> weights;
    double total = 0.0;
    for (long k = -half; k <= half; ++k) {
        const double w = sigma > 0.0 ? std::exp(-0.5 * (k / sigma) * (k / sigma)) : 1.0;
        weights.push_back(w);
        total += w;
    }
    for (auto& w : weights)
        w /= total;

    const auto ln = static_cast<long>(n);
    profile_.assign(n, 0.0);
    for (long i = 0; i < ln; ++i) {
        double acc = 0.0;
        for (long k = -half; k <= half; ++k)
            acc += weights[static_cast<std::size_t>(k + half)] * square[static_cast<std::size_t>(((i - k) % ln + ln) % ln)];
        profile_[static_cast<std::size_t>(i)] = acc;
    }
}

double GaitSignal::operator()(double t) const {
    double u = std::fmod(t - osc_.phi, 1.0);
    if (u < 0.0)
        u += 1.0;
    const auto n = profile_.size();
    const double pos = u * static_cast<double>(n);
    const auto i0 = static_cast<std::size_t>(pos) % n;
    const auto i1 = (i0 + 1) % n;
    const double frac = pos - std::floor(pos);
    return osc_.alpha * ((1.0 - frac) * profile_[i0] + frac * profile_[i1]);
}

double gait_signal(double t, const Oscillator& osc, const SmoothingConfig& smoothing) {
    return GaitSignal(osc, smoothing)(t);
}

std::array<double, 3 * kLegs> joint_commands(const GaitParams& params, double t, const SmoothingConfig& smoothing) {
    std::array<double, 3 * kLegs> out{};
    for (std::size_t leg = 0; leg < kLegs; ++leg) {
        const double dof2 = gait_signal(t, params.legs[leg].second, smoothing);
        out[3 * leg] = gait_signal(t, params.legs[leg].first, smoothing);
        out[3 * leg + 1] = dof2;
        out[3 * leg + 2] = -dof2;
    }
    return out;
}

} // namespace iteqd::gait
