#pragma once

#include <array>
#include <span>
#include <vector>

namespace iteqd::gait {

inline constexpr std::size_t kLegs = 6;
inline constexpr std::size_t kParamsPerLeg = 6;
inline constexpr std::size_t kParams = kLegs * kParamsPerLeg; // 36
inline constexpr double kCommandPeriod = 0.030;               // seconds between servo commands

/// Square wave parameters of one degree of freedom, all in [0,1].
struct Oscillator {
    double alpha = 0.0; // amplitude
    double phi = 0.0;   // phase, fraction of the 1 s period
    double tau = 0.5;   // fraction of the period spent high
};

/// Per leg: the horizontal (first) joint and the elevation pair (second, third = -second).
struct LegParams {
    Oscillator first;
    Oscillator second;
};

/// 36-parameter gait controller. Genome layout per leg: alpha1, phi1, tau1, alpha2, phi2, tau2.
struct GaitParams {
    std::array<LegParams, kLegs> legs{};

    static GaitParams from_genome(std::span<const double> genome);
    std::vector<double> to_genome() const;

    /// Tripod reference gait: amplitudes 1 / 0.25, elevation phases 0.25 for legs
    /// 2, 3, 6 and 0.75 for legs 1, 4, 5, duty cycles 0.5.
    static GaitParams reference_tripod();
};

struct SmoothingConfig {
    double sigma_seconds = 2 * kCommandPeriod; // Gaussian width
    double truncate_sigmas = 3.0;
    std::size_t samples_per_period = 1000;     // internal resolution of the periodic profile
};

/// Smoothed, phase-shifted square wave with a 1 s period, tabulated once.
class GaitSignal {
public:
    GaitSignal(Oscillator osc, SmoothingConfig smoothing = {});

    /// Commanded position at time t (seconds), in [-alpha, alpha].
    double operator()(double t) const;

private:
    Oscillator osc_;
    std::vector<double> profile_; // one period of the unshifted, unit-amplitude signal
};

double gait_signal(double t, const Oscillator& osc, const SmoothingConfig& smoothing = {});

/// 18 servo targets at time t; per leg [DOF1, DOF2, DOF3] with DOF3 = -DOF2.
std::array<double, 3 * kLegs> joint_commands(const GaitParams& params, double t,
                                             const SmoothingConfig& smoothing = {});

} // namespace iteqd::gait
