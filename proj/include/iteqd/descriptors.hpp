#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace iteqd::gait {

/// State of the hexapod at the end of one sampling interval.
struct TrajectoryStep {
    std::array<bool, 6> contacts{};
    double pitch = 0.0; // torso, rad
    double roll = 0.0;
    double yaw = 0.0;
    double x = 0.0; // torso position, m
    double y = 0.0;
    double z = 0.0;
    std::array<double, 6> energy{};    // cumulative per leg, N.m.rad
    std::array<double, 6> grf{};       // running mean ground reaction force per leg, N
    std::array<double, 6> leg_pitch{}; // lower-leg angles w.r.t. the ground, rad
    std::array<double, 6> leg_roll{};
    std::array<double, 6> leg_yaw{};
};

/// Recorded run; the robot starts at the origin before the first step.
struct TrajectoryRecord {
    double timestep = 0.015;
    std::vector<TrajectoryStep> steps;

    double duration() const { return timestep * static_cast<double>(steps.size()); }
};

/// Throws ContractViolation when the record breaks its invariants
/// (no steps, non-finite values, negative or decreasing energy).
void validate(const TrajectoryRecord& traj);

enum class DescriptorKind {
    duty_factor,
    orientation,
    displacement,
    total_energy,
    relative_energy,
    deviation,
    total_grf,
    relative_grf,
    leg_pitch,
    leg_roll,
    leg_yaw,
};

inline constexpr std::array<DescriptorKind, 11> kAllDescriptorKinds{
    DescriptorKind::duty_factor,  DescriptorKind::orientation,     DescriptorKind::displacement,
    DescriptorKind::total_energy, DescriptorKind::relative_energy, DescriptorKind::deviation,
    DescriptorKind::total_grf,    DescriptorKind::relative_grf,    DescriptorKind::leg_pitch,
    DescriptorKind::leg_roll,     DescriptorKind::leg_yaw,
};

std::string_view to_string(DescriptorKind kind);
std::optional<DescriptorKind> parse_descriptor_kind(std::string_view name);

/// 3 for deviation, 6 for every other kind.
std::size_t descriptor_dims(DescriptorKind kind);

struct DescriptorConstants {
    double orientation_threshold = 0.005 * 3.14159265358979323846; // rad
    double displacement_threshold = 0.001;                         // m
    double max_energy = 100.0;                                     // N.m.rad over the run
    double max_grf = 10.0;                                         // N
    double deviation_gain = 0.95;
    double deviation_scale = 0.2;                                  // m
};

/// Behavior descriptor of `kind`, every component clamped to [0,1].
/// Relative energy / GRF with a zero total return the uniform vector 1/6.
std::vector<double> descriptor(DescriptorKind kind, const TrajectoryRecord& traj,
                               const DescriptorConstants& constants = {});

/// One component of one of the 11 descriptors.
struct ComponentRef {
    DescriptorKind kind;
    std::size_t component;

    bool operator==(const ComponentRef&) const = default;
};

/// All 63 descriptor components, in kind order then component order.
std::vector<ComponentRef> descriptor_pool();

/// `count` distinct components drawn uniformly without replacement; deterministic in `seed`.
std::vector<ComponentRef> random_descriptor_basis(std::uint64_t seed, std::size_t count = 6);

std::vector<double> composed_descriptor(const std::vector<ComponentRef>& basis, const TrajectoryRecord& traj,
                                        const DescriptorConstants& constants = {});

/// CSV with a header row and 42 columns per step:
/// c1..c6, pitch, roll, yaw, x, y, z, e1..e6, f1..f6, lp1..lp6, lr1..lr6, ly1..ly6
TrajectoryRecord read_trajectory(std::istream& in, double timestep = 0.015);
TrajectoryRecord load_trajectory(const std::string& path, double timestep = 0.015);
void write_trajectory(std::ostream& out, const TrajectoryRecord& traj);

} // namespace iteqd::gait
