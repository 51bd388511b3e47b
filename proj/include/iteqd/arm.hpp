#pragma once

#include <array>
#include <iosfwd>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "iteqd/archive.hpp"
#include "iteqd/map_elites.hpp"

namespace iteqd::arm {

inline constexpr std::size_t kJoints = 8;

using Angles = std::array<double, kJoints>;

struct Point {
    double x = 0.0;
    double y = 0.0;
};

/// Planar 8-joint arm, 0.62 m long in total by default.
struct ArmConfig {
    std::array<double, kJoints> link_lengths{0.0775, 0.0775, 0.0775, 0.0775, 0.0775, 0.0775, 0.0775, 0.0775};
    double joint_limit = std::numbers::pi / 2.0;
    Point base{0.0, 0.0};
    double base_heading = std::numbers::pi / 2.0; // +y

    double total_length() const;
};

enum class JointCondition { intact, stuck, offset };

struct JointDamage {
    JointCondition condition = JointCondition::intact;
    double angle = 0.0; // rad
};

struct DamageSpec {
    std::string name = "none";
    std::array<JointDamage, kJoints> joints{};

    bool intact() const;
};

/// Parses CSV rows `joint,condition,angle_rad` (joint numbered 1..8; optional header row).
DamageSpec parse_damage(std::istream& in, std::string name = "custom");
DamageSpec load_damage(const std::string& path);
void write_damage(std::ostream& out, const DamageSpec& damage);

/// 14 damage conditions. The first three: joint 1 stuck at +45 deg; joint 3 offset
/// by +45 deg; joint 2 broken (stuck at 0) together with joint 5 offset by -45 deg.
/// The rest combine stuck and offset joints along the chain.
std::vector<DamageSpec> damage_suite();

/// x in [-0.7, 0.7], y in [0, 0.7] m on a 200 x 100 grid of 7 mm cells.
struct Workspace {
    double x_min = -0.7;
    double x_max = 0.7;
    double y_min = 0.0;
    double y_max = 0.7;
    std::size_t x_bins = 200;
    std::size_t y_bins = 100;

    bool contains(Point p) const;
    GridSpec grid() const;
};

struct Target {
    Point bin{0.0, 0.5};
    double radius = 0.05;
};

struct Pose {
    std::array<Point, kJoints + 1> joints; // base, then the tip of each link
    Point gripper() const { return joints.back(); }
};

/// v -> (v - 0.5) * pi for each of the 8 components; components must lie in [0,1].
Angles genome_to_angles(std::span<const double> genome);

/// stuck(a) replaces the command; offset(a) adds a and clamps to the joint limit.
Angles apply_damage(const Angles& commanded, const DamageSpec& damage, const ArmConfig& config = {});

Pose forward_kinematics(const Angles& angles, const ArmConfig& config = {});

/// True iff two non-adjacent links touch or cross.
bool self_collides(std::span<const Point, kJoints + 1> joints);

/// Map-creation evaluation: descriptor = gripper (x,y), performance = -variance of the joint angles.
/// Invalid on self-collision or when the gripper leaves the workspace.
Evaluation map_creation_eval(std::span<const double> genome, const ArmConfig& config = {},
                             const Workspace& workspace = {});

Evaluator map_evaluator(ArmConfig config = {}, Workspace workspace = {});

struct TrialOptions {
    bool prescreen_collision = false; // score self-colliding configurations as -1 without "running" them
};

/// Negative gripper-to-bin distance on the damaged arm; -1 when the gripper leaves the workspace.
double adaptation_eval(std::span<const double> genome, const DamageSpec& damage, const Target& target,
                       const ArmConfig& config = {}, const Workspace& workspace = {},
                       TrialOptions options = {});

/// Prior performance of a stored behavior for a given target: -||descriptor - bin||.
double target_prior(std::span<const double> descriptor, const Target& target);

/// Per-cell prior in flattened-index order (same order as map_candidates).
std::vector<double> map_prior_for_target(const ArchiveGrid& grid, const Target& target);

} // namespace iteqd::arm
