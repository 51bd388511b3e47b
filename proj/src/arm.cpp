#include "iteqd/arm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include "iteqd/error.hpp"
#include "iteqd/text.hpp"

namespace iteqd::arm {

namespace {

constexpr double kPi = std::numbers::pi;

DamageSpec make_damage(std::string name, std::initializer_list<std::tuple<int, JointCondition, double>> rows) {
    DamageSpec d;
    d.name = std::move(name);
    for (auto [joint, cond, angle] : rows)
        d.joints[static_cast<std::size_t>(joint - 1)] = JointDamage{cond, angle};
    return d;
}

double orientation(Point a, Point b, Point c) { return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x); }

int sign(double v) { return (v > 0.0) - (v < 0.0); }

bool on_segment(Point a, Point b, Point p) {
    return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
           p.y <= std::max(a.y, b.y);
}

// Closed-segment intersection, collinear overlap included.
bool segments_intersect(Point p1, Point p2, Point q1, Point q2) {
    const int o1 = sign(orientation(p1, p2, q1));
    const int o2 = sign(orientation(p1, p2, q2));
    const int o3 = sign(orientation(q1, q2, p1));
    const int o4 = sign(orientation(q1, q2, p2));
    if (o1 != o2 && o3 != o4)
        return true;
    return (o1 == 0 && on_segment(p1, p2, q1)) || (o2 == 0 && on_segment(p1, p2, q2)) ||
           (o3 == 0 && on_segment(q1, q2, p1)) || (o4 == 0 && on_segment(q1, q2, p2));
}

std::string condition_name(JointCondition c) {
    switch (c) {
    case JointCondition::intact:
        return "intact";
    case JointCondition::stuck:
        return "stuck";
    case JointCondition::offset:
        return "offset";
    }
    return "intact";
}

} // namespace

double ArmConfig::total_length() const {
    double s = 0.0;
    for (double l : link_lengths)
        s += l;
    return s;
}

bool DamageSpec::intact() const {
    return std::all_of(joints.begin(), joints.end(),
                       [](const JointDamage& j) { return j.condition == JointCondition::intact; });
}

DamageSpec parse_damage(std::istream& in, std::string name) {
    DamageSpec d;
    d.name = std::move(name);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto body = text::trim(line);
        if (body.empty() || body.front() == '#')
            continue;
        auto f = text::split(body);
        if (f.size() != 3)
            throw SchemaError("damage line " + std::to_string(lineno) + ": expected joint,condition,angle_rad");
        if (text::trim(f[0]) == "joint")
            continue;
        const auto joint = text::parse_uint(f[0], "joint");
        if (joint < 1 || joint > kJoints)
            throw SchemaError("damage line " + std::to_string(lineno) + ": joint must be 1..8");
        const auto cond = text::trim(f[1]);
        JointCondition c;
        if (cond == "intact")
            c = JointCondition::intact;
        else if (cond == "stuck")
            c = JointCondition::stuck;
        else if (cond == "offset")
            c = JointCondition::offset;
        else
            throw SchemaError("damage line " + std::to_string(lineno) + ": unknown condition '" + std::string(cond) + "'");
        const double angle = text::parse_double(f[2], "angle_rad");
        if (std::abs(angle) > kPi / 2.0 + 1e-12)
            throw SchemaError("damage line " + std::to_string(lineno) + ": angle outside the joint limits");
        d.joints[joint - 1] = JointDamage{c, angle};
    }
    return d;
}

DamageSpec load_damage(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open damage file '" + path + "'");
    return parse_damage(in, path);
}

void write_damage(std::ostream& out, const DamageSpec& damage) {
    out << "joint,condition,angle_rad\n";
    for (std::size_t j = 0; j < kJoints; ++j)
        if (damage.joints[j].condition != JointCondition::intact)
            out << j + 1 << ',' << condition_name(damage.joints[j].condition) << ','
                << text::format_double(damage.joints[j].angle) << '\n';
}

std::vector<DamageSpec> damage_suite() {
    using enum JointCondition;
    return {
        make_damage("C1", {{1, stuck, kPi / 4}}),
        make_damage("C2", {{3, offset, kPi / 4}}),
        make_damage("C3", {{2, stuck, 0.0}, {5, offset, -kPi / 4}}),
        make_damage("C4", {{4, stuck, 0.0}}),
        make_damage("C5", {{6, offset, -kPi / 4}}),
        make_damage("C6", {{2, stuck, -kPi / 4}}),
        make_damage("C7", {{7, stuck, kPi / 4}}),
        make_damage("C8", {{1, offset, -kPi / 4}}),
        make_damage("C9", {{3, stuck, kPi / 2}}),
        make_damage("C10", {{5, stuck, -kPi / 4}, {8, stuck, 0.0}}),
        make_damage("C11", {{1, stuck, -kPi / 2}}),
        make_damage("C12", {{2, offset, kPi / 2}}),
        make_damage("C13", {{4, offset, kPi / 4}, {6, offset, kPi / 4}}),
        make_damage("C14", {{8, offset, -kPi / 2}}),
    };
}

bool Workspace::contains(Point p) const { return p.x >= x_min && p.x <= x_max && p.y >= y_min && p.y <= y_max; }

GridSpec Workspace::grid() const { return GridSpec({x_min, y_min}, {x_max, y_max}, {x_bins, y_bins}); }

Angles genome_to_angles(std::span<const double> genome) {
    if (genome.size() != kJoints)
        throw ContractViolation("arm genome must have 8 components, got " + std::to_string(genome.size()));
    Angles a{};
    for (std::size_t i = 0; i < kJoints; ++i) {
        if (!(genome[i] >= 0.0 && genome[i] <= 1.0))
            throw ContractViolation("arm genome component outside [0,1]");
        a[i] = (genome[i] - 0.5) * kPi;
    }
    return a;
}

Angles apply_damage(const Angles& commanded, const DamageSpec& damage, const ArmConfig& config) {
    Angles out = commanded;
    for (std::size_t i = 0; i < kJoints; ++i) {
        const auto& j = damage.joints[i];
        switch (j.condition) {
        case JointCondition::intact:
            break;
        case JointCondition::stuck:
            out[i] = j.angle;
            break;
        case JointCondition::offset:
            out[i] = std::clamp(commanded[i] + j.angle, -config.joint_limit, config.joint_limit);
            break;
        }
    }
    return out;
}

Pose forward_kinematics(const Angles& angles, const ArmConfig& config) {
    Pose pose;
    pose.joints[0] = config.base;
    double heading = config.base_heading;
    for (std::size_t i = 0; i < kJoints; ++i) {
        heading += angles[i];
        const auto& prev = pose.joints[i];
        pose.joints[i + 1] = Point{prev.x + config.link_lengths[i] * std::cos(heading),
                                   prev.y + config.link_lengths[i] * std::sin(heading)};
    }
    return pose;
}

bool self_collides(std::span<const Point, kJoints + 1> joints) {
    for (std::size_t i = 0; i < kJoints; ++i)
        for (std::size_t j = i + 2; j < kJoints; ++j)
            if (segments_intersect(joints[i], joints[i + 1], joints[j], joints[j + 1]))
                return true;
    return false;
}

Evaluation map_creation_eval(std::span<const double> genome, const ArmConfig& config, const Workspace& workspace) {
    const auto angles = genome_to_angles(genome);
    const auto pose = forward_kinematics(angles, config);
    const auto g = pose.gripper();

    double mean = 0.0;
    for (double a : angles)
        mean += a;
    mean /= static_cast<double>(kJoints);
    double var = 0.0;
    for (double a : angles)
        var += (a - mean) * (a - mean);
    var /= static_cast<double>(kJoints);

    const bool valid = workspace.contains(g) && !self_collides(pose.joints);
    return Evaluation{{g.x, g.y}, -var, valid};
}

Evaluator map_evaluator(ArmConfig config, Workspace workspace) {
    return Evaluator{"arm-variance",
                     [config, workspace](const Genome& g) { return map_creation_eval(g, config, workspace); }};
}

double adaptation_eval(std::span<const double> genome, const DamageSpec& damage, const Target& target,
                       const ArmConfig& config, const Workspace& workspace, TrialOptions options) {
    const auto pose = forward_kinematics(apply_damage(genome_to_angles(genome), damage, config), config);
    if (options.prescreen_collision && self_collides(pose.joints))
        return -1.0;
    const auto g = pose.gripper();
    if (!workspace.contains(g))
        return -1.0;
    return -std::hypot(g.x - target.bin.x, g.y - target.bin.y);
}

double target_prior(std::span<const double> descriptor, const Target& target) {
    require(descriptor.size() == 2, "arm descriptors are (x, y) positions");
    return -std::hypot(descriptor[0] - target.bin.x, descriptor[1] - target.bin.y);
}

std::vector<double> map_prior_for_target(const ArchiveGrid& grid, const Target& target) {
    std::vector<double> out;
    out.reserve(grid.filled_count());
    for (const Cell* cell : grid.sorted_cells())
        out.push_back(target_prior(cell->elite.descriptor, target));
    return out;
}

} // namespace iteqd::arm
