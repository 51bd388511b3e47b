#include "iteqd/descriptors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>

#include "iteqd/error.hpp"
#include "iteqd/random.hpp"
#include "iteqd/text.hpp"

namespace iteqd::gait {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr std::size_t kColumns = 42;

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

std::vector<double> clamped(std::vector<double> v) {
    for (auto& x : v)
        x = clamp01(x);
    return v;
}

// U(v - threshold) and U(-v - threshold) fractions over all steps.
template <typename Get>
std::pair<double, double> signed_fractions(const TrajectoryRecord& traj, double threshold, Get get) {
    std::size_t pos = 0, neg = 0;
    for (std::size_t k = 0; k < traj.steps.size(); ++k) {
        const double v = get(k);
        pos += v - threshold > 0.0;
        neg += -v - threshold > 0.0;
    }
    const auto n = static_cast<double>(traj.steps.size());
    return {pos / n, neg / n};
}

std::vector<double> relative(const std::array<double, 6>& values) {
    double total = 0.0;
    for (double v : values)
        total += v;
    if (total == 0.0)
        return std::vector<double>(6, 1.0 / 6.0);
    std::vector<double> out;
    for (double v : values)
        out.push_back(v / total);
    return out;
}

// Mean of f(angle) over the steps where the leg touches the ground; 0 for a leg that never does.
template <typename Select, typename Map>
std::vector<double> contact_average(const TrajectoryRecord& traj, Select select, Map map) {
    std::vector<double> out(6, 0.0);
    for (std::size_t leg = 0; leg < 6; ++leg) {
        double sum = 0.0;
        std::size_t n = 0;
        for (const auto& s : traj.steps)
            if (s.contacts[leg]) {
                sum += map(select(s)[leg]);
                ++n;
            }
        out[leg] = n ? sum / static_cast<double>(n) : 0.0;
    }
    return out;
}

double range_of(const std::vector<double>& v) {
    auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    return *hi - *lo;
}

} // namespace

void validate(const TrajectoryRecord& traj) {
    require(!traj.steps.empty(), "trajectory has no steps");
    require(traj.timestep > 0.0, "trajectory timestep must be positive");
    std::array<double, 6> prev_energy{};
    for (std::size_t k = 0; k < traj.steps.size(); ++k) {
        const auto& s = traj.steps[k];
        for (double v : {s.pitch, s.roll, s.yaw, s.x, s.y, s.z})
            require(std::isfinite(v), "trajectory step " + std::to_string(k) + " has a non-finite value");
        for (std::size_t leg = 0; leg < 6; ++leg) {
            for (double v : {s.grf[leg], s.leg_pitch[leg], s.leg_roll[leg], s.leg_yaw[leg]})
                require(std::isfinite(v), "trajectory step " + std::to_string(k) + " has a non-finite value");
            require(std::isfinite(s.energy[leg]) && s.energy[leg] >= 0.0,
                    "trajectory energy must be finite and non-negative");
            require(s.energy[leg] >= prev_energy[leg], "cumulative energy decreased at step " + std::to_string(k));
            prev_energy[leg] = s.energy[leg];
        }
    }
}

std::string_view to_string(DescriptorKind kind) {
    switch (kind) {
    case DescriptorKind::duty_factor:
        return "duty_factor";
    case DescriptorKind::orientation:
        return "orientation";
    case DescriptorKind::displacement:
        return "displacement";
    case DescriptorKind::total_energy:
        return "total_energy";
    case DescriptorKind::relative_energy:
        return "relative_energy";
    case DescriptorKind::deviation:
        return "deviation";
    case DescriptorKind::total_grf:
        return "total_grf";
    case DescriptorKind::relative_grf:
        return "relative_grf";
    case DescriptorKind::leg_pitch:
        return "leg_pitch";
    case DescriptorKind::leg_roll:
        return "leg_roll";
    case DescriptorKind::leg_yaw:
        return "leg_yaw";
    }
    return "unknown";
}

std::optional<DescriptorKind> parse_descriptor_kind(std::string_view name) {
    for (auto k : kAllDescriptorKinds)
        if (to_string(k) == name)
            return k;
    return std::nullopt;
}

std::size_t descriptor_dims(DescriptorKind kind) { return kind == DescriptorKind::deviation ? 3 : 6; }

std::vector<double> descriptor(DescriptorKind kind, const TrajectoryRecord& traj, const DescriptorConstants& c) {
    validate(traj);
    const auto& steps = traj.steps;
    const auto n = static_cast<double>(steps.size());
    const auto& last = steps.back();

    switch (kind) {
    case DescriptorKind::duty_factor: {
        std::vector<double> out(6, 0.0);
        for (const auto& s : steps)
            for (std::size_t leg = 0; leg < 6; ++leg)
                out[leg] += s.contacts[leg];
        for (auto& v : out)
            v /= n;
        return clamped(std::move(out));
    }
    case DescriptorKind::orientation: {
        std::vector<double> out;
        for (auto get : {+[](const TrajectoryStep& s) { return s.pitch; },
                         +[](const TrajectoryStep& s) { return s.roll; },
                         +[](const TrajectoryStep& s) { return s.yaw; }}) {
            auto [pos, neg] = signed_fractions(traj, c.orientation_threshold, [&](std::size_t k) { return get(steps[k]); });
            out.push_back(pos);
            out.push_back(neg);
        }
        return clamped(std::move(out));
    }
    case DescriptorKind::displacement: {
        std::vector<double> out;
        for (auto get : {+[](const TrajectoryStep& s) { return s.x; }, +[](const TrajectoryStep& s) { return s.y; },
                         +[](const TrajectoryStep& s) { return s.z; }}) {
            auto delta = [&](std::size_t k) { return get(steps[k]) - (k == 0 ? 0.0 : get(steps[k - 1])); };
            auto [pos, neg] = signed_fractions(traj, c.displacement_threshold, delta);
            out.push_back(pos);
            out.push_back(neg);
        }
        return clamped(std::move(out));
    }
    case DescriptorKind::total_energy: {
        std::vector<double> out;
        for (double e : last.energy)
            out.push_back(e / c.max_energy);
        return clamped(std::move(out));
    }
    case DescriptorKind::relative_energy:
        return clamped(relative(last.energy));
    case DescriptorKind::deviation: {
        const double speed = last.y / traj.duration();
        std::vector<double> xs, ys, zs;
        for (std::size_t k = 0; k < steps.size(); ++k) {
            const double t = traj.timestep * static_cast<double>(k + 1);
            xs.push_back(steps[k].x);
            ys.push_back(steps[k].y - speed * t);
            zs.push_back(steps[k].z);
        }
        const double g = c.deviation_gain / c.deviation_scale;
        return clamped({g * range_of(xs), g * range_of(ys), g * range_of(zs)});
    }
    case DescriptorKind::total_grf: {
        std::vector<double> out;
        for (double f : last.grf)
            out.push_back(f / c.max_grf);
        return clamped(std::move(out));
    }
    case DescriptorKind::relative_grf:
        return clamped(relative(last.grf));
    case DescriptorKind::leg_pitch:
        return clamped(contact_average(traj, [](const TrajectoryStep& s) -> const auto& { return s.leg_pitch; },
                                       [](double a) { return a / kPi; }));
    case DescriptorKind::leg_roll:
        return clamped(contact_average(traj, [](const TrajectoryStep& s) -> const auto& { return s.leg_roll; },
                                       [](double a) { return a / kPi; }));
    case DescriptorKind::leg_yaw:
        return clamped(contact_average(traj, [](const TrajectoryStep& s) -> const auto& { return s.leg_yaw; },
                                       [](double a) { return (a + kPi) / (2.0 * kPi); }));
    }
    throw ContractViolation("unknown descriptor kind");
}

std::vector<ComponentRef> descriptor_pool() {
    std::vector<ComponentRef> pool;
    for (auto k : kAllDescriptorKinds)
        for (std::size_t i = 0; i < descriptor_dims(k); ++i)
            pool.push_back({k, i});
    return pool;
}

std::vector<ComponentRef> random_descriptor_basis(std::uint64_t seed, std::size_t count) {
    auto pool = descriptor_pool();
    require(count <= pool.size(), "cannot select more components than the pool holds");
    Rng rng(seed);
    for (std::size_t i = 0; i < count; ++i)
        std::swap(pool[i], pool[i + rng.index(pool.size() - i)]);
    pool.resize(count);
    return pool;
}

std::vector<double> composed_descriptor(const std::vector<ComponentRef>& basis, const TrajectoryRecord& traj,
                                        const DescriptorConstants& constants) {
    std::vector<double> out;
    for (const auto& ref : basis)
        out.push_back(descriptor(ref.kind, traj, constants).at(ref.component));
    return out;
}

TrajectoryRecord read_trajectory(std::istream& in, double timestep) {
    TrajectoryRecord traj;
    traj.timestep = timestep;
    std::string line;
    std::size_t lineno = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++lineno;
        const auto body = text::trim(line);
        if (body.empty() || body.front() == '#')
            continue;
        auto f = text::split(body);
        if (f.size() != kColumns)
            throw SchemaError("trajectory line " + std::to_string(lineno) + ": expected 42 columns, got " +
                              std::to_string(f.size()));
        if (!header_seen) {
            header_seen = true;
            if (text::trim(f[0]) == "c1")
                continue;
        }
        auto num = [&](std::size_t i) { return text::parse_double(f[i], "trajectory value"); };
        TrajectoryStep s;
        for (std::size_t leg = 0; leg < 6; ++leg) {
            const double c = num(leg);
            if (c != 0.0 && c != 1.0)
                throw SchemaError("trajectory line " + std::to_string(lineno) + ": contact flags must be 0 or 1");
            s.contacts[leg] = c == 1.0;
        }
        s.pitch = num(6);
        s.roll = num(7);
        s.yaw = num(8);
        s.x = num(9);
        s.y = num(10);
        s.z = num(11);
        for (std::size_t leg = 0; leg < 6; ++leg) {
            s.energy[leg] = num(12 + leg);
            s.grf[leg] = num(18 + leg);
            s.leg_pitch[leg] = num(24 + leg);
            s.leg_roll[leg] = num(30 + leg);
            s.leg_yaw[leg] = num(36 + leg);
        }
        traj.steps.push_back(s);
    }
    return traj;
}

TrajectoryRecord load_trajectory(const std::string& path, double timestep) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open trajectory '" + path + "'");
    return read_trajectory(in, timestep);
}

void write_trajectory(std::ostream& out, const TrajectoryRecord& traj) {
    out << "c1,c2,c3,c4,c5,c6,pitch,roll,yaw,x,y,z";
    for (const char* p : {"e", "f", "lp", "lr", "ly"})
        for (int leg = 1; leg <= 6; ++leg)
            out << ',' << p << leg;
    out << '\n';
    const auto fmt = [](double v) { return text::format_double(v); };
    for (const auto& s : traj.steps) {
        for (std::size_t leg = 0; leg < 6; ++leg)
            out << (leg ? "," : "") << (s.contacts[leg] ? 1 : 0);
        for (double v : {s.pitch, s.roll, s.yaw, s.x, s.y, s.z})
            out << ',' << fmt(v);
        for (const auto* arr : {&s.energy, &s.grf, &s.leg_pitch, &s.leg_roll, &s.leg_yaw})
            for (double v : *arr)
                out << ',' << fmt(v);
        out << '\n';
    }
}

} // namespace iteqd::gait
