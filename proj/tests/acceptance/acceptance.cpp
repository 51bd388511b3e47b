// Acceptance suite: one PASS/FAIL line per criterion.
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "../support/oracles.hpp"
#include "iteqd/adapt.hpp"
#include "iteqd/arm.hpp"
#include "iteqd/bench.hpp"
#include "iteqd/descriptors.hpp"
#include "iteqd/gp.hpp"
#include "iteqd/map_elites.hpp"
#include "iteqd/text.hpp"

using namespace iteqd;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

class Stopwatch {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double median(std::vector<double> v) { return percentile(std::move(v), 0.5); }

std::string archive_bytes(const ArchiveGrid& grid, std::uint64_t evaluations, std::uint64_t seed) {
    std::ostringstream out;
    write_archive(out, grid, ArchiveMetadata{arm::kJoints, evaluations, seed, "acceptance", "acceptance"});
    return out.str();
}

std::string log_bytes(const TrialLog& log) {
    std::ostringstream out;
    for (const auto& e : log.entries) {
        out << e.trial << ',' << e.cell << ',' << text::format_double(e.predicted_mu) << ','
            << text::format_double(e.predicted_sigma) << ',' << text::format_double(e.acquisition) << ','
            << text::format_double(e.measured) << ',' << text::format_double(e.cumulative_best) << ','
            << text::format_double(e.max_mu_after) << ',' << e.stop << '\n';
    }
    return out.str();
}

MapElitesConfig arm_map_config(std::uint64_t iterations, std::uint64_t seed) {
    MapElitesConfig c;
    c.total_iterations = iterations;
    c.genome_length = arm::kJoints;
    c.mutation = MutationConfig::polynomial();
    c.seed = seed;
    return c;
}

// Shared state: criteria 3-5 outputs kept for the determinism rerun.
struct Artifacts {
    std::vector<std::string> c3_archives;
    std::string c4_archive;
    std::vector<ArchiveGrid> maps; // 15 adaptation maps
    std::vector<std::string> map_bytes;
    std::vector<std::string> c5_logs;
};

constexpr std::uint64_t kAdaptMapIterations = 2'000'000;
constexpr std::size_t kMaps = 15;

AdaptConfig arm_adapt_config(std::size_t max_trials = 31) {
    auto cfg = AdaptConfig::arm_defaults();
    cfg.max_trials = max_trials;
    return cfg;
}

AdaptResult adapt_arm(const ArchiveGrid& map, const arm::DamageSpec& damage, const arm::Target& target,
                      const AdaptConfig& cfg) {
    return adapt(map, [&](const Genome& g) { return arm::adaptation_eval(g, damage, target); }, cfg,
                 [&](const Elite& e) { return arm::target_prior(e.descriptor, target); });
}

// ---------------------------------------------------------------------------

Outcome criterion1() {
    Stopwatch sw;
    Rng rng(2024);
    double worst_mu = 0.0, worst_var = 0.0;
    for (int c = 0; c < 200; ++c) {
        oracle::GpCase gc;
        gc.rho = c % 2 ? 0.1 : 0.4;
        gc.noise = 0.001;
        const std::size_t dims = 1 + rng.index(6);
        const std::size_t t = 1 + rng.index(10);
        std::vector<Observation> obs;
        for (std::size_t i = 0; i < t; ++i) {
            std::vector<double> chi(dims);
            for (auto& v : chi)
                v = rng.uniform();
            gc.chi.push_back(chi);
            gc.measured.push_back(rng.normal(0.0, 1.0));
            gc.prior_at_chi.push_back(rng.normal(0.0, 1.0));
            obs.push_back({chi, gc.measured.back(), gc.prior_at_chi.back()});
        }
        const auto gp = GpState::fit(PriorMean::constant(0.0), obs, gc.noise, {gc.rho, 1.0});
        for (int q = 0; q < 10; ++q) {
            std::vector<double> x = q < static_cast<int>(t) && q % 3 == 0 ? gc.chi[static_cast<std::size_t>(q)]
                                                                           : std::vector<double>(dims);
            if (q % 3 != 0 || q >= static_cast<int>(t))
                for (auto& v : x)
                    v = rng.uniform();
            const double prior = rng.normal(0.0, 1.0);
            const auto got = gp.posterior(x, prior);
            const auto want = oracle::gp_posterior(gc, x, prior);
            worst_mu = std::max(worst_mu, std::abs(got.mu - want.mu));
            worst_var = std::max(worst_var, std::abs(got.var - std::max(0.0, want.var)));
        }
    }
    const double secs = sw.seconds();
    return {worst_mu <= 1e-8 && worst_var <= 1e-8 && secs < 10.0,
            fmt("200 cases, max |dmu| %.2e, max |dvar| %.2e (tol 1e-8), %.2f s (< 10 s)", worst_mu, worst_var, secs)};
}

Outcome criterion2() {
    Rng rng(7);
    bool self_one = true;
    double worst_sym = 0.0;
    for (int i = 0; i < 1000; ++i) {
        std::vector<double> a(6), b(6);
        for (auto& v : a)
            v = rng.uniform();
        for (auto& v : b)
            v = rng.uniform();
        self_one = self_one && matern52(a, a, 0.4) == 1.0 && matern52(b, b, 0.1) == 1.0;
        worst_sym = std::max(worst_sym, std::abs(matern52(a, b, 0.4) - matern52(b, a, 0.4)));
    }
    const double at_rho = matern52_distance(0.4, 0.4);
    double min_eig = INFINITY;
    for (int set = 0; set < 100; ++set) {
        const std::size_t n = 30;
        std::vector<std::vector<double>> pts(n, std::vector<double>(6));
        for (auto& p : pts)
            for (auto& v : p)
                v = rng.uniform();
        Eigen::MatrixXd k(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                k(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = matern52(pts[i], pts[j], 0.4);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(k, Eigen::EigenvaluesOnly);
        min_eig = std::min(min_eig, eig.eigenvalues().minCoeff());
    }
    const bool pass = self_one && worst_sym <= 1e-15 && std::abs(at_rho - 0.5240) <= 5e-4 && min_eig >= -1e-9;
    return {pass, fmt("k(x,x)=1 %s, max asymmetry %.1e, k(d=rho)=%.6f (0.5240 +- 5e-4), min eig %.2e (>= -1e-9)",
                      self_one ? "exact" : "VIOLATED", worst_sym, at_rho, min_eig)};
}

Outcome criterion3(Artifacts& art) {
    Stopwatch sw;
    std::vector<double> ratios, me_means, rs_means;
    std::vector<std::size_t> me_cells, rs_cells;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto cfg = arm_map_config(2'000'000, seed);
        auto me = run_map_elites(cfg, arm::Workspace{}.grid(), arm::map_evaluator());
        auto rs = run_random_sampling(cfg, arm::Workspace{}.grid(), arm::map_evaluator());
        const auto ms = me.archive.stats(), rss = rs.archive.stats();
        ratios.push_back(static_cast<double>(ms.filled) / static_cast<double>(rss.filled));
        me_means.push_back(*ms.mean_performance);
        rs_means.push_back(*rss.mean_performance);
        me_cells.push_back(ms.filled);
        rs_cells.push_back(rss.filled);
        art.c3_archives.push_back(archive_bytes(me.archive, cfg.total_iterations, seed) +
                                  archive_bytes(rs.archive, cfg.total_iterations, seed));
    }
    const double ratio = median(ratios), me_mean = median(me_means), rs_mean = median(rs_means);
    const double secs = sw.seconds();
    std::sort(me_cells.begin(), me_cells.end());
    std::sort(rs_cells.begin(), rs_cells.end());
    return {ratio >= 1.15 && me_mean > rs_mean && secs < 300.0,
            fmt("median cells %zu vs %zu, ratio %.3f (>= 1.15); median mean perf %.4f vs %.4f (strictly higher); "
                "%.1f s (< 300 s)",
                me_cells[2], rs_cells[2], ratio, me_mean, rs_mean, secs)};
}

Outcome criterion4(Artifacts& art) {
    Stopwatch sw;
    const auto cfg = arm_map_config(20'000'000, 42);
    auto me = run_map_elites(cfg, arm::Workspace{}.grid(), arm::map_evaluator());
    const double secs = sw.seconds();
    art.c4_archive = archive_bytes(me.archive, cfg.total_iterations, cfg.seed);
    const auto filled = me.archive.filled_count();
    return {filled > 9000 && secs < 900.0,
            fmt("%zu of 20000 cells filled (> 9000), %.1f s (< 900 s)", filled, secs)};
}

Outcome criterion5(Artifacts& art) {
    Stopwatch sw;
    for (std::size_t m = 0; m < kMaps; ++m) {
        auto me = run_map_elites(arm_map_config(kAdaptMapIterations, 1000 + m), arm::Workspace{}.grid(),
                                 arm::map_evaluator());
        art.map_bytes.push_back(archive_bytes(me.archive, kAdaptMapIterations, 1000 + m));
        art.maps.push_back(std::move(me.archive));
    }
    const double map_secs = sw.seconds();
    const auto c1 = arm::damage_suite()[0];
    const arm::Target target;
    std::size_t successes = 0;
    std::vector<double> trials;
    Stopwatch adapt_sw;
    for (const auto& map : art.maps) {
        auto r = adapt_arm(map, c1, target, arm_adapt_config());
        art.c5_logs.push_back(log_bytes(r.log));
        const bool ok = r.reason == StopReason::target_reached;
        successes += ok;
        trials.push_back(static_cast<double>(r.log.entries.size()));
    }
    const double med = median(trials);
    const double secs = sw.seconds();
    return {successes >= 14 && med <= 15.0 && secs < 120.0,
            fmt("joint 1 stuck +45 deg, bin (0.0, 0.5): %zu/15 within 5 cm (>= 14), median trials %.1f (<= 15); "
                "%.1f s total incl. %.1f s building 15 maps of %.0e evaluations (< 120 s)",
                successes, med, secs, map_secs, static_cast<double>(kAdaptMapIterations))};
}

Outcome criterion6(const Artifacts& art) {
    Stopwatch sw;
    const auto suite = arm::damage_suite();
    const arm::Target target;
    const std::size_t budget = 30;
    std::size_t ite_ok = 0, raw_ok = 0, runs = 0;
    for (std::size_t d = 0; d < 5; ++d)
        for (std::size_t m = 0; m < kMaps; ++m) {
            const auto& damage = suite[d];
            auto r = adapt_arm(art.maps[m], damage, target, arm_adapt_config(budget));
            ite_ok += r.best.performance >= -target.radius;

            VariantTask raw{nullptr, {}, arm::kJoints, [&](const Genome& g) {
                                return arm::adaptation_eval(g, damage, target, {}, {}, {true});
                            }};
            auto log = run_variant(VariantKind::raw_bo, raw, budget, split_seed(600 + d, m));
            raw_ok += best_at_cut(log, budget) >= -target.radius;
            ++runs;
        }
    const double ite_rate = 100.0 * static_cast<double>(ite_ok) / static_cast<double>(runs);
    const double raw_rate = 100.0 * static_cast<double>(raw_ok) / static_cast<double>(runs);
    return {ite_rate - raw_rate >= 20.0,
            fmt("damages C1-C5 x 15 maps, 30 trials: IT&E %zu/%zu (%.1f%%) vs raw BO %zu/%zu (%.1f%%), "
                "gap %.1f points (>= 20); %.1f s",
                ite_ok, runs, ite_rate, raw_ok, runs, raw_rate, ite_rate - raw_rate, sw.seconds())};
}

Outcome criterion7(const Artifacts& art) {
    Stopwatch sw;
    ArmBenchConfig cfg;
    cfg.variants = {VariantKind::ite, VariantKind::map_random, VariantKind::raw_bo};
    for (const auto& m : art.maps)
        cfg.maps.push_back(&m);
    const auto suite = arm::damage_suite();
    cfg.damages.assign(suite.begin(), suite.begin() + 5);
    cfg.seeds = 4; // 15 maps x 4 = 60 seeds per damage
    cfg.budget = 17;
    cfg.noise.enabled = true;
    cfg.seed = 77;
    const auto runs = run_arm_bench(cfg);
    const auto summary = summarize(runs, {17});
    double ite = NAN, random = NAN, raw = NAN;
    std::size_t n = 0;
    for (const auto& s : summary) {
        if (s.variant == VariantKind::ite)
            ite = s.median, n = s.runs;
        if (s.variant == VariantKind::map_random)
            random = s.median;
        if (s.variant == VariantKind::raw_bo)
            raw = s.median;
    }
    return {ite >= random && random >= raw,
            fmt("%zu runs per variant (60 seeds x 5 damages, noisy), best at trial 17: median ite %.4f >= "
                "map_random %.4f >= raw_bo %.4f; %.1f s",
                n, ite, random, raw, sw.seconds())};
}

Outcome criterion8() {
    bool ok = true;
    std::vector<std::string> notes;

    // Direct boundary checks, equality included.
    ok = ok && stop_check(0.27, 0.30, 0.9) && !stop_check(0.26, 0.30, 0.9) && stop_check(0.28, 0.30, 0.9);

    // Two cells so far apart the kernel underflows to zero: after one test the maximum mu is the
    // untested cell's prior, 0.3, so the threshold is exactly 0.9 * 0.3.
    auto two_cells = [](double measured_a, double measured_b) {
        std::vector<Candidate> c{{0, {0.0}, {0.0}, 1.0}, {1, {1000.0}, {1.0}, 0.3}};
        return bayes_search(c, [=](const Genome& g) { return g[0] == 0.0 ? measured_a : measured_b; },
                            AdaptConfig::unit_cube_defaults());
    };
    const auto at_boundary = two_cells(0.27, 0.1);
    const bool eq_fires = at_boundary.log.entries.size() == 1 && at_boundary.reason == StopReason::alpha_criterion &&
                          at_boundary.log.entries[0].max_mu_after == 0.3;
    const auto below = two_cells(0.26, 0.1);
    const bool below_waits = below.log.entries.size() == 2 && !below.log.entries[0].stop &&
                             below.reason == StopReason::alpha_criterion;
    ok = ok && eq_fires && below_waits;

    // Logged decisions on random synthetic archives agree with the rule, and the loop halts on the first hit.
    std::size_t checked = 0;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        Rng rng(seed);
        ArchiveGrid grid(GridSpec::uniform(2, 0.0, 1.0, 10));
        for (int i = 0; i < 300; ++i) {
            const double p = 0.2 + rng.uniform();
            grid.try_insert(Elite{{p, rng.uniform()}, {rng.uniform(), rng.uniform()}, p});
        }
        auto r = adapt(grid, [](const Genome& g) { return g[0] * g[1]; }, AdaptConfig::unit_cube_defaults());
        for (std::size_t i = 0; i < r.log.entries.size(); ++i) {
            const auto& e = r.log.entries[i];
            const bool rule = e.cumulative_best >= 0.9 * e.max_mu_after;
            const bool last = i + 1 == r.log.entries.size();
            ok = ok && (rule == (e.stop && r.reason == StopReason::alpha_criterion) || (!rule && last && e.trial == 20));
            ok = ok && (e.stop == last);
            ++checked;
        }
    }

    // Fallback: measurements never approach the predictions.
    ArchiveGrid grid(GridSpec::uniform(2, 0.0, 1.0, 10));
    Rng rng(5);
    for (int i = 0; i < 300; ++i) {
        const double p = 0.5 + rng.uniform();
        grid.try_insert(Elite{{p}, {rng.uniform(), rng.uniform()}, p});
    }
    auto fallback = adapt(grid, [](const Genome&) { return 0.0; }, AdaptConfig::unit_cube_defaults());
    const bool fb = fallback.log.entries.size() == 20 && fallback.reason == StopReason::max_trials;
    ok = ok && fb;
    return {ok, fmt("equality case fires at trial 1 (%s), 0.26 < 0.27 waits (%s), %zu logged decisions match "
                    "best >= 0.9*max mu, fallback after %zu trials (%s)",
                    eq_fires ? "yes" : "NO", below_waits ? "yes" : "NO", checked, fallback.log.entries.size(),
                    fb ? "max_trials" : "WRONG")};
}

Outcome criterion9() {
    using gait::DescriptorKind;
    double worst = 0.0, worst_sum = 0.0;
    bool in_range = true;
    for (auto kind : gait::kAllDescriptorKinds)
        for (std::uint64_t seed = 0; seed < 50; ++seed) {
            const auto traj = oracle::random_trajectory(1'000'003 * (seed + 1) + static_cast<std::uint64_t>(kind));
            const auto got = gait::descriptor(kind, traj);
            const auto want = oracle::descriptor(kind, traj);
            double sum = 0.0;
            for (std::size_t i = 0; i < got.size(); ++i) {
                worst = std::max(worst, std::abs(got[i] - want[i]));
                in_range = in_range && got[i] >= 0.0 && got[i] <= 1.0;
                sum += got[i];
            }
            if (kind == DescriptorKind::relative_energy || kind == DescriptorKind::relative_grf)
                worst_sum = std::max(worst_sum, std::abs(sum - 1.0));
        }
    return {worst <= 1e-12 && worst_sum <= 1e-12 && in_range,
            fmt("11 formulas x 50 trajectories: max deviation %.1e (<= 1e-12), relative sums off by %.1e, "
                "outputs in [0,1]: %s",
                worst, worst_sum, in_range ? "yes" : "NO")};
}

Outcome criterion10() {
    // Uniform-random 5^6 archive: one elite per cell at a uniform position inside the cell.
    const auto spec = GridSpec::uniform(6, 0.0, 1.0, 5);
    Rng rng(10);
    const auto n = static_cast<Eigen::Index>(spec.total_cells());
    Eigen::MatrixXd pts(n, 6);
    std::vector<double> prior(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto idx = unflatten(static_cast<std::uint64_t>(i), spec);
        for (Eigen::Index d = 0; d < 6; ++d)
            pts(i, d) = (static_cast<double>(idx[static_cast<std::size_t>(d)]) + rng.uniform()) / 5.0;
        prior[static_cast<std::size_t>(i)] = rng.uniform();
    }
    std::vector<double> fractions;
    const std::size_t observations = 20;
    std::vector<Eigen::Index> chosen;
    for (std::size_t o = 0; o < observations; ++o)
        chosen.push_back(static_cast<Eigen::Index>(rng.index(static_cast<std::size_t>(n))));
    std::vector<double> mu(static_cast<std::size_t>(n)), var(static_cast<std::size_t>(n));
    for (double rho : {0.2, 0.4, 0.8}) {
        double total = 0.0;
        for (auto c : chosen) {
            std::vector<double> chi(6);
            for (Eigen::Index d = 0; d < 6; ++d)
                chi[static_cast<std::size_t>(d)] = pts(c, d);
            const double p = prior[static_cast<std::size_t>(c)];
            auto gp = GpState::fit(PriorMean::constant(0.0), {{chi, p - 0.5, p}}, 0.001, {rho, 1.0});
            gp.posterior_batch(pts, prior, mu, var);
            const double update = std::abs(mu[static_cast<std::size_t>(c)] - p);
            std::size_t moved = 0;
            for (Eigen::Index i = 0; i < n; ++i)
                moved += std::abs(mu[static_cast<std::size_t>(i)] - prior[static_cast<std::size_t>(i)]) > 0.25 * update;
            total += static_cast<double>(moved) / static_cast<double>(n);
        }
        fractions.push_back(total / static_cast<double>(observations));
    }
    const bool monotone = fractions[0] <= fractions[1] && fractions[1] <= fractions[2];
    return {monotone && fractions[0] < 0.02 && fractions[2] > 0.5,
            fmt("cells moved > 25%% of the update: rho 0.2 -> %.2f%% (< 2%%), 0.4 -> %.2f%%, 0.8 -> %.2f%% (> 50%%), "
                "monotone: %s",
                100 * fractions[0], 100 * fractions[1], 100 * fractions[2], monotone ? "yes" : "NO")};
}

Outcome criterion11(const Artifacts& first) {
    Stopwatch sw;
    Artifacts again;
    criterion3(again);
    criterion4(again);
    criterion5(again);
    std::size_t same = 0, total = 0;
    auto cmp = [&](const std::vector<std::string>& a, const std::vector<std::string>& b) {
        for (std::size_t i = 0; i < std::max(a.size(), b.size()); ++i, ++total)
            same += i < a.size() && i < b.size() && a[i] == b[i];
    };
    cmp(first.c3_archives, again.c3_archives);
    cmp({first.c4_archive}, {again.c4_archive});
    cmp(first.map_bytes, again.map_bytes);
    cmp(first.c5_logs, again.c5_logs);
    return {same == total && total == 5 + 1 + 15 + 15,
            fmt("%zu/%zu artifacts byte-identical on rerun (5 criterion-3 archive pairs, the criterion-4 archive, "
                "15 maps, 15 trial logs); %.1f s",
                same, total, sw.seconds())};
}

} // namespace

int main() {
    Artifacts art;
    std::vector<std::pair<int, std::function<Outcome()>>> criteria{
        {1, criterion1},
        {2, criterion2},
        {3, [&] { return criterion3(art); }},
        {4, [&] { return criterion4(art); }},
        {5, [&] { return criterion5(art); }},
        {6, [&] { return criterion6(art); }},
        {7, [&] { return criterion7(art); }},
        {8, criterion8},
        {9, criterion9},
        {10, criterion10},
        {11, [&] { return criterion11(art); }},
    };
    int failures = 0;
    for (auto& [id, run] : criteria) {
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failures += !o.pass;
        std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << id << ": " << o.detail << std::endl;
    }
    std::cout << (failures ? "acceptance: " + std::to_string(failures) + " criterion(s) failed" : "acceptance: all passed")
              << std::endl;
    return failures ? 1 : 0;
}
