#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "iteqd/arm.hpp"
#include "iteqd/error.hpp"
#include "iteqd/map_elites.hpp"

using namespace iteqd;

TEST_CASE("mutate_discrete") {
    Rng rng(3);
    Genome g(36, 0.5);
    CHECK(mutate_discrete(g, 0.0, 21, rng) == g);

    SUBCASE("rate 1 resamples uniformly over 21 levels") {
        std::vector<int> counts(21, 0);
        const int draws = 100000;
        for (int i = 0; i < draws; ++i) {
            const double v = mutate_discrete({0.0}, 1.0, 21, rng)[0];
            const auto level = std::lround(v * 20.0);
            REQUIRE(std::abs(v - level / 20.0) < 1e-15);
            ++counts[static_cast<std::size_t>(level)];
        }
        for (int c : counts)
            CHECK(std::abs(static_cast<double>(c) / draws - 1.0 / 21.0) <= 0.005);
    }

    SUBCASE("rate 0.05 changes 36 * 0.05 * 20/21 components on average") {
        const int draws = 100000;
        long changed = 0;
        for (int i = 0; i < draws; ++i) {
            auto m = mutate_discrete(g, 0.05, 21, rng);
            for (std::size_t k = 0; k < g.size(); ++k)
                changed += m[k] != g[k];
        }
        const double mean = static_cast<double>(changed) / draws;
        CHECK(std::abs(mean - 36.0 * 0.05 * 20.0 / 21.0) <= 0.02);
    }
}

TEST_CASE("polynomial mutation") {
    CHECK(polynomial_delta(0.5, 10.0) == 0.0);
    CHECK(polynomial_delta(0.0, 10.0) == -1.0);
    CHECK(polynomial_delta(1.0, 10.0) == 1.0);

    Rng rng(11);
    Genome g{0.2, 0.5, 0.9};
    CHECK(mutate_polynomial(g, 0.0, 10.0, rng) == g);

    const int draws = 1000000;
    double sum = 0.0;
    double max_step = 0.0;
    for (int i = 0; i < draws; ++i) {
        const double v = mutate_polynomial({0.5}, 1.0, 10.0, rng)[0];
        sum += v;
        max_step = std::max(max_step, std::abs(v - 0.5));
        REQUIRE(v >= 0.0);
        REQUIRE(v <= 1.0);
    }
    CHECK(std::abs(sum / draws - 0.5) <= 0.002);
    CHECK(max_step <= 1.0);
}

TEST_CASE("run_map_elites: one iteration fills one cell") {
    MapElitesConfig c;
    c.total_iterations = 1;
    c.init_random_count = 1;
    c.genome_length = 2;
    Evaluator ev{"identity", [](const Genome& g) { return Evaluation{g, 1.0, true}; }};
    auto r = run_map_elites(c, GridSpec::uniform(2, 0.0, 1.0, 5), ev);
    CHECK(r.archive.filled_count() == 1);
    CHECK(r.evaluations == 1);
}

TEST_CASE("run_map_elites matches a set-based replay oracle") {
    // Constant performance, descriptor = first two genes: ties are rejected, so
    // the archive holds the first genome seen in each cell.
    const auto spec = GridSpec::uniform(2, 0.0, 1.0, 20);
    MapElitesConfig c;
    c.total_iterations = 100000;
    c.init_random_count = 400;
    c.genome_length = 4;
    c.mutation = MutationConfig::polynomial(0.125, 10.0);
    c.seed = 77;
    Evaluator ev{"constant", [](const Genome& g) { return Evaluation{{g[0], g[1]}, 1.0, true}; }};
    auto result = run_map_elites(c, spec, ev);

    Rng rng(split_seed(c.seed, 0));
    std::set<std::pair<long, long>> visited;
    std::vector<Genome> first_in_cell;
    auto cell_of = [](const Genome& g) {
        auto bin = [](double v) { return std::min(19L, static_cast<long>(std::floor(v * 20.0))); };
        return std::pair{bin(g[0]), bin(g[1])};
    };
    for (std::uint64_t it = 0; it < c.total_iterations; ++it) {
        Genome g;
        if (it < c.init_random_count) {
            g.resize(4);
            for (auto& v : g)
                v = rng.uniform();
        } else {
            const auto& parent = first_in_cell[rng.index(first_in_cell.size())];
            g = parent;
            for (auto& v : g)
                if (rng.uniform() < 0.125) {
                    const double u = rng.uniform();
                    const double delta = u < 0.5 ? std::pow(2 * u, 1.0 / 11.0) - 1.0 : 1.0 - std::pow(2 * (1 - u), 1.0 / 11.0);
                    v = std::clamp(v + delta, 0.0, 1.0);
                }
        }
        if (visited.insert(cell_of(g)).second)
            first_in_cell.push_back(g);
    }
    CHECK(result.archive.filled_count() == visited.size());
    CHECK(result.evaluations == c.total_iterations);
}

TEST_CASE("run_map_elites is deterministic and monotone across checkpoints") {
    MapElitesConfig c;
    c.total_iterations = 300000;
    c.genome_length = 8;
    c.seed = 5;
    c.checkpoint_every = 100000;
    std::vector<Checkpoint> checkpoints;
    auto a = run_map_elites(c, arm::Workspace{}.grid(), arm::map_evaluator(),
                            [&](const Checkpoint& cp) { checkpoints.push_back(cp); });
    auto b = run_map_elites(c, arm::Workspace{}.grid(), arm::map_evaluator());

    std::stringstream sa, sb;
    write_archive(sa, a.archive, {8, c.total_iterations, c.seed, "", ""});
    write_archive(sb, b.archive, {8, c.total_iterations, c.seed, "", ""});
    CHECK(sa.str() == sb.str());

    REQUIRE(checkpoints.size() == 3);
    for (std::size_t i = 1; i < checkpoints.size(); ++i) {
        CHECK(checkpoints[i].iterations == (i + 1) * 100000);
        CHECK(checkpoints[i].stats.filled >= checkpoints[i - 1].stats.filled);
        CHECK(*checkpoints[i].stats.max_performance >= *checkpoints[i - 1].stats.max_performance);
    }
}

TEST_CASE("run_map_elites errors") {
    const auto spec = GridSpec::uniform(1, 0.0, 1.0, 4);
    Evaluator never{"always-invalid", [](const Genome& g) { return Evaluation{{g[0]}, 0.0, false}; }};
    MapElitesConfig c;
    c.total_iterations = 500;
    c.genome_length = 1;
    try {
        run_map_elites(c, spec, never);
        FAIL("expected EmptyArchiveError");
    } catch (const EmptyArchiveError& e) {
        CHECK(std::string(e.what()).find("always-invalid") != std::string::npos);
    }
    c.total_iterations = 0;
    CHECK_THROWS_AS(run_map_elites(c, spec, never), ConfigError);
}

TEST_CASE("parallel mode satisfies the archive invariants") {
    MapElitesConfig c;
    c.total_iterations = 50000;
    c.genome_length = 8;
    c.seed = 3;
    c.workers = 3;
    const auto spec = arm::Workspace{}.grid();
    auto r = run_map_elites(c, spec, arm::map_evaluator());
    CHECK(r.evaluations == 50000);
    CHECK(r.archive.filled_count() > 1000);
    for (const auto& cell : r.archive.cells()) {
        CHECK(flatten(cell_index(cell.elite.descriptor, spec), spec) == cell.index);
        auto ev = arm::map_creation_eval(cell.elite.genome);
        CHECK(ev.valid);
        CHECK(ev.performance == cell.elite.performance);
    }
}

TEST_CASE("discrete genomes stay on the level grid") {
    MapElitesConfig c;
    c.total_iterations = 5000;
    c.genome_length = 36;
    c.mutation = MutationConfig::discrete();
    Evaluator ev{"first-six", [](const Genome& g) { return Evaluation{{g.begin(), g.begin() + 6}, g[10], true}; }};
    auto r = run_map_elites(c, GridSpec::uniform(6, 0.0, 1.0, 5), ev);
    for (const auto& cell : r.archive.cells())
        for (double v : cell.elite.genome)
            CHECK(std::abs(v * 20.0 - std::round(v * 20.0)) < 1e-12);
}
