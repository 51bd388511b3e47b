#include "iteqd/map_elites.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <thread>

#include "iteqd/error.hpp"

namespace iteqd {

Genome mutate_discrete(const Genome& genome, double rate, std::size_t levels, Rng& rng) {
    require(levels >= 2, "discrete mutation needs at least two levels");
    Genome out = genome;
    const double step = 1.0 / static_cast<double>(levels - 1);
    for (auto& v : out)
        if (rng.bernoulli(rate))
            v = static_cast<double>(rng.index(levels)) * step;
    return out;
}

double polynomial_delta(double u, double eta_m) {
    const double power = 1.0 / (eta_m + 1.0);
    if (u < 0.5)
        return std::pow(2.0 * u, power) - 1.0;
    return 1.0 - std::pow(2.0 * (1.0 - u), power);
}

Genome mutate_polynomial(const Genome& genome, double rate, double eta_m, Rng& rng) {
    Genome out = genome;
    for (auto& v : out)
        if (rng.bernoulli(rate))
            v = std::clamp(v + polynomial_delta(rng.uniform(), eta_m), 0.0, 1.0);
    return out;
}

Genome mutate(const Genome& genome, const MutationConfig& m, Rng& rng) {
    if (m.kind == MutationKind::discrete)
        return mutate_discrete(genome, m.rate, m.levels, rng);
    return mutate_polynomial(genome, m.rate, m.eta_m, rng);
}

Genome random_genome(std::size_t length, const MutationConfig& m, Rng& rng) {
    Genome g(length);
    if (m.kind == MutationKind::discrete) {
        const double step = 1.0 / static_cast<double>(m.levels - 1);
        for (auto& v : g)
            v = static_cast<double>(rng.index(m.levels)) * step;
    } else {
        for (auto& v : g)
            v = rng.uniform();
    }
    return g;
}

namespace {

void validate(const MapElitesConfig& c) {
    if (c.total_iterations < 1)
        throw ConfigError("empty run: total_iterations must be at least 1");
    if (c.init_random_count < 1 || c.init_random_count > c.total_iterations)
        throw ConfigError("init_random_count must be in [1, total_iterations]");
    if (c.genome_length < 1)
        throw ConfigError("genome_length must be positive");
    if (c.workers < 1)
        throw ConfigError("workers must be positive");
}

class Clock {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

void insert_if_valid(ArchiveGrid& archive, Genome genome, Evaluation ev) {
    if (!ev.valid)
        return;
    archive.try_insert(Elite{std::move(genome), std::move(ev.descriptor), ev.performance});
}

[[noreturn]] void no_valid_initial(const Evaluator& evaluator) {
    throw EmptyArchiveError("archive is empty after random initialization: evaluator '" + evaluator.name +
                            "' rejected every initial genome");
}

MapElitesResult run_serial(const MapElitesConfig& c, const GridSpec& spec, const Evaluator& evaluator,
                           const CheckpointSink& sink) {
    Rng rng(split_seed(c.seed, 0));
    ArchiveGrid archive(spec);
    Clock clock;
    for (std::uint64_t it = 0; it < c.total_iterations; ++it) {
        Genome candidate;
        if (it < c.init_random_count) {
            candidate = random_genome(c.genome_length, c.mutation, rng);
        } else {
            if (archive.empty())
                no_valid_initial(evaluator);
            candidate = mutate(archive.random_elite(rng).genome, c.mutation, rng);
        }
        auto ev = evaluator(candidate);
        insert_if_valid(archive, std::move(candidate), std::move(ev));

        const auto done = it + 1;
        if (sink && c.checkpoint_every > 0 && (done % c.checkpoint_every == 0 || done == c.total_iterations))
            sink(Checkpoint{done, archive.stats(), clock.seconds()});
    }
    if (archive.empty())
        no_valid_initial(evaluator);
    return {std::move(archive), c.total_iterations};
}

// Each batch: workers generate and evaluate disjoint slices against the archive
// snapshot from the batch start; results are inserted in slice order.
MapElitesResult run_batched(const MapElitesConfig& c, const GridSpec& spec, const Evaluator& evaluator,
                            const CheckpointSink& sink) {
    const std::size_t per_worker = 64;
    std::vector<Rng> streams;
    for (std::size_t w = 0; w < c.workers; ++w)
        streams.emplace_back(split_seed(c.seed, w + 1));

    ArchiveGrid archive(spec);
    Clock clock;
    std::uint64_t done = 0;
    std::uint64_t next_checkpoint = c.checkpoint_every;
    std::vector<Genome> genomes;
    std::vector<Evaluation> results;

    while (done < c.total_iterations) {
        const std::uint64_t random_left = done < c.init_random_count ? c.init_random_count - done : 0;
        std::uint64_t batch = std::min<std::uint64_t>(per_worker * c.workers, c.total_iterations - done);
        if (random_left > 0)
            batch = std::min(batch, random_left);
        else if (archive.empty())
            no_valid_initial(evaluator);

        genomes.assign(batch, {});
        results.assign(batch, {});
        const bool random_phase = random_left > 0;
        auto work = [&](std::size_t w) {
            Rng& rng = streams[w];
            for (std::size_t i = w; i < batch; i += c.workers) {
                genomes[i] = random_phase ? random_genome(c.genome_length, c.mutation, rng)
                                          : mutate(archive.random_elite(rng).genome, c.mutation, rng);
                results[i] = evaluator(genomes[i]);
            }
        };
        {
            std::vector<std::jthread> pool;
            for (std::size_t w = 1; w < c.workers; ++w)
                pool.emplace_back(work, w);
            work(0);
        }
        for (std::size_t i = 0; i < batch; ++i)
            insert_if_valid(archive, std::move(genomes[i]), std::move(results[i]));
        done += batch;

        if (sink && c.checkpoint_every > 0 && (done >= next_checkpoint || done == c.total_iterations)) {
            sink(Checkpoint{done, archive.stats(), clock.seconds()});
            while (next_checkpoint <= done)
                next_checkpoint += c.checkpoint_every;
        }
    }
    if (archive.empty())
        no_valid_initial(evaluator);
    return {std::move(archive), c.total_iterations};
}

} // namespace

MapElitesResult run_map_elites(const MapElitesConfig& config, const GridSpec& spec, const Evaluator& evaluator,
                               const CheckpointSink& on_checkpoint) {
    validate(config);
    if (config.workers == 1)
        return run_serial(config, spec, evaluator, on_checkpoint);
    return run_batched(config, spec, evaluator, on_checkpoint);
}

MapElitesResult run_random_sampling(const MapElitesConfig& config, const GridSpec& spec,
                                    const Evaluator& evaluator) {
    validate(config);
    Rng rng(split_seed(config.seed, 0));
    ArchiveGrid archive(spec);
    for (std::uint64_t it = 0; it < config.total_iterations; ++it) {
        auto g = random_genome(config.genome_length, config.mutation, rng);
        auto ev = evaluator(g);
        insert_if_valid(archive, std::move(g), std::move(ev));
    }
    return {std::move(archive), config.total_iterations};
}

} // namespace iteqd
