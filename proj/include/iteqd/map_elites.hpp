#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "iteqd/archive.hpp"
#include "iteqd/random.hpp"

namespace iteqd {

/// Outcome of simulating one genome.
struct Evaluation {
    Descriptor descriptor;
    double performance = 0.0;
    bool valid = true; // false: do not insert (e.g. self-collision)
};

/// Deterministic genome -> evaluation function, named for diagnostics.
struct Evaluator {
    std::string name;
    std::function<Evaluation(const Genome&)> fn;

    Evaluation operator()(const Genome& g) const { return fn(g); }
};

enum class MutationKind { discrete, polynomial };

struct MutationConfig {
    MutationKind kind = MutationKind::polynomial;
    double rate = 0.125;
    double eta_m = 10.0;      // polynomial only
    std::size_t levels = 21;  // discrete only: {0, 1/(levels-1), ..., 1}

    static MutationConfig discrete(double rate = 0.05, std::size_t levels = 21) {
        return {MutationKind::discrete, rate, 10.0, levels};
    }
    static MutationConfig polynomial(double rate = 0.125, double eta_m = 10.0) {
        return {MutationKind::polynomial, rate, eta_m, 21};
    }
};

/// Resamples each component with probability `rate`, uniformly over `levels` equally spaced values in [0,1].
Genome mutate_discrete(const Genome& genome, double rate, std::size_t levels, Rng& rng);

/// Polynomial perturbation of distribution index `eta_m`; u = 0.5 gives 0, |delta| <= 1.
double polynomial_delta(double u, double eta_m);

/// Adds polynomial_delta to each component with probability `rate`, clamping to [0,1].
Genome mutate_polynomial(const Genome& genome, double rate, double eta_m, Rng& rng);

Genome mutate(const Genome& genome, const MutationConfig& mutation, Rng& rng);

/// Uniform random genome; on the level grid for discrete mutation.
Genome random_genome(std::size_t length, const MutationConfig& mutation, Rng& rng);

struct MapElitesConfig {
    std::uint64_t total_iterations = 1;
    std::uint64_t init_random_count = 400;
    std::size_t genome_length = 8;
    MutationConfig mutation;
    std::uint64_t seed = 0;
    std::size_t workers = 1;              // >1: batch-parallel evaluation, not bit-identical to serial
    std::uint64_t checkpoint_every = 100000;
};

struct Checkpoint {
    std::uint64_t iterations = 0;
    ArchiveStats stats;
    double wall_seconds = 0.0;
};

struct MapElitesResult {
    ArchiveGrid archive;
    std::uint64_t evaluations = 0;
};

using CheckpointSink = std::function<void(const Checkpoint&)>;

/// Illumination loop: random genomes first, then select-mutate-evaluate-insert.
/// Throws EmptyArchiveError (naming the evaluator) when no initial genome is valid.
MapElitesResult run_map_elites(const MapElitesConfig& config, const GridSpec& spec,
                               const Evaluator& evaluator, const CheckpointSink& on_checkpoint = {});

/// Baseline with the same budget: every genome uniform random, no selection from the archive.
MapElitesResult run_random_sampling(const MapElitesConfig& config, const GridSpec& spec,
                                    const Evaluator& evaluator);

} // namespace iteqd
