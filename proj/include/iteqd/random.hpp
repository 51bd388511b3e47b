#pragma once

#include <cstdint>
#include <random>

namespace iteqd {

/// Derives an independent 64-bit seed for sub-stream `stream` of `seed`.
///
/// Uses the splitmix64 finalizer over (seed, stream) so that, e.g., worker k of
/// a parallel run and map k of a batch never share a sequence, while serial
/// runs (stream 0) stay unaffected by how many other streams exist.
std::uint64_t split_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

/// Seeded generator plus the few draws the algorithms need.
class Rng {
public:
    using engine_type = std::mt19937_64;

    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }

    /// Uniform integer in [0, n).
    std::size_t index(std::size_t n) {
        return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
    }

    double normal(double mean, double stddev) {
        return std::normal_distribution<double>(mean, stddev)(engine_);
    }

    bool bernoulli(double p) { return uniform() < p; }

    engine_type& engine() { return engine_; }

private:
    engine_type engine_;
};

} // namespace iteqd
