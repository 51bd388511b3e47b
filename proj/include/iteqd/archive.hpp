#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "iteqd/random.hpp"

namespace iteqd {

using Genome = std::vector<double>;
using Descriptor = std::vector<double>;
using MultiIndex = std::vector<std::size_t>;

/// Discretization of the behavior space: a box split into equal bins per dimension.
struct GridSpec {
    std::vector<double> lower;
    std::vector<double> upper;
    std::vector<std::size_t> bins;

    GridSpec() = default;
    GridSpec(std::vector<double> lower, std::vector<double> upper, std::vector<std::size_t> bins);

    /// Same bounds and bin count on every dimension.
    static GridSpec uniform(std::size_t dims, double lower, double upper, std::size_t bins);

    std::size_t dims() const noexcept { return bins.size(); }
    std::uint64_t total_cells() const noexcept;

    bool operator==(const GridSpec&) const = default;
};

/// Per-dimension bin of `descriptor`. Values outside the box clamp to the edge bins.
MultiIndex cell_index(std::span<const double> descriptor, const GridSpec& spec);

/// Row-major flattening (last dimension varies fastest).
std::uint64_t flatten(const MultiIndex& index, const GridSpec& spec);
MultiIndex unflatten(std::uint64_t flat, const GridSpec& spec);

struct Elite {
    Genome genome;
    Descriptor descriptor; // actual (non-discretized) behavior
    double performance = 0.0;
};

struct Cell {
    std::uint64_t index = 0;
    Elite elite;
};

enum class InsertOutcome { inserted_new, replaced, rejected };

struct ArchiveStats {
    std::size_t filled = 0;
    std::optional<double> mean_performance;
    std::optional<double> max_performance;
};

/// Behavior-performance map: at most one elite per grid cell.
///
/// Occupied cells live in a dense vector (insertion order) with a hash index
/// from flattened cell id to slot, so uniform selection over occupied cells is
/// O(1) and memory scales with the number of filled cells, not the grid size.
/// Not synchronized: concurrent writers must linearize calls to try_insert.
class ArchiveGrid {
public:
    explicit ArchiveGrid(GridSpec spec);

    const GridSpec& spec() const noexcept { return spec_; }
    std::size_t filled_count() const noexcept { return cells_.size(); }
    bool empty() const noexcept { return cells_.empty(); }

    /// Stores `elite` if its cell is empty or it strictly beats the incumbent.
    InsertOutcome try_insert(Elite elite);

    /// Uniformly random occupied cell. Throws EmptyArchiveError when empty.
    const Elite& random_elite(Rng& rng) const;

    const Elite* find(std::uint64_t flat_index) const;

    /// Occupied cells in insertion order.
    std::span<const Cell> cells() const noexcept { return cells_; }

    /// Occupied cells ordered by flattened index.
    std::vector<const Cell*> sorted_cells() const;

    ArchiveStats stats() const;

private:
    GridSpec spec_;
    std::vector<Cell> cells_;
    std::unordered_map<std::uint64_t, std::size_t> slot_of_;
};

/// Run metadata stored next to the cells in an archive file.
struct ArchiveMetadata {
    std::size_t genome_length = 0;
    std::uint64_t evaluations = 0;
    std::uint64_t seed = 0;
    std::string config_hash;
    std::string tool_version;
};

/// Writes the versioned CSV interchange format (header `ITEQD-ARCHIVE v1`).
void write_archive(std::ostream& out, const ArchiveGrid& grid, const ArchiveMetadata& meta);

struct LoadedArchive {
    ArchiveGrid grid;
    ArchiveMetadata meta;
};

/// Parses the CSV format. Throws SchemaError on any malformed or inconsistent content.
LoadedArchive read_archive(std::istream& in);

void save_archive(const std::string& path, const ArchiveGrid& grid, const ArchiveMetadata& meta);
LoadedArchive load_archive(const std::string& path);

} // namespace iteqd
