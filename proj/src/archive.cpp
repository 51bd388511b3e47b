#include "iteqd/archive.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include "iteqd/error.hpp"
#include "iteqd/text.hpp"

namespace iteqd {

GridSpec::GridSpec(std::vector<double> lo, std::vector<double> hi, std::vector<std::size_t> b)
    : lower(std::move(lo)), upper(std::move(hi)), bins(std::move(b)) {
    require(!bins.empty(), "grid needs at least one dimension");
    require(lower.size() == bins.size() && upper.size() == bins.size(),
            "grid bounds and bin counts must have the same length");
    for (std::size_t d = 0; d < bins.size(); ++d) {
        require(lower[d] < upper[d], "grid lower bound must be below upper bound");
        require(bins[d] >= 1, "grid bin count must be positive");
    }
}

GridSpec GridSpec::uniform(std::size_t dims, double lo, double hi, std::size_t b) {
    return GridSpec(std::vector<double>(dims, lo), std::vector<double>(dims, hi),
                    std::vector<std::size_t>(dims, b));
}

std::uint64_t GridSpec::total_cells() const noexcept {
    std::uint64_t n = 1;
    for (auto b : bins)
        n *= b;
    return n;
}

MultiIndex cell_index(std::span<const double> descriptor, const GridSpec& spec) {
    if (descriptor.size() != spec.dims())
        throw ContractViolation("descriptor has " + std::to_string(descriptor.size()) +
                                " dimensions, grid has " + std::to_string(spec.dims()));
    MultiIndex idx(spec.dims());
    for (std::size_t d = 0; d < spec.dims(); ++d) {
        const double scaled = (descriptor[d] - spec.lower[d]) * static_cast<double>(spec.bins[d]) /
                              (spec.upper[d] - spec.lower[d]);
        const auto last = static_cast<double>(spec.bins[d] - 1);
        // NaN compares false everywhere and lands in bin 0.
        const double clamped = scaled >= last ? last : (scaled > 0.0 ? std::floor(scaled) : 0.0);
        idx[d] = static_cast<std::size_t>(clamped);
    }
    return idx;
}

std::uint64_t flatten(const MultiIndex& index, const GridSpec& spec) {
    require(index.size() == spec.dims(), "multi-index dimension mismatch");
    std::uint64_t flat = 0;
    for (std::size_t d = 0; d < spec.dims(); ++d) {
        require(index[d] < spec.bins[d], "multi-index out of range");
        flat = flat * spec.bins[d] + index[d];
    }
    return flat;
}

MultiIndex unflatten(std::uint64_t flat, const GridSpec& spec) {
    require(flat < spec.total_cells(), "flat index out of range");
    MultiIndex idx(spec.dims());
    for (std::size_t d = spec.dims(); d-- > 0;) {
        idx[d] = flat % spec.bins[d];
        flat /= spec.bins[d];
    }
    return idx;
}

ArchiveGrid::ArchiveGrid(GridSpec spec) : spec_(std::move(spec)) {}

InsertOutcome ArchiveGrid::try_insert(Elite elite) {
    const auto flat = flatten(cell_index(elite.descriptor, spec_), spec_);
    auto it = slot_of_.find(flat);
    if (it == slot_of_.end()) {
        slot_of_.emplace(flat, cells_.size());
        cells_.push_back(Cell{flat, std::move(elite)});
        return InsertOutcome::inserted_new;
    }
    Elite& incumbent = cells_[it->second].elite;
    if (incumbent.performance < elite.performance) {
        incumbent = std::move(elite);
        return InsertOutcome::replaced;
    }
    return InsertOutcome::rejected;
}

const Elite& ArchiveGrid::random_elite(Rng& rng) const {
    if (cells_.empty())
        throw EmptyArchiveError("cannot select from an empty archive");
    return cells_[rng.index(cells_.size())].elite;
}

const Elite* ArchiveGrid::find(std::uint64_t flat_index) const {
    auto it = slot_of_.find(flat_index);
    return it == slot_of_.end() ? nullptr : &cells_[it->second].elite;
}

std::vector<const Cell*> ArchiveGrid::sorted_cells() const {
    std::vector<const Cell*> out;
    out.reserve(cells_.size());
    for (const auto& c : cells_)
        out.push_back(&c);
    std::sort(out.begin(), out.end(), [](const Cell* a, const Cell* b) { return a->index < b->index; });
    return out;
}

ArchiveStats ArchiveGrid::stats() const {
    ArchiveStats s;
    s.filled = cells_.size();
    if (cells_.empty())
        return s;
    double sum = 0.0;
    double best = cells_.front().elite.performance;
    for (const auto& c : cells_) {
        sum += c.elite.performance;
        best = std::max(best, c.elite.performance);
    }
    s.mean_performance = sum / static_cast<double>(cells_.size());
    s.max_performance = best;
    return s;
}

// ---------------------------------------------------------------------------
// CSV interchange format

namespace {

constexpr std::string_view kMagic = "ITEQD-ARCHIVE v1";

template <typename T, typename F>
void write_row(std::ostream& out, std::string_view key, const std::vector<T>& values, F fmt) {
    out << key;
    for (const auto& v : values)
        out << ',' << fmt(v);
    out << '\n';
}

std::string next_line(std::istream& in, std::string_view expect) {
    std::string line;
    if (!std::getline(in, line))
        throw SchemaError("archive truncated: expected " + std::string(expect));
    if (!line.empty() && line.back() == '\r')
        line.pop_back();
    return line;
}

// Reads `key,v1,...` and returns the value fields.
std::vector<std::string> keyed_row(const std::string& line, std::string_view key) {
    auto fields = text::split(line);
    if (fields.empty() || fields[0] != key)
        throw SchemaError("archive: expected '" + std::string(key) + "' row, got '" + line + "'");
    return {fields.begin() + 1, fields.end()};
}

std::string single_value(const std::string& line, std::string_view key) {
    auto f = keyed_row(line, key);
    if (f.size() != 1)
        throw SchemaError("archive: '" + std::string(key) + "' takes exactly one value");
    return f[0];
}

} // namespace

void write_archive(std::ostream& out, const ArchiveGrid& grid, const ArchiveMetadata& meta) {
    const auto& spec = grid.spec();
    const auto fmt = [](double v) { return text::format_double(v); };
    out << kMagic << '\n';
    out << "tool_version," << meta.tool_version << '\n';
    out << "config_hash," << meta.config_hash << '\n';
    out << "dims," << spec.dims() << '\n';
    write_row(out, "lower", spec.lower, fmt);
    write_row(out, "upper", spec.upper, fmt);
    write_row(out, "bins", spec.bins, [](std::size_t b) { return b; });
    out << "genome_length," << meta.genome_length << '\n';
    out << "evaluations," << meta.evaluations << '\n';
    out << "seed," << meta.seed << '\n';
    out << "cells," << grid.filled_count() << '\n';

    out << "index";
    for (std::size_t d = 0; d < spec.dims(); ++d)
        out << ",d" << d;
    out << ",performance";
    for (std::size_t g = 0; g < meta.genome_length; ++g)
        out << ",g" << g;
    out << '\n';

    for (const Cell* cell : grid.sorted_cells()) {
        if (cell->elite.genome.size() != meta.genome_length)
            throw ContractViolation("elite genome length differs from archive metadata");
        out << cell->index;
        for (double v : cell->elite.descriptor)
            out << ',' << fmt(v);
        out << ',' << fmt(cell->elite.performance);
        for (double v : cell->elite.genome)
            out << ',' << fmt(v);
        out << '\n';
    }
}

LoadedArchive read_archive(std::istream& in) {
    if (next_line(in, "header") != kMagic)
        throw SchemaError("not an archive file (missing 'ITEQD-ARCHIVE v1' header)");

    ArchiveMetadata meta;
    meta.tool_version = single_value(next_line(in, "tool_version"), "tool_version");
    meta.config_hash = single_value(next_line(in, "config_hash"), "config_hash");
    const auto dims = text::parse_uint(single_value(next_line(in, "dims"), "dims"), "dims");

    auto parse_reals = [&](std::string_view key) {
        auto f = keyed_row(next_line(in, key), key);
        if (f.size() != dims)
            throw SchemaError("archive: '" + std::string(key) + "' must have " + std::to_string(dims) + " values");
        std::vector<double> v;
        for (const auto& s : f)
            v.push_back(text::parse_double(s, key));
        return v;
    };
    auto lower = parse_reals("lower");
    auto upper = parse_reals("upper");
    std::vector<std::size_t> bins;
    {
        auto f = keyed_row(next_line(in, "bins"), "bins");
        if (f.size() != dims)
            throw SchemaError("archive: 'bins' must have " + std::to_string(dims) + " values");
        for (const auto& s : f)
            bins.push_back(text::parse_uint(s, "bins"));
    }
    meta.genome_length = text::parse_uint(single_value(next_line(in, "genome_length"), "genome_length"), "genome_length");
    meta.evaluations = text::parse_uint(single_value(next_line(in, "evaluations"), "evaluations"), "evaluations");
    meta.seed = text::parse_uint(single_value(next_line(in, "seed"), "seed"), "seed");
    const auto count = text::parse_uint(single_value(next_line(in, "cells"), "cells"), "cells");

    GridSpec spec;
    try {
        spec = GridSpec(std::move(lower), std::move(upper), std::move(bins));
    } catch (const ContractViolation& e) {
        throw SchemaError(std::string("archive grid: ") + e.what());
    }
    ArchiveGrid grid(spec);

    const auto header = next_line(in, "column header");
    if (text::split(header).size() != 2 + dims + meta.genome_length)
        throw SchemaError("archive column header does not match dims/genome_length");

    for (std::uint64_t r = 0; r < count; ++r) {
        const auto line = next_line(in, "cell record");
        auto f = text::split(line);
        if (f.size() != 2 + dims + meta.genome_length)
            throw SchemaError("archive record " + std::to_string(r) + " has wrong field count");
        const auto flat = text::parse_uint(f[0], "index");
        Elite e;
        for (std::size_t d = 0; d < dims; ++d)
            e.descriptor.push_back(text::parse_double(f[1 + d], "descriptor"));
        e.performance = text::parse_double(f[1 + dims], "performance");
        for (std::size_t g = 0; g < meta.genome_length; ++g)
            e.genome.push_back(text::parse_double(f[2 + dims + g], "genome"));
        if (flatten(cell_index(e.descriptor, spec), spec) != flat)
            throw SchemaError("archive record " + std::to_string(r) + ": descriptor does not map to its cell index");
        if (grid.try_insert(std::move(e)) != InsertOutcome::inserted_new)
            throw SchemaError("archive record " + std::to_string(r) + ": duplicate cell index");
    }
    return {std::move(grid), std::move(meta)};
}

void save_archive(const std::string& path, const ArchiveGrid& grid, const ArchiveMetadata& meta) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot open '" + path + "' for writing");
    write_archive(out, grid, meta);
    if (!out)
        throw std::runtime_error("failed writing '" + path + "'");
}

LoadedArchive load_archive(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open archive '" + path + "'");
    return read_archive(in);
}

} // namespace iteqd
