#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "config.hpp"

namespace iteqd::cli {

/// File arguments that are not part of the hashed configuration.
struct CommandIo {
    std::string out;
    std::string progress; // empty: stdout
    std::string archive;
    std::vector<std::string> maps;
    std::string traj;
    std::string out_prefix;
};

/// Input/output failure; reported with the runtime exit code.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

void map_create(const RunConfig& config, const CommandIo& io);
void map_stats(const RunConfig& config, const CommandIo& io);
void map_export(const RunConfig& config, const CommandIo& io);
void adapt_run(const RunConfig& config, const CommandIo& io);
void bench_variants(const RunConfig& config, const CommandIo& io);
void descriptors_compute(const RunConfig& config, const CommandIo& io);

} // namespace iteqd::cli
