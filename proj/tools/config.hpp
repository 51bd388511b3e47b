#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace iteqd::cli {

/// Flat key=value configuration. Later layers win: defaults, config file, ITEQD_* environment, flags.
class RunConfig {
public:
    RunConfig();

    void load_file(const std::string& path);
    void apply_environment();
    void set(const std::string& key, const std::string& value);

    bool has(const std::string& key) const;
    std::string str(const std::string& key) const;
    double real(const std::string& key) const;
    std::uint64_t uint(const std::string& key) const;
    bool flag(const std::string& key) const;
    std::vector<std::string> list(const std::string& key) const;

    /// Task-dependent defaults (arm vs unit-cube M-BOA parameters) for keys nobody set.
    void resolve_task_defaults();

    /// FNV-1a over the sorted key=value lines.
    std::string hash() const;

    static const std::vector<std::string>& known_keys();

private:
    std::map<std::string, std::string> values_;
};

} // namespace iteqd::cli
