#include "config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "iteqd/error.hpp"
#include "iteqd/text.hpp"

namespace iteqd::cli {

namespace {

// Keys whose default depends on the task; left empty until resolve_task_defaults().
const std::vector<std::string> kTaskDependent{"rho",        "kappa",      "alpha",        "noise_var",
                                               "max_trials", "alpha_stop", "genome_length"};

} // namespace

const std::vector<std::string>& RunConfig::known_keys() {
    static const std::vector<std::string> keys{
        "task",        "iterations", "init_random", "mutation",   "mutation_rate", "eta_m",      "genome_length",
        "dims",        "bins",       "seed",        "workers",    "checkpoint_every", "rho",     "kappa",
        "alpha",       "noise_var",  "max_trials",  "alpha_stop", "bin_x",         "bin_y",      "radius",
        "damage",      "shift",      "budget",      "variants",   "noise",         "seeds",      "damages",
        "cuts",        "raw_candidates", "prescreen_raw", "kind", "basis_seed", "drop_threshold",
    };
    return keys;
}

RunConfig::RunConfig() {
    values_ = {
        {"task", "arm"},        {"iterations", "100000"}, {"init_random", "400"},   {"mutation", "polynomial"},
        {"mutation_rate", ""},  {"eta_m", "10"},          {"dims", "2"},
        {"bins", "20"},         {"seed", "0"},            {"workers", "1"},         {"checkpoint_every", "100000"},
        {"bin_x", "0.0"},       {"bin_y", "0.5"},         {"radius", "0.05"},       {"damage", "none"},
        {"shift", "0.1"},       {"budget", "17"},         {"variants", "all"},      {"noise", "true"},
        {"seeds", "1"},         {"damages", "C1,C2,C3,C4,C5"}, {"cuts", "17,150"},  {"raw_candidates", "10000"},
        {"prescreen_raw", "true"}, {"kind", "duty_factor"}, {"basis_seed", "0"},  {"drop_threshold", ""},
    };
    for (const auto& k : kTaskDependent)
        values_[k] = "";
}

void RunConfig::set(const std::string& key, const std::string& value) {
    if (std::find(known_keys().begin(), known_keys().end(), key) == known_keys().end())
        throw ConfigError("unknown configuration key '" + key + "'");
    values_[key] = value;
}

void RunConfig::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file '" + path + "'");
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto body = text::trim(line);
        if (body.empty() || body.front() == '#')
            continue;
        const auto eq = body.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key=value");
        set(std::string(text::trim(body.substr(0, eq))), std::string(text::trim(body.substr(eq + 1))));
    }
}

void RunConfig::apply_environment() {
    for (const auto& key : known_keys()) {
        std::string name = "ITEQD_" + key;
        std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) { return std::toupper(c); });
        if (const char* v = std::getenv(name.c_str()))
            values_[key] = v;
    }
}

bool RunConfig::has(const std::string& key) const {
    auto it = values_.find(key);
    return it != values_.end() && !it->second.empty();
}

std::string RunConfig::str(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end())
        throw ConfigError("missing configuration key '" + key + "'");
    return it->second;
}

double RunConfig::real(const std::string& key) const {
    try {
        return text::parse_double(str(key), key);
    } catch (const SchemaError& e) {
        throw ConfigError(e.what());
    }
}

std::uint64_t RunConfig::uint(const std::string& key) const {
    try {
        return text::parse_uint(str(key), key);
    } catch (const SchemaError& e) {
        throw ConfigError(e.what());
    }
}

bool RunConfig::flag(const std::string& key) const {
    const auto v = str(key);
    if (v == "true" || v == "1" || v == "yes" || v == "on")
        return true;
    if (v == "false" || v == "0" || v == "no" || v == "off")
        return false;
    throw ConfigError("'" + key + "' must be true or false, got '" + v + "'");
}

std::vector<std::string> RunConfig::list(const std::string& key) const {
    std::vector<std::string> out;
    for (auto part : text::split(str(key)))
        if (auto t = text::trim(part); !t.empty())
            out.emplace_back(t);
    return out;
}

void RunConfig::resolve_task_defaults() {
    const auto task = str("task");
    if (task != "arm" && task != "synthetic" && task != "trajectory")
        throw ConfigError("task must be arm, synthetic or trajectory, got '" + task + "'");
    const auto mutation = str("mutation");
    if (mutation != "polynomial" && mutation != "discrete")
        throw ConfigError("mutation must be polynomial or discrete, got '" + mutation + "'");
    const bool arm = task == "arm";
    const std::map<std::string, std::string> arm_defaults{
        {"rho", "0.1"}, {"kappa", "0.3"}, {"alpha", "0.9"}, {"noise_var", "0.03"}, {"max_trials", "31"}, {"alpha_stop", "false"}, {"genome_length", "8"}};
    const std::map<std::string, std::string> cube_defaults{
        {"rho", "0.4"}, {"kappa", "0.05"}, {"alpha", "0.9"}, {"noise_var", "0.001"}, {"max_trials", "20"}, {"alpha_stop", "true"}, {"genome_length", "6"}};
    for (const auto& k : kTaskDependent)
        if (!has(k))
            values_[k] = (arm ? arm_defaults : cube_defaults).at(k);
    if (!has("mutation_rate"))
        values_["mutation_rate"] = mutation == "discrete" ? "0.05" : "0.125";
    if (arm && uint("genome_length") != 8)
        throw ConfigError("the arm task needs genome_length 8, got " + str("genome_length"));
}

std::string RunConfig::hash() const {
    std::ostringstream canon;
    for (const auto& [k, v] : values_)
        canon << k << '=' << v << '\n';
    return text::fnv1a_hex(canon.str());
}

} // namespace iteqd::cli
