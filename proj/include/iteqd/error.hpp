#pragma once

#include <stdexcept>
#include <string>

namespace iteqd {

/// Caller broke a documented precondition (wrong dimension, out-of-range genome).
class ContractViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

class EmptyArchiveError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Kernel matrix could not be factorized even with the largest jitter.
class IllConditionedKernel : public std::runtime_error {
public:
    IllConditionedKernel(const std::string& what, double condition_estimate)
        : std::runtime_error(what), condition_estimate_(condition_estimate) {}

    double condition_estimate() const noexcept { return condition_estimate_; }

private:
    double condition_estimate_;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or incompatible input file.
class SchemaError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline void require(bool condition, const std::string& message) {
    if (!condition)
        throw ContractViolation(message);
}

} // namespace iteqd
