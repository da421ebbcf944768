#pragma once

#include <stdexcept>
#include <string>

namespace onemax {

// Invalid argument ranges (dimension, level, strength, rate, probabilities).
class DomainError : public std::invalid_argument {
public:
    explicit DomainError(const std::string& what) : std::invalid_argument(what) {}
};

// A policy has (numerically) zero improvement probability at some reachable
// level, so its expected remaining time is not finite.
class NoImprovementError : public std::runtime_error {
public:
    NoImprovementError(int level, const std::string& what)
        : std::runtime_error(what), level_(level) {}
    int level() const { return level_; }

private:
    int level_;
};

// An iterative routine failed to reach its tolerance.
class ConvergenceError : public std::runtime_error {
public:
    explicit ConvergenceError(const std::string& what) : std::runtime_error(what) {}
};

// A request exceeds a hard size limit (e.g. exact enumeration bounds).
class CapacityError : public std::runtime_error {
public:
    explicit CapacityError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace onemax
