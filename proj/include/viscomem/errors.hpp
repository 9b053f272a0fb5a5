#pragma once

#include <stdexcept>
#include <string>

namespace viscomem {

/// Invalid argument to an operation (precondition violated by the caller).
class ArgumentError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A kernel or profile evaluated outside the region where it is defined.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Quadrature or root search failed to reach its tolerance.
class NumericError : public std::runtime_error {
public:
    NumericError(const std::string& what, double achieved)
        : std::runtime_error(what + " (achieved error " + std::to_string(achieved) + ")"),
          achieved_(achieved) {}
    double achieved() const noexcept { return achieved_; }

private:
    double achieved_;
};

/// History queried outside the recorded trajectory.
class StateError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad or inconsistent configuration.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Time stepping produced a non-finite or overflowing state.
class DivergenceError : public std::runtime_error {
public:
    explicit DivergenceError(double t)
        : std::runtime_error("solution diverged at t = " + std::to_string(t)), time_(t) {}
    double time() const noexcept { return time_; }

private:
    double time_;
};

}  // namespace viscomem
