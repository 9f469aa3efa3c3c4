#pragma once

#include <stdexcept>
#include <string>

namespace oploss {

/// Invalid user-supplied parameters or malformed input files. Maps to CLI exit code 2.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Failure detected while a simulation or estimator is running. Maps to CLI exit code 3.
class SimulationError : public std::runtime_error {
public:
    explicit SimulationError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace oploss
