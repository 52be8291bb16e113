#pragma once

#include <stdexcept>
#include <string>

namespace targeval {

/// Invalid input or violated precondition (malformed file, odd population
/// size where a half-partition is required, out-of-range resource level...).
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// A hard size guard tripped, e.g. exhaustive enumeration requested for a
/// population too large to enumerate.
class GuardError : public std::runtime_error {
public:
    explicit GuardError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace targeval
