#pragma once

#include <stdexcept>
#include <string>

namespace sqcmaser {

/// Bad input: parameters, grids or configuration that violate a documented
/// invariant. Raised before any computation starts.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A computation ran but did not produce a trustworthy answer
/// (eigensolver stall, invariant breach during time stepping, ...).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool condition, const std::string& message)
{
    if (!condition) {
        throw ValidationError(message);
    }
}

} // namespace detail
} // namespace sqcmaser
