#pragma once

// Small text helpers shared by the cache, CSV and config code: exact float
// round-tripping, fixed-precision formatting and content hashing.

#include <cerrno>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <string_view>

#include "sqcmaser/errors.hpp"

namespace sqcmaser::text {

/// C99 hexadecimal float; parses back bit-exactly with std::strtod.
inline std::string hexfloat(double value)
{
    char buffer[64];
    std::snprintf(buffer, sizeof buffer, "%a", value);
    return buffer;
}

inline double parse_double(std::string_view token)
{
    const std::string s(token);
    errno = 0;
    char* end = nullptr;
    const double value = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE) {
        throw ValidationError("cannot parse number '" + s + "'");
    }
    return value;
}

/// %.<digits>g, independent of the global iostream state.
inline std::string fixed_digits(double value, int digits)
{
    char buffer[64];
    std::snprintf(buffer, sizeof buffer, "%.*g", digits, value);
    return buffer;
}

inline std::uint64_t fnv1a64(std::string_view data)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t value)
{
    char buffer[24];
    std::snprintf(buffer, sizeof buffer, "%016llx", static_cast<unsigned long long>(value));
    return buffer;
}

} // namespace sqcmaser::text
