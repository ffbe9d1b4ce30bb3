#pragma once

#include <numbers>

namespace sqcmaser::constants {

// SI 2019 exact values.
inline constexpr double planck = 6.62607015e-34;            // J s
inline constexpr double elementary_charge = 1.602176634e-19; // C
inline constexpr double speed_of_light = 299792458.0;       // m / s

// CODATA 2018 recommended value.
inline constexpr double vacuum_permittivity = 8.8541878128e-12; // F / m

inline constexpr double hbar = planck / (2.0 * std::numbers::pi);
inline constexpr double flux_quantum = planck / (2.0 * elementary_charge); // Wb

inline constexpr double pi = std::numbers::pi;

} // namespace sqcmaser::constants
