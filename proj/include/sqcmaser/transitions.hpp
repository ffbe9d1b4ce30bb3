#pragma once

// Microwave transition matrix elements, adiabaticity measures K_ij and the
// control-protocol checks built on them.

#include "sqcmaser/circuit.hpp"
#include "sqcmaser/errors.hpp"
#include "sqcmaser/spectral.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace sqcmaser {

/// |<E_i| cos(phi_p) sin(pi f + phi_q / 2) |E_j>|, in units of I_c Phi_w^(0).
inline double transition_element(const EigenSpectrum& spectrum, int i, int j)
{
    detail::require(i != j, "transition_element: i and j must differ");
    const double f = spectrum.params.f;
    const auto current = spectrum.sample([f](double p, double q) { return circulating_current(p, q, f); });
    return std::abs(spectrum.matrix_element(i, j, current));
}

/// <E_i| d(H/E_J)/d f_s |E_j> at fixed f (signed; sign follows the state phase convention).
inline double flux_coupling_element(const EigenSpectrum& spectrum, int i, int j)
{
    const CircuitParams params = spectrum.params;
    const auto derivative =
        spectrum.sample([&params](double, double q) { return potential_derivative_fs(q, params); });
    return spectrum.matrix_element(i, j, derivative);
}

/// Hellmann-Feynman slope dE_i/df in units of E_J.
inline double level_slope(const EigenSpectrum& spectrum, int i)
{
    const CircuitParams params = spectrum.params;
    const auto derivative =
        spectrum.sample([&params](double p, double q) { return potential_derivative_f(p, q, params); });
    return spectrum.matrix_element(i, i, derivative);
}

/// How E_J is turned into a time scale for K_ij.
///
/// `cyclic`: E_J = h * ej_freq, so hbar / E_J = 1 / (2 pi ej_freq).
/// `angular`: E_J = hbar * ej_freq, so hbar / E_J = 1 / ej_freq. This is the
/// reading under which the quoted K values and the quoted K * df_s/dt
/// products come out consistently (it differs from `cyclic` by 2 pi).
enum class KTimeConvention { angular, cyclic };

inline std::string_view to_string(KTimeConvention c)
{
    return c == KTimeConvention::angular ? "angular" : "cyclic";
}

inline KTimeConvention parse_k_convention(std::string_view name)
{
    if (name == "angular") return KTimeConvention::angular;
    if (name == "cyclic") return KTimeConvention::cyclic;
    throw ValidationError("unknown K time convention '" + std::string(name) + "' (expected angular|cyclic)");
}

/// hbar / E_J in nanoseconds for ej_freq given in GHz.
inline double hbar_over_ej_ns(double ej_freq_ghz, KTimeConvention convention)
{
    detail::require(ej_freq_ghz > 0.0, "ej_freq must be > 0");
    const double scale = convention == KTimeConvention::angular ? 1.0 : 2.0 * constants::pi;
    return 1.0 / (scale * ej_freq_ghz);
}

/// Level pairs closer than this (units of E_J) are treated as a crossing where K diverges.
inline constexpr double degeneracy_floor = 1e-6;

class DegeneratePairError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// K_ij = (hbar / E_J) |<E_i| dH/df_s |E_j>| / ((E_i - E_j) / E_J)^2 in ns.
/// Identically zero where sin(pi f_s) = 0, since dH/df_s vanishes there.
inline double adiabatic_k(const EigenSpectrum& spectrum, int i, int j,
                          KTimeConvention convention = KTimeConvention::angular)
{
    detail::require(i != j, "adiabatic_k: i and j must differ");
    detail::require(i >= 0 && j >= 0 && i < spectrum.size() && j < spectrum.size(),
                    "adiabatic_k: level index out of range");
    if (std::sin(constants::pi * spectrum.params.f_s) == 0.0) {
        return 0.0;
    }
    const double gap = spectrum.levels[i] - spectrum.levels[j];
    if (std::abs(gap) < degeneracy_floor) {
        throw DegeneratePairError("adiabatic_k: levels " + std::to_string(i) + " and " + std::to_string(j) +
                                  " are degenerate (gap " + text::fixed_digits(gap, 3) + " E_J)");
    }
    const double coupling = std::abs(flux_coupling_element(spectrum, i, j));
    return hbar_over_ej_ns(spectrum.params.ej_freq, convention) * coupling / (gap * gap);
}

struct AdiabaticCheck {
    double product = 0.0; ///< K |df_s/dt|
    bool adiabatic = true;
};

inline AdiabaticCheck adiabatic_rate_check(double k_ns, double df_s_dt_per_ns, double threshold = 0.1)
{
    detail::require(k_ns >= 0.0 && df_s_dt_per_ns >= 0.0, "adiabatic_rate_check: inputs must be >= 0");
    const double product = k_ns * std::abs(df_s_dt_per_ns);
    return {product, product < threshold};
}

struct PumpingReport {
    double ratio = 0.0; ///< min(|t12|, |t02|) / |t01|; infinite when |t01| = 0
    bool feasible = false;
};

/// Pumping 0 -> 2 -> 1 builds an inversion only if the direct 1 -> 0 channel is much weaker.
inline PumpingReport pumping_feasibility(double t01, double t02, double t12, double threshold = 5.0)
{
    detail::require(t01 >= 0.0 && t02 >= 0.0 && t12 >= 0.0, "pumping_feasibility: moduli must be >= 0");
    const double strongest_pump = std::min(t12, t02);
    const double ratio = t01 == 0.0 ? std::numeric_limits<double>::infinity() : strongest_pump / t01;
    return {ratio, ratio >= threshold};
}

/// T1(a) / T1(b) = (t01_b / t01_a)^2 for relaxation rates scaling as |t01|^2.
inline double relative_relaxation(double t01_a, double t01_b)
{
    detail::require(t01_a > 0.0 && t01_b > 0.0,
                    "relative_relaxation: both |t01| must be > 0 (forbidden transitions: use pumping_feasibility)");
    const double r = t01_b / t01_a;
    return r * r;
}

struct TransitionRow {
    double f = 0.0;
    double f_s = 0.0;
    std::vector<double> levels;
    double gap_10 = 0.0;
    double gap_20 = 0.0;
    double gap_21 = 0.0;
    double t01 = 0.0;
    double t02 = 0.0;
    double t12 = 0.0;
    std::optional<double> k01; ///< empty at a crossing
    std::optional<double> k12;
};

inline TransitionRow transition_row(const EigenSpectrum& spectrum, KTimeConvention convention)
{
    detail::require(spectrum.size() >= 3, "transition_row: need at least three levels");
    TransitionRow row;
    row.f = spectrum.params.f;
    row.f_s = spectrum.params.f_s;
    row.levels = spectrum.levels;
    row.gap_10 = spectrum.levels[1] - spectrum.levels[0];
    row.gap_20 = spectrum.levels[2] - spectrum.levels[0];
    row.gap_21 = spectrum.levels[2] - spectrum.levels[1];
    row.t01 = transition_element(spectrum, 0, 1);
    row.t02 = transition_element(spectrum, 0, 2);
    row.t12 = transition_element(spectrum, 1, 2);
    try {
        row.k01 = adiabatic_k(spectrum, 0, 1, convention);
    } catch (const DegeneratePairError&) {
    }
    try {
        row.k12 = adiabatic_k(spectrum, 1, 2, convention);
    } catch (const DegeneratePairError&) {
    }
    return row;
}

struct TransitionTable {
    std::vector<TransitionRow> rows;
};

inline TransitionTable transition_table(const SweepResult& sweep, KTimeConvention convention)
{
    TransitionTable table;
    table.rows.reserve(sweep.spectra.size());
    for (const auto& spectrum : sweep.spectra) {
        table.rows.push_back(transition_row(spectrum, convention));
    }
    return table;
}

} // namespace sqcmaser
