#pragma once

// Closed-form steady-state photon statistics of the micromaser: the
// three-term recursion for regular (periodic) switching of the circuit and
// the two-term recursion for Poissonian injection of natural atoms.

#include "sqcmaser/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <string_view>
#include <vector>

namespace sqcmaser {

struct MaserConfig {
    double n_th = 0.1;  ///< thermal photon number
    double n_t = 1.0;   ///< N_t = r_a / kappa, switching cycles per photon lifetime
    double g_tau = 0.0; ///< Rabi phase g * tau
    int n_max = 256;    ///< Fock truncation

    /// Pump parameter tau_int = g tau sqrt(N_t).
    [[nodiscard]] double tau_int() const { return g_tau * std::sqrt(n_t); }

    static MaserConfig from_pump(double n_th, double n_t, double tau_int, int n_max = 256)
    {
        detail::require(n_t > 0.0, "maser: N_t must be > 0 to derive g_tau from tau_int");
        return {n_th, n_t, tau_int / std::sqrt(n_t), n_max};
    }

    /// allow_zero_pump admits N_t = 0 (pure cavity decay) for time evolution.
    void validate(bool allow_zero_pump = false) const
    {
        detail::require(std::isfinite(n_th) && n_th >= 0.0, "maser: n_th must be >= 0");
        detail::require(std::isfinite(n_t) && (allow_zero_pump ? n_t >= 0.0 : n_t > 0.0),
                        allow_zero_pump ? "maser: N_t must be >= 0" : "maser: N_t must be > 0");
        detail::require(std::isfinite(g_tau) && g_tau >= 0.0, "maser: g_tau must be >= 0");
        detail::require(n_max >= 4, "maser: n_max must be >= 4");
    }
};

enum class DistributionSource { recursion_sqc, recursion_atomic, master_equation };

inline std::string_view to_string(DistributionSource s)
{
    switch (s) {
    case DistributionSource::recursion_sqc: return "recursion-sqc";
    case DistributionSource::recursion_atomic: return "recursion-atomic";
    case DistributionSource::master_equation: return "master-equation";
    }
    return "?";
}

struct PhotonDistribution {
    std::vector<double> p; ///< p_0 .. p_{n_max}, sums to 1
    DistributionSource source = DistributionSource::recursion_sqc;
    double tail_mass = 0.0;         ///< |p_{n_max}|
    bool truncation_limited = false; ///< tail_mass >= 1e-10
    bool unstable = false;          ///< non-finite values or too many significant clamped entries
    int clamped = 0;                ///< round-off negatives in [-1e-12, 0) set to 0
    int clamped_significant = 0;    ///< the clamped ones above the 1e-15 noise floor
    int negative = 0;               ///< entries below -1e-12, kept as computed
    double min_value = 0.0;

    [[nodiscard]] int n_max() const { return static_cast<int>(p.size()) - 1; }
};

inline constexpr double truncation_tail_limit = 1e-10;
inline constexpr double roundoff_negative_limit = 1e-12;
/// Below this a unit-normalized entry is double-precision noise; oscillating tails live there.
inline constexpr double noise_floor = 1e-15;

/// S(n) = sin^2(g tau sqrt(n)).
inline double rabi_s(double n, double g_tau)
{
    detail::require(n >= 0.0, "rabi_s: n must be >= 0");
    const double s = std::sin(g_tau * std::sqrt(n));
    return s * s;
}

namespace detail {

/// Normalizes an unnormalized recursion output and fills the diagnostics.
///
/// The regular-pumping generator is not completely positive, so its steady
/// state can hold genuinely negative entries far above round-off. Those are
/// kept (they are what the equation predicts) and counted in `negative`;
/// only round-off sized negatives are clamped.
inline PhotonDistribution finish_distribution(std::vector<double> p, DistributionSource source)
{
    PhotonDistribution out;
    out.source = source;
    bool finite = std::all_of(p.begin(), p.end(), [](double v) { return std::isfinite(v); });
    const double total = std::accumulate(p.begin(), p.end(), 0.0);
    if (!finite || !(std::abs(total) > 0.0) || !std::isfinite(total)) {
        out.p = std::move(p);
        out.unstable = true;
        return out;
    }
    for (double& v : p) {
        v /= total;
    }
    for (double& v : p) {
        if (v < 0.0 && v >= -roundoff_negative_limit) {
            out.clamped_significant += v < -noise_floor ? 1 : 0;
            v = 0.0;
            ++out.clamped;
        } else if (v < -roundoff_negative_limit) {
            ++out.negative;
        }
    }
    if (out.clamped > 0) {
        const double renorm = std::accumulate(p.begin(), p.end(), 0.0);
        for (double& v : p) {
            v /= renorm;
        }
    }
    out.p = std::move(p);
    out.min_value = *std::min_element(out.p.begin(), out.p.end());
    out.tail_mass = std::abs(out.p.back());
    out.truncation_limited = !(out.tail_mass < truncation_tail_limit);
    out.unstable = out.clamped_significant > out.n_max() / 10;
    return out;
}

/// Keeps an unnormalized linear recursion inside double range.
inline void rescale_if_large(std::vector<double>& p, std::size_t upto)
{
    const double big = std::abs(p[upto]);
    if (big > 1e200) {
        for (std::size_t i = 0; i <= upto; ++i) {
            p[i] /= big;
        }
    }
}

inline PhotonDistribution sqc_fixed(const MaserConfig& cfg)
{
    const auto n_max = static_cast<std::size_t>(cfg.n_max);
    const double nth = cfg.n_th;
    std::vector<double> p(n_max + 1, 0.0);
    p[0] = 1.0;
    // p_{n+1} = {n_th/(n_th+1) + 2 N_t S(n+1) [1 + S(n+1)/2] / (2 (n_th+1)(n+1))} p_n
    //         - N_t S(n+1) S(n) / (2 (n_th+1)(n+1)) p_{n-1};  the n = 0 step has no p_{-1} term.
    double s_n = rabi_s(0.0, cfg.g_tau);
    for (std::size_t n = 0; n < n_max; ++n) {
        const double s_next = rabi_s(static_cast<double>(n + 1), cfg.g_tau);
        const double denom = 2.0 * (nth + 1.0) * static_cast<double>(n + 1);
        const double a = nth / (nth + 1.0) + 2.0 * cfg.n_t * s_next * (1.0 + 0.5 * s_next) / denom;
        const double b = cfg.n_t * s_next * s_n / denom;
        p[n + 1] = a * p[n] - (n > 0 ? b * p[n - 1] : 0.0);
        rescale_if_large(p, n + 1);
        s_n = s_next;
    }
    return finish_distribution(std::move(p), DistributionSource::recursion_sqc);
}

inline PhotonDistribution atomic_fixed(const MaserConfig& cfg)
{
    const auto n_max = static_cast<std::size_t>(cfg.n_max);
    const double nth = cfg.n_th;
    std::vector<double> p(n_max + 1, 0.0);
    p[0] = 1.0;
    // (n_th + 1) n p_n = [n_th n + N_t S(n)] p_{n-1}
    for (std::size_t n = 1; n <= n_max; ++n) {
        const double dn = static_cast<double>(n);
        p[n] = p[n - 1] * (nth * dn + cfg.n_t * rabi_s(dn, cfg.g_tau)) / ((nth + 1.0) * dn);
        rescale_if_large(p, n);
    }
    return finish_distribution(std::move(p), DistributionSource::recursion_atomic);
}

template <typename Solve>
PhotonDistribution with_truncation(const MaserConfig& cfg, bool adaptive, Solve&& solve)
{
    MaserConfig current = cfg;
    PhotonDistribution out = solve(current);
    while (adaptive && out.truncation_limited && current.n_max < 4096) {
        current.n_max = std::min(2 * current.n_max, 4096);
        out = solve(current);
    }
    return out;
}

} // namespace detail

enum class Truncation { fixed, adaptive };

/// Steady state of the regularly switched circuit micromaser.
/// With Truncation::adaptive, n_max doubles (up to 4096) while the tail is too heavy.
inline PhotonDistribution steady_state_sqc(const MaserConfig& cfg, Truncation truncation = Truncation::adaptive)
{
    cfg.validate();
    return detail::with_truncation(cfg, truncation == Truncation::adaptive, detail::sqc_fixed);
}

/// Steady state of the atomic micromaser with Poissonian injection; N_t is the average rate over kappa.
inline PhotonDistribution steady_state_atomic(const MaserConfig& cfg, Truncation truncation = Truncation::adaptive)
{
    cfg.validate();
    return detail::with_truncation(cfg, truncation == Truncation::adaptive, detail::atomic_fixed);
}

struct Moments {
    double mean = 0.0;
    double variance = 0.0;
    double fano = 0.0; ///< variance / mean; NaN for the vacuum
};

inline Moments distribution_moments(const PhotonDistribution& dist)
{
    detail::require(!dist.p.empty(), "distribution_moments: empty distribution");
    double mean = 0.0;
    for (std::size_t n = 0; n < dist.p.size(); ++n) {
        mean += static_cast<double>(n) * dist.p[n];
    }
    double variance = 0.0;
    for (std::size_t n = 0; n < dist.p.size(); ++n) {
        const double d = static_cast<double>(n) - mean;
        variance += d * d * dist.p[n];
    }
    Moments m;
    m.mean = mean;
    m.variance = variance;
    m.fano = mean > 0.0 ? m.variance / mean : std::numeric_limits<double>::quiet_NaN();
    return m;
}

} // namespace sqcmaser
