#pragma once

// Conversions between the dimensionless model and laboratory quantities for
// the on-chip cavity and the circuit.

#include "sqcmaser/constants.hpp"
#include "sqcmaser/errors.hpp"

#include <cmath>

namespace sqcmaser {

struct CavityParams {
    double area = 2.25e-4;      ///< A, m^2 (1.5 cm x 1.5 cm)
    double thickness = 1e-6;    ///< h, m
    double quality = 1e6;       ///< Q
    double loop_area = circle_area(32e-6); ///< S_q, m^2 (32 um loop diameter)

    static double circle_area(double diameter) { return constants::pi * 0.25 * diameter * diameter; }

    void validate() const
    {
        detail::require(area > 0.0 && thickness > 0.0 && quality > 0.0 && loop_area > 0.0,
                        "cavity: area, thickness, quality and loop_area must be > 0");
    }
};

struct CavityMode {
    double nu_ghz = 0.0;
    double wavelength_m = 0.0;
};

/// nu = (E_1 - E_0) / h for a gap given in units of E_J.
inline CavityMode cavity_frequency(double gap_over_ej, double ej_freq_ghz)
{
    detail::require(gap_over_ej > 0.0, "cavity_frequency: gap must be > 0");
    detail::require(ej_freq_ghz > 0.0, "cavity_frequency: ej_freq must be > 0");
    const double nu = gap_over_ej * ej_freq_ghz;
    return {nu, constants::speed_of_light / (nu * 1e9)};
}

/// Phi_w^(0) / Phi_0 with Phi_w^(0) = sqrt(h nu / (eps_0 c^2 A h_cav)) S_q.
inline double vacuum_flux_ratio(double nu_ghz, const CavityParams& cavity)
{
    cavity.validate();
    detail::require(nu_ghz > 0.0, "vacuum_flux_ratio: nu must be > 0");
    using namespace constants;
    const double field = std::sqrt(planck * nu_ghz * 1e9 /
                                   (vacuum_permittivity * speed_of_light * speed_of_light * cavity.area *
                                    cavity.thickness));
    return field * cavity.loop_area / flux_quantum;
}

struct CouplingRate {
    double rad_per_s = 0.0;
    /// The same number expressed in MHz of angular frequency (rad/s / 1e6).
    [[nodiscard]] double mhz() const { return rad_per_s * 1e-6; }
};

/// g = |t_01| / hbar with t_01 = modulus * I_c Phi_w^(0) and I_c = 2 pi E_J / Phi_0,
/// i.e. g = modulus * (2 pi E_J / hbar) * (Phi_w^(0) / Phi_0), E_J = h * ej_freq.
inline CouplingRate coupling_rate(double t01_modulus, double phi_ratio, double ej_freq_ghz)
{
    detail::require(t01_modulus > 0.0 && phi_ratio > 0.0 && ej_freq_ghz > 0.0,
                    "coupling_rate: inputs must be > 0");
    const double ej_over_hbar = 2.0 * constants::pi * ej_freq_ghz * 1e9;
    return {t01_modulus * 2.0 * constants::pi * ej_over_hbar * phi_ratio};
}

/// Transit time tau such that g tau sqrt(N_t) = tau_int.
inline double interaction_time(double tau_int, double n_t, const CouplingRate& g)
{
    detail::require(tau_int >= 0.0 && n_t > 0.0 && g.rad_per_s > 0.0, "interaction_time: invalid inputs");
    return tau_int / (g.rad_per_s * std::sqrt(n_t));
}

/// tau_p = Q / (2 pi nu), seconds.
inline double photon_lifetime(double nu_ghz, double quality)
{
    detail::require(nu_ghz > 0.0 && quality > 0.0, "photon_lifetime: inputs must be > 0");
    return quality / (2.0 * constants::pi * nu_ghz * 1e9);
}

struct InductanceReport {
    double critical_current = 0.0; ///< I_c, A
    double josephson_inductance = 0.0; ///< L_J, H
    double loop_inductance = 0.0;      ///< beta_L * L_J, H
};

inline InductanceReport inductance_check(double ej_freq_ghz, double beta_l)
{
    detail::require(ej_freq_ghz > 0.0 && beta_l >= 0.0, "inductance_check: ej_freq > 0 and beta_L >= 0 required");
    using namespace constants;
    const double ej = planck * ej_freq_ghz * 1e9;
    InductanceReport r;
    r.critical_current = 2.0 * pi * ej / flux_quantum;
    r.josephson_inductance = flux_quantum / (2.0 * pi * r.critical_current);
    r.loop_inductance = beta_l * r.josephson_inductance;
    return r;
}

struct SigmaZEstimate {
    double over_ej = 0.0;    ///< (A - B) Phi_w^(0) / 2 ~ 0.5 I_c Phi_w^(0) = pi E_J Phi_w^(0) / Phi_0
    double over_gap = 0.0;   ///< relative to the working gap
};

/// Size of the dropped sigma_z (a + a^dag) coupling, taking A ~ -B ~ 0.5 I_c.
inline SigmaZEstimate sigma_z_term_estimate(double phi_ratio, double gap_over_ej = 0.05)
{
    detail::require(phi_ratio >= 0.0 && gap_over_ej > 0.0, "sigma_z_term_estimate: invalid inputs");
    const double value = constants::pi * phi_ratio;
    return {value, value / gap_over_ej};
}

struct DeviceInputs {
    double gap_over_ej = 0.05;
    double ej_freq = 400.0;
    double t01 = 0.13;
    double beta_l = 0.1;
    double n_t = 1.0;
    double tau_int = 1.4 * constants::pi;
    CavityParams cavity;
};

struct DeviceReport {
    double nu_ghz = 0.0;
    double wavelength_m = 0.0;
    double phi_w0_over_phi0 = 0.0;
    double g_rad_per_s = 0.0;
    double tau_interaction_ns = 0.0;
    double tau_photon_s = 0.0;
    double critical_current_a = 0.0;
    double josephson_inductance_h = 0.0;
    double loop_inductance_h = 0.0;
    double beta_l = 0.0;
    double sigma_z_term_over_ej = 0.0;
    double sigma_z_term_over_gap = 0.0;
};

/// Chains every conversion from the circuit and cavity inputs alone.
inline DeviceReport estimate_device(const DeviceInputs& in)
{
    const CavityMode mode = cavity_frequency(in.gap_over_ej, in.ej_freq);
    const double phi_ratio = vacuum_flux_ratio(mode.nu_ghz, in.cavity);
    const CouplingRate g = coupling_rate(in.t01, phi_ratio, in.ej_freq);
    const InductanceReport inductance = inductance_check(in.ej_freq, in.beta_l);
    const SigmaZEstimate sz = sigma_z_term_estimate(phi_ratio, in.gap_over_ej);

    DeviceReport r;
    r.nu_ghz = mode.nu_ghz;
    r.wavelength_m = mode.wavelength_m;
    r.phi_w0_over_phi0 = phi_ratio;
    r.g_rad_per_s = g.rad_per_s;
    r.tau_interaction_ns = interaction_time(in.tau_int, in.n_t, g) * 1e9;
    r.tau_photon_s = photon_lifetime(mode.nu_ghz, in.cavity.quality);
    r.critical_current_a = inductance.critical_current;
    r.josephson_inductance_h = inductance.josephson_inductance;
    r.loop_inductance_h = inductance.loop_inductance;
    r.beta_l = in.beta_l;
    r.sigma_z_term_over_ej = sz.over_ej;
    r.sigma_z_term_over_gap = sz.over_gap;
    return r;
}

} // namespace sqcmaser
