#include "catch_amalgamated.hpp"

#include "sqcmaser/constants.hpp"
#include "sqcmaser/device.hpp"

#include <cmath>

using namespace sqcmaser;
using Catch::Approx;

namespace {

const double pi = constants::pi;

CavityParams lab_cavity()
{
    CavityParams c;
    c.area = 0.015 * 0.015;
    c.thickness = 1e-6;
    c.quality = 1e6;
    c.loop_area = CavityParams::circle_area(32e-6);
    return c;
}

} // namespace

TEST_CASE("constants table")
{
    CHECK(constants::planck == 6.62607015e-34);
    CHECK(constants::elementary_charge == 1.602176634e-19);
    CHECK(constants::speed_of_light == 299792458.0);
    CHECK(constants::flux_quantum == Approx(2.067833848e-15).epsilon(1e-9));
}

TEST_CASE("cavity frequency")
{
    const auto m = cavity_frequency(0.05, 400);
    CHECK(m.nu_ghz == Approx(20.0).epsilon(1e-14));
    CHECK(m.wavelength_m == Approx(0.015).epsilon(0.01));
    CHECK(cavity_frequency(0.1, 400).nu_ghz == Approx(40.0).epsilon(1e-14));
    CHECK_THROWS_AS(cavity_frequency(0.05, 0), ValidationError);
    CHECK_THROWS_AS(cavity_frequency(0.0, 400), ValidationError);
}

TEST_CASE("vacuum flux ratio")
{
    const auto cav = lab_cavity();
    const double r = vacuum_flux_ratio(20, cav);
    CHECK(r == Approx(1.1e-4).epsilon(0.1));
    // hand arithmetic: sqrt(h nu / (eps0 c^2 A h)) S_q / Phi_0 = 1.0578e-4
    CHECK(r == Approx(1.0578e-4).epsilon(1e-3));

    auto doubled = cav;
    doubled.loop_area *= 2;
    CHECK(vacuum_flux_ratio(20, doubled) == Approx(2 * r).epsilon(1e-14));
    auto wide = cav;
    wide.area *= 4;
    CHECK(vacuum_flux_ratio(20, wide) == Approx(r / 2).epsilon(1e-14));

    auto bad = cav;
    bad.thickness = 0;
    CHECK_THROWS_AS(vacuum_flux_ratio(20, bad), ValidationError);
}

TEST_CASE("coupling rate and interaction time")
{
    const auto g = coupling_rate(0.13, 1.1e-4, 400);
    CHECK(g.rad_per_s == Approx(2.2e8).epsilon(0.05));
    CHECK(g.mhz() == Approx(218).epsilon(0.05));
    CHECK(coupling_rate(0.13, 2.2e-4, 400).rad_per_s == Approx(2 * g.rad_per_s).epsilon(1e-14));
    CHECK(interaction_time(1.4 * pi, 1, g) * 1e9 == Approx(20).epsilon(0.1));
    CHECK_THROWS_AS(coupling_rate(0, 1e-4, 400), ValidationError);
}

TEST_CASE("photon lifetime")
{
    CHECK(photon_lifetime(20, 1e6) == Approx(7.96e-6).epsilon(1e-3));
    CHECK(photon_lifetime(20, 2e6) == Approx(2 * photon_lifetime(20, 1e6)).epsilon(1e-14));
    CHECK(photon_lifetime(40, 1e6) == Approx(0.5 * photon_lifetime(20, 1e6)).epsilon(1e-14));
}

TEST_CASE("inductances")
{
    const auto r = inductance_check(400, 0.1);
    // 2 pi (400 GHz h) / Phi_0 = 8.0534e-7 A
    CHECK(r.critical_current == Approx(8.0534e-7).epsilon(1e-4));
    CHECK(r.josephson_inductance == Approx(4.0865e-10).epsilon(1e-4));
    CHECK(r.loop_inductance == Approx(40e-12).epsilon(0.1));
    CHECK(inductance_check(400, 0).loop_inductance == 0.0);
}

TEST_CASE("sigma_z estimate")
{
    const auto s = sigma_z_term_estimate(1.1e-4);
    CHECK(s.over_ej == Approx(3.5e-4).epsilon(0.02));
    CHECK(s.over_gap == Approx(0.0069).epsilon(0.02));
    CHECK(sigma_z_term_estimate(0).over_ej == 0.0);
    CHECK(sigma_z_term_estimate(2.2e-4).over_ej == Approx(2 * s.over_ej).epsilon(1e-14));
}

TEST_CASE("device report from lab inputs")
{
    DeviceInputs in;
    in.cavity = lab_cavity();
    const auto r = estimate_device(in);
    CHECK(r.nu_ghz == Approx(20).epsilon(1e-12));
    CHECK(r.wavelength_m == Approx(0.015).epsilon(0.01));
    CHECK(r.phi_w0_over_phi0 == Approx(1.1e-4).epsilon(0.1));
    CHECK(r.g_rad_per_s == Approx(218e6).epsilon(0.05));
    CHECK(r.tau_interaction_ns == Approx(20).epsilon(0.1));
    CHECK(r.tau_photon_s == Approx(8e-6).epsilon(0.05));
    CHECK(r.loop_inductance_h == Approx(40e-12).epsilon(0.1));
    CHECK(r.critical_current_a == Approx(0.8e-6).epsilon(0.02));
    CHECK(r.sigma_z_term_over_gap < 0.01);
}
