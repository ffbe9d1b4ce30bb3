#include "catch_amalgamated.hpp"

#include "sqcmaser/constants.hpp"
#include "sqcmaser/lindblad.hpp"
#include "sqcmaser/maser_stats.hpp"

#include "oracles.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <chrono>
#include <cmath>
#include <complex>
#include <random>

using namespace sqcmaser;
using Catch::Approx;
using cd = std::complex<double>;

namespace {

const double pi = constants::pi;

/// Random density matrix A A^dag / tr.
ComplexMatrix random_state(int n_max, std::mt19937_64& rng, int support = -1)
{
    const int d = n_max + 1;
    const int s = support < 0 ? d : support;
    std::normal_distribution<double> normal;
    ComplexMatrix a = ComplexMatrix::Zero(d, d);
    for (int i = 0; i < s; ++i)
        for (int j = 0; j < d; ++j) a(i, j) = cd(normal(rng), normal(rng));
    ComplexMatrix rho = a * a.adjoint();
    rho /= rho.trace().real();
    return 0.5 * (rho + rho.adjoint());
}

ComplexMatrix random_diagonal(int n_max, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    ComplexMatrix rho = ComplexMatrix::Zero(n_max + 1, n_max + 1);
    double total = 0.0;
    for (int n = 0; n < n_max; ++n) {
        rho(n, n) = u(rng);
        total += rho(n, n).real();
    }
    return rho / total;
}

/// Matrix of a superoperator on column-stacked vec(rho).
template <typename Map>
Eigen::MatrixXcd superoperator_matrix(int d, Map&& map)
{
    Eigen::MatrixXcd s(d * d, d * d);
    ComplexMatrix basis = ComplexMatrix::Zero(d, d);
    for (int m = 0; m < d; ++m) {
        for (int n = 0; n < d; ++n) {
            basis(n, m) = 1.0;
            const ComplexMatrix out = map(basis);
            s.col(m * d + n) = Eigen::Map<const Eigen::VectorXcd>(out.data(), d * d);
            basis(n, m) = 0.0;
        }
    }
    return s;
}

} // namespace

TEST_CASE("density matrix validation")
{
    CHECK_NOTHROW(DensityMatrix::fock(8, 3));
    CHECK_THROWS_AS(DensityMatrix::fock(8, 9), ValidationError);
    CHECK_THROWS_AS(DensityMatrix::fock(3, 0), ValidationError);
    ComplexMatrix rho = DensityMatrix::fock(6, 0).matrix();
    rho(0, 1) = cd(0.0, 0.1);
    CHECK_THROWS_AS(DensityMatrix{rho}, ValidationError);
    rho = DensityMatrix::fock(6, 0).matrix() * 1.01;
    CHECK_THROWS_AS(DensityMatrix{rho}, ValidationError);
    CHECK_THROWS_AS(DensityMatrix::from_populations({1.1, -0.1, 0, 0, 0, 0}), ValidationError);
    CHECK_NOTHROW(DensityMatrix::from_populations({0.5, 0.5, 0, 0, 0, 0}));
}

TEST_CASE("gain map matches the joint-space propagator")
{
    std::mt19937_64 rng(5);
    for (double g_tau : {0.7, 1.4 * pi, 0.123}) {
        const ComplexMatrix rho = random_state(32, rng);
        const ComplexMatrix closed = gain_map(rho, g_tau);
        const ComplexMatrix brute = oracle::joint_space_transit(rho, g_tau);
        INFO("g_tau " << g_tau);
        CHECK((closed - brute).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("gain map limits")
{
    std::mt19937_64 rng(6);
    const ComplexMatrix rho = random_state(10, rng);
    CHECK((gain_map(rho, 0.0) - rho).cwiseAbs().maxCoeff() == 0.0);

    const ComplexMatrix vacuum = DensityMatrix::fock(10, 0).matrix();
    CHECK((gain_map(vacuum, pi) - vacuum).cwiseAbs().maxCoeff() < 1e-15);

    // trace defect is exactly the population pushed past n_max
    const double defect = 1.0 - gain_map(rho, 0.9).trace().real();
    CHECK(defect == Approx(gain_leakage(rho, 0.9)).margin(1e-14));
    CHECK(gain_leakage(vacuum, 0.9) == 0.0);
}

TEST_CASE("dissipator")
{
    std::mt19937_64 rng(8);
    const ComplexMatrix vacuum = DensityMatrix::fock(12, 0).matrix();
    CHECK(dissipator(vacuum, 1.0, 0.0).cwiseAbs().maxCoeff() == 0.0);

    for (int t = 0; t < 10; ++t) {
        const ComplexMatrix rho = random_state(12, rng);
        const ComplexMatrix l = dissipator(rho, 1.3, 0.4);
        CHECK(std::abs(l.trace()) < 1e-12);
        CHECK((l - l.adjoint()).cwiseAbs().maxCoeff() < 1e-14);
    }

    // d<n>/dt = -kappa (<n> - n_th) for diagonal states
    for (int t = 0; t < 20; ++t) {
        const ComplexMatrix rho = random_diagonal(16, rng);
        const double kappa = 0.7;
        const double n_th = 0.35;
        const double rate = mean_photon_number(dissipator(rho, kappa, n_th));
        CHECK(rate == Approx(-kappa * (mean_photon_number(rho) - n_th)).margin(1e-12));
    }
}

TEST_CASE("generator pieces")
{
    std::mt19937_64 rng(9);
    const auto cfg = MaserConfig::from_pump(0.1, 3.0, 1.4 * pi, 8);
    const MaserGenerator g{cfg, 1.0};
    const int d = cfg.n_max + 1;

    // (M - 1)^2 by two applications equals the squared matrix
    const Eigen::MatrixXcd s = superoperator_matrix(d, [&](const ComplexMatrix& r) { return g.gain_minus_identity(r); });
    const Eigen::MatrixXcd l = superoperator_matrix(d, [&](const ComplexMatrix& r) { return dissipator(r, 1.0, cfg.n_th); });
    const Eigen::MatrixXcd full = g.pump_rate() * s - 0.5 * g.pump_rate() * (s * s) + l;
    for (int t = 0; t < 5; ++t) {
        const ComplexMatrix rho = random_state(8, rng);
        const ComplexMatrix twice = g.gain_minus_identity(g.gain_minus_identity(rho));
        const Eigen::VectorXcd vec_rho = Eigen::Map<const Eigen::VectorXcd>(rho.data(), d * d);
        const Eigen::VectorXcd explicit_twice = s * s * vec_rho;
        CHECK((Eigen::Map<const Eigen::VectorXcd>(twice.data(), d * d) - explicit_twice).cwiseAbs().maxCoeff() < 1e-12);
        const ComplexMatrix action = g(rho);
        CHECK((Eigen::Map<const Eigen::VectorXcd>(action.data(), d * d) - full * vec_rho).cwiseAbs().maxCoeff() < 1e-12);
    }

    // trace annihilation for inputs that do not reach the truncation edge within two gain steps
    for (int t = 0; t < 10; ++t) {
        const ComplexMatrix rho = random_state(8, rng, 7);
        CHECK(std::abs(g(rho).trace()) < 1e-10);
    }

    // diagonal closure
    for (int t = 0; t < 10; ++t) {
        const ComplexMatrix out = g(random_diagonal(8, rng));
        ComplexMatrix off = out;
        off.diagonal().setZero();
        CHECK(off.cwiseAbs().maxCoeff() < 1e-14);
    }
}

TEST_CASE("diagonal generator columns conserve probability")
{
    const auto cfg = MaserConfig::from_pump(0.1, 10.0, 0.5 * pi, 40);
    const Eigen::MatrixXd g = diagonal_generator(cfg);
    // columns near the top lose the gain leakage; the rest sum to zero
    for (int n = 0; n < cfg.n_max - 1; ++n) CHECK(std::abs(g.col(n).sum()) < 1e-12);
}

TEST_CASE("nullspace steady state matches the recursion")
{
    const auto t0 = std::chrono::steady_clock::now();
    for (double n_t : {1.0, 10.0, 100.0}) {
        for (double tau : {0.5, 1.4, 10.0}) {
            const auto cfg = MaserConfig::from_pump(0.1, n_t, tau * pi, 200);
            const auto oracle = steady_state_nullspace(cfg);
            const auto recursion = steady_state_sqc(cfg, Truncation::fixed);
            CHECK(oracle.source == DistributionSource::master_equation);
            double worst = 0.0;
            for (std::size_t n = 0; n < oracle.p.size(); ++n) worst = std::max(worst, std::abs(oracle.p[n] - recursion.p[n]));
            INFO("N_t " << n_t << " tau_int " << tau << " pi: max diff " << worst);
            CHECK(worst < 1e-8);
        }
    }
    CHECK(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() < 10.0);
}

TEST_CASE("nullspace moments agree with the recursion")
{
    const auto cfg = MaserConfig::from_pump(0.1, 1.0, 1.4 * pi, 120);
    const auto a = distribution_moments(steady_state_nullspace(cfg));
    const auto b = distribution_moments(steady_state_sqc(cfg, Truncation::fixed));
    CHECK(a.mean == Approx(b.mean).margin(1e-6));
    CHECK(a.fano == Approx(b.fano).margin(1e-6));
}

TEST_CASE("nullspace without gain is thermal")
{
    const auto d = steady_state_nullspace(MaserConfig{0.1, 1.0, 0.0, 60});
    CHECK(d.p[0] == Approx(10.0 / 11.0).epsilon(1e-10));
}

TEST_CASE("pure decay follows exp(-kappa t)")
{
    const MaserConfig cfg{0.0, 0.0, 0.0, 8};
    EvolveOptions opt;
    opt.t_final = 3.0;
    opt.dt = 1e-3;
    opt.report_every = 500;
    const auto traj = evolve(DensityMatrix::fock(8, 1), cfg, opt);
    CHECK(traj.final_state(1, 1).real() == Approx(std::exp(-3.0)).margin(1e-6));
    for (const auto& point : traj.points) {
        CHECK(point.populations[1] == Approx(std::exp(-point.t)).margin(1e-6));
    }
    opt.kappa = 2.0;
    opt.dt = 5e-4;
    const auto faster = evolve(DensityMatrix::fock(8, 1), cfg, opt);
    CHECK(faster.final_state(1, 1).real() == Approx(std::exp(-6.0)).margin(1e-6));
}

TEST_CASE("long-time evolution reaches the recursion steady state")
{
    const auto cfg = MaserConfig::from_pump(0.1, 1.0, 1.4 * pi, 40);
    EvolveOptions opt;
    opt.t_final = 20.0;
    opt.dt = 0.002;
    const auto traj = evolve(DensityMatrix::fock(40, 0), cfg, opt);
    const auto steady = steady_state_sqc(cfg, Truncation::fixed);
    double worst = 0.0;
    for (int n = 0; n <= 40; ++n) worst = std::max(worst, std::abs(traj.final_state(n, n).real() - steady.p[static_cast<std::size_t>(n)]));
    CHECK(worst < 1e-6);
    CHECK(traj.max_trace_error < 1e-9);
    CHECK(traj.max_hermiticity_error < 1e-10);
    CHECK(traj.points.back().t == Approx(20.0).epsilon(1e-14));
    CHECK(traj.points.size() == 101);
}

TEST_CASE("coherences decay")
{
    const auto cfg = MaserConfig::from_pump(0.1, 1.0, 1.4 * pi, 24);
    ComplexMatrix rho = ComplexMatrix::Zero(25, 25);
    rho(0, 0) = rho(1, 1) = rho(0, 1) = rho(1, 0) = 0.5;
    EvolveOptions opt;
    opt.t_final = 20.0;
    opt.dt = 0.002;
    const auto traj = evolve(DensityMatrix(rho), cfg, opt);
    CHECK(std::abs(traj.final_state(0, 1)) < 1e-8);

    // the first off-diagonal sector is closed under the generator and strictly damped
    const MaserGenerator g{cfg, 1.0};
    const int d = cfg.n_max;
    Eigen::MatrixXcd block(d, d);
    ComplexMatrix basis = ComplexMatrix::Zero(25, 25);
    for (int n = 0; n < d; ++n) {
        basis(n, n + 1) = 1.0;
        const ComplexMatrix out = g(basis);
        for (int m = 0; m < d; ++m) block(m, n) = out(m, m + 1);
        ComplexMatrix rest = out;
        for (int m = 0; m < d; ++m) rest(m, m + 1) = 0.0;
        CHECK(rest.cwiseAbs().maxCoeff() < 1e-14);
        basis(n, n + 1) = 0.0;
    }
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(block);
    CHECK(es.eigenvalues().real().maxCoeff() < -0.5);
}

TEST_CASE("evolve rejects unstable steps and bad inputs")
{
    const auto cfg = MaserConfig::from_pump(0.1, 1.0, 1.4 * pi, 40);
    EvolveOptions opt;
    opt.dt = 0.01;
    try {
        (void)evolve(DensityMatrix::fock(40, 0), cfg, opt);
        FAIL("expected rejection");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("use dt <=") != std::string::npos);
    }
    CHECK(max_stable_dt(cfg, 1.0) == Approx(0.1 / (1.0 + 1.1 * 40)).epsilon(1e-14));
    opt.dt = 0.001;
    CHECK_THROWS_AS(evolve(DensityMatrix::fock(20, 0), cfg, opt), ValidationError);
    opt.t_final = -1;
    CHECK_THROWS_AS(evolve(DensityMatrix::fock(40, 0), cfg, opt), ValidationError);
}
