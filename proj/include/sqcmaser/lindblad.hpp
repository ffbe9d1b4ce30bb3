#pragma once

// Cavity master equation for the regularly pumped micromaser in a truncated
// Fock space: gain map of one excited-emitter transit, thermal dissipator,
// the full generator, RK4 time stepping and the diagonal-sector nullspace.
//
// Time is measured in photon lifetimes unless a kappa is passed explicitly.

#include "sqcmaser/errors.hpp"
#include "sqcmaser/maser_stats.hpp"
#include "sqcmaser/text.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

namespace sqcmaser {

using ComplexMatrix = Eigen::MatrixXcd;

struct StateDiagnostics {
    double trace_error = 0.0;       ///< |tr rho - 1|
    double hermiticity_error = 0.0; ///< max |rho - rho^dagger|
    double min_population = 0.0;
    bool finite = true;
};

inline StateDiagnostics diagnose(const ComplexMatrix& rho)
{
    StateDiagnostics d;
    d.finite = rho.allFinite();
    d.trace_error = std::abs(rho.trace() - std::complex<double>(1.0, 0.0));
    d.hermiticity_error = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
    d.min_population = rho.diagonal().real().minCoeff();
    return d;
}

/// Cavity density matrix on Fock states 0..n_max.
class DensityMatrix {
public:
    /// Checks Hermiticity and unit trace to 1e-12 and populations >= -1e-10.
    explicit DensityMatrix(ComplexMatrix rho) : rho_(std::move(rho))
    {
        detail::require(rho_.rows() == rho_.cols() && rho_.rows() >= 5, "density matrix: must be square with n_max >= 4");
        const auto d = diagnose(rho_);
        detail::require(d.finite, "density matrix: non-finite entries");
        detail::require(d.hermiticity_error <= 1e-12, "density matrix: not Hermitian");
        detail::require(d.trace_error <= 1e-12, "density matrix: trace differs from 1");
        detail::require(d.min_population >= -1e-10, "density matrix: negative population");
    }

    static DensityMatrix fock(int n_max, int n)
    {
        detail::require(n >= 0 && n <= n_max, "density matrix: Fock index out of range");
        ComplexMatrix rho = ComplexMatrix::Zero(n_max + 1, n_max + 1);
        rho(n, n) = 1.0;
        return DensityMatrix(std::move(rho));
    }

    static DensityMatrix from_populations(const std::vector<double>& p)
    {
        ComplexMatrix rho = ComplexMatrix::Zero(static_cast<Eigen::Index>(p.size()), static_cast<Eigen::Index>(p.size()));
        for (std::size_t n = 0; n < p.size(); ++n) {
            rho(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)) = p[n];
        }
        return DensityMatrix(std::move(rho));
    }

    [[nodiscard]] const ComplexMatrix& matrix() const { return rho_; }
    [[nodiscard]] int n_max() const { return static_cast<int>(rho_.rows()) - 1; }

private:
    ComplexMatrix rho_;
};

inline std::vector<double> populations(const ComplexMatrix& rho)
{
    std::vector<double> p(static_cast<std::size_t>(rho.rows()));
    for (Eigen::Index n = 0; n < rho.rows(); ++n) {
        p[static_cast<std::size_t>(n)] = rho(n, n).real();
    }
    return p;
}

inline double mean_photon_number(const ComplexMatrix& rho)
{
    double mean = 0.0;
    for (Eigen::Index n = 0; n < rho.rows(); ++n) {
        mean += static_cast<double>(n) * rho(n, n).real();
    }
    return mean;
}

/// One transit of an excited emitter under resonant Jaynes-Cummings coupling,
/// traced over the emitter:
///   (M rho)_{nm} = cos(g tau sqrt(n+1)) cos(g tau sqrt(m+1)) rho_{nm}
///                + sin(g tau sqrt(n)) sin(g tau sqrt(m)) rho_{n-1,m-1}.
/// Population pushed above n_max is dropped; see gain_leakage.
inline ComplexMatrix gain_map(const ComplexMatrix& rho, double g_tau)
{
    const Eigen::Index d = rho.rows();
    Eigen::VectorXd stay(d);
    Eigen::VectorXd emit(d);
    for (Eigen::Index n = 0; n < d; ++n) {
        stay[n] = std::cos(g_tau * std::sqrt(static_cast<double>(n + 1)));
        emit[n] = std::sin(g_tau * std::sqrt(static_cast<double>(n)));
    }
    ComplexMatrix out(d, d);
    for (Eigen::Index m = 0; m < d; ++m) {
        for (Eigen::Index n = 0; n < d; ++n) {
            std::complex<double> v = stay[n] * stay[m] * rho(n, m);
            if (n > 0 && m > 0) {
                v += emit[n] * emit[m] * rho(n - 1, m - 1);
            }
            out(n, m) = v;
        }
    }
    return out;
}

/// Population that one gain step moves from n_max to the untracked level n_max + 1.
inline double gain_leakage(const ComplexMatrix& rho, double g_tau)
{
    const Eigen::Index top = rho.rows() - 1;
    const double s = std::sin(g_tau * std::sqrt(static_cast<double>(top + 1)));
    return s * s * rho(top, top).real();
}

/// Thermal-bath dissipator L rho:
///   -kappa (n_th + 1) / 2 (a^dag a rho + rho a^dag a - 2 a rho a^dag)
///   -kappa n_th / 2       (a a^dag rho + rho a a^dag - 2 a^dag rho a)
/// with a truncated to Fock states 0..n_max, which keeps tr(L rho) = 0 exactly.
inline ComplexMatrix dissipator(const ComplexMatrix& rho, double kappa, double n_th)
{
    const Eigen::Index d = rho.rows();
    const double down = kappa * (n_th + 1.0);
    const double up = kappa * n_th;
    auto aadag = [d](Eigen::Index n) { return n + 1 < d ? static_cast<double>(n + 1) : 0.0; };

    ComplexMatrix out(d, d);
    for (Eigen::Index m = 0; m < d; ++m) {
        for (Eigen::Index n = 0; n < d; ++n) {
            const double dn = static_cast<double>(n);
            const double dm = static_cast<double>(m);
            std::complex<double> v = -0.5 * down * (dn + dm) * rho(n, m);
            if (n + 1 < d && m + 1 < d) {
                v += down * std::sqrt((dn + 1.0) * (dm + 1.0)) * rho(n + 1, m + 1);
            }
            v -= 0.5 * up * (aadag(n) + aadag(m)) * rho(n, m);
            if (n > 0 && m > 0) {
                v += up * std::sqrt(dn * dm) * rho(n - 1, m - 1);
            }
            out(n, m) = v;
        }
    }
    return out;
}

/// d rho / dt = r_a (M - 1) rho - (r_a / 2) (M - 1)^2 rho + L rho, with r_a = N_t kappa.
/// (M - 1)^2 is applied as two successive applications of (M - 1).
struct MaserGenerator {
    MaserConfig cfg;
    double kappa = 1.0;

    [[nodiscard]] double pump_rate() const { return cfg.n_t * kappa; }

    [[nodiscard]] ComplexMatrix gain_minus_identity(const ComplexMatrix& rho) const
    {
        return gain_map(rho, cfg.g_tau) - rho;
    }

    [[nodiscard]] ComplexMatrix operator()(const ComplexMatrix& rho) const
    {
        const ComplexMatrix once = gain_minus_identity(rho);
        const ComplexMatrix twice = gain_minus_identity(once);
        const double r_a = pump_rate();
        return r_a * once - 0.5 * r_a * twice + dissipator(rho, kappa, cfg.n_th);
    }
};

/// Explicit generator on the diagonal sector: column n holds the populations of G(|n><n|).
/// The generator maps diagonal matrices to diagonal matrices, so this block is closed.
inline Eigen::MatrixXd diagonal_generator(const MaserConfig& cfg, double kappa = 1.0)
{
    const Eigen::Index d = cfg.n_max + 1;
    const MaserGenerator generator{cfg, kappa};
    Eigen::MatrixXd out(d, d);
    ComplexMatrix basis = ComplexMatrix::Zero(d, d);
    for (Eigen::Index n = 0; n < d; ++n) {
        basis(n, n) = 1.0;
        out.col(n) = generator(basis).diagonal().real();
        basis(n, n) = 0.0;
    }
    return out;
}

/// Steady-state populations from the one-dimensional nullspace of the diagonal
/// generator (right singular vector of the smallest singular value). Built from
/// the gain map and dissipator only, never from the closed-form recursion.
inline PhotonDistribution steady_state_nullspace(const MaserConfig& cfg, double kappa = 1.0)
{
    cfg.validate();
    detail::require(kappa > 0.0, "steady_state_nullspace: kappa must be > 0");
    const Eigen::MatrixXd g = diagonal_generator(cfg, kappa);
    Eigen::BDCSVD<Eigen::MatrixXd> svd(g, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const Eigen::Index d = sv.size();
    const double smallest = sv[d - 1];
    const double second = sv[d - 2];
    if (second < 1e3 * smallest) {
        throw NumericalError("steady_state_nullspace: ambiguous steady state (singular values " +
                             text::fixed_digits(smallest, 3) + ", " + text::fixed_digits(second, 3) + ")");
    }
    const Eigen::VectorXd v = svd.matrixV().col(d - 1);
    std::vector<double> p(v.data(), v.data() + v.size());
    return detail::finish_distribution(std::move(p), DistributionSource::master_equation);
}

struct EvolveOptions {
    double kappa = 1.0;
    double t_final = 20.0;
    double dt = 1e-3;
    int report_every = 100; ///< steps between reported points (the final step is always reported)
};

struct TrajectoryPoint {
    double t = 0.0;
    double trace = 1.0;
    double mean_n = 0.0;
    std::vector<double> populations;
};

struct Trajectory {
    std::vector<TrajectoryPoint> points;
    ComplexMatrix final_state;
    double max_trace_error = 0.0;
    double max_hermiticity_error = 0.0;
    double min_population = 0.0; ///< most negative population seen; the generator is not completely positive
    double dt = 0.0;             ///< step actually used (t_final split into whole steps)
};

/// Largest step the explicit scheme accepts: dt (r_a + kappa (n_th + 1) n_max) < 0.1.
inline double max_stable_dt(const MaserConfig& cfg, double kappa)
{
    return 0.1 / (cfg.n_t * kappa + kappa * (cfg.n_th + 1.0) * cfg.n_max);
}

/// Fixed-step RK4 integration of the master equation.
///
/// Trace (|tr - 1| < 1e-9) and Hermiticity (< 1e-10) are checked at every
/// reported step; a breach aborts with a NumericalError naming the time.
inline Trajectory evolve(const DensityMatrix& rho0, const MaserConfig& cfg, const EvolveOptions& opt)
{
    cfg.validate(true);
    detail::require(rho0.n_max() == cfg.n_max, "evolve: initial state truncation differs from cfg.n_max");
    detail::require(opt.kappa > 0.0 && opt.t_final > 0.0 && opt.dt > 0.0 && opt.report_every >= 1,
                    "evolve: kappa, t_final, dt must be > 0 and report_every >= 1");
    const double limit = max_stable_dt(cfg, opt.kappa);
    if (!(opt.dt < limit)) {
        throw ValidationError("evolve: dt = " + text::fixed_digits(opt.dt, 6) +
                              " violates the stability bound dt * (r_a + kappa (n_th+1) n_max) < 0.1; use dt <= " +
                              text::fixed_digits(0.9 * limit, 3));
    }

    const MaserGenerator generator{cfg, opt.kappa};
    const auto steps = static_cast<long>(std::ceil(opt.t_final / opt.dt - 1e-9));
    const double dt = opt.t_final / static_cast<double>(steps);

    Trajectory out;
    out.dt = dt;
    ComplexMatrix rho = rho0.matrix();
    out.min_population = rho.diagonal().real().minCoeff();

    auto record = [&](long step) {
        const double t = dt * static_cast<double>(step);
        const auto diag = diagnose(rho);
        if (!diag.finite || diag.trace_error >= 1e-9 || diag.hermiticity_error >= 1e-10) {
            throw NumericalError("evolve: invariant breach at t = " + text::fixed_digits(t, 6) +
                                 " (trace error " + text::fixed_digits(diag.trace_error, 3) +
                                 ", hermiticity error " + text::fixed_digits(diag.hermiticity_error, 3) +
                                 ", top-level population " + text::fixed_digits(rho(cfg.n_max, cfg.n_max).real(), 3) +
                                 ")");
        }
        out.max_trace_error = std::max(out.max_trace_error, diag.trace_error);
        out.max_hermiticity_error = std::max(out.max_hermiticity_error, diag.hermiticity_error);
        out.min_population = std::min(out.min_population, diag.min_population);
        out.points.push_back({t, rho.trace().real(), mean_photon_number(rho), populations(rho)});
    };

    record(0);
    for (long step = 1; step <= steps; ++step) {
        const ComplexMatrix k1 = generator(rho);
        const ComplexMatrix k2 = generator(rho + 0.5 * dt * k1);
        const ComplexMatrix k3 = generator(rho + 0.5 * dt * k2);
        const ComplexMatrix k4 = generator(rho + dt * k3);
        rho += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (step % opt.report_every == 0 || step == steps) {
            record(step);
        }
    }
    out.final_state = rho;
    return out;
}

} // namespace sqcmaser
