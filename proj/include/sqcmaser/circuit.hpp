#pragma once

// Circuit model of the SQUID-tunable flux qutrit: parameters, the Josephson
// potential, the circulating-current function and the finite-difference
// Hamiltonian on a periodic (phi_p, phi_q) grid.
//
// All energies are in units of E_J.

#include "sqcmaser/constants.hpp"
#include "sqcmaser/errors.hpp"

#include <Eigen/Sparse>

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace sqcmaser {

struct CircuitParams {
    double gamma = 0.5;        ///< SQUID junction size relative to the main junctions
    double ej_over_ec = 100.0; ///< x = E_J / E_c
    double f = 0.5;            ///< reduced total flux
    double f_s = 0.0;          ///< reduced SQUID flux
    double ej_freq = 400.0;    ///< E_J / h in GHz; only used for unit conversions

    void validate() const
    {
        detail::require(std::isfinite(gamma) && gamma > 0.0, "circuit: gamma must be > 0");
        detail::require(std::isfinite(ej_over_ec) && ej_over_ec > 0.0,
                        "circuit: ej_over_ec must be > 0");
        detail::require(std::isfinite(ej_freq) && ej_freq > 0.0, "circuit: ej_freq must be > 0");
        detail::require(std::isfinite(f) && std::isfinite(f_s), "circuit: fluxes must be finite");
    }

    [[nodiscard]] CircuitParams at_flux(double f_new, double f_s_new) const
    {
        CircuitParams copy = *this;
        copy.f = f_new;
        copy.f_s = f_s_new;
        return copy;
    }
};

/// Symmetry sector of the translation T: (phi_p, phi_q) -> (phi_p + pi, phi_q + 2 pi),
/// under which the potential is invariant.
///
/// `full` discretizes the whole [-pi, pi) x [-2pi, 2pi) torus, where every level
/// appears twice (once per sector). `even` keeps states with T psi = psi, which
/// are exactly the states 2pi-periodic in each junction phase; `odd` keeps
/// T psi = -psi. The reduced sectors store only phi_p in [-pi, 0) and close the
/// phi_p direction with a twisted boundary.
enum class Sector { full, even, odd };

inline std::string_view to_string(Sector s)
{
    switch (s) {
    case Sector::full: return "full";
    case Sector::even: return "even";
    case Sector::odd: return "odd";
    }
    return "?";
}

inline Sector parse_sector(std::string_view name)
{
    if (name == "full") return Sector::full;
    if (name == "even") return Sector::even;
    if (name == "odd") return Sector::odd;
    throw ValidationError("unknown sector '" + std::string(name) + "' (expected full|even|odd)");
}

/// Uniform periodic grid: phi_p in [-pi, pi) with n_p points, phi_q in [-2pi, 2pi) with n_q points.
struct PhaseGrid {
    int n_p = 80;
    int n_q = 160;

    static constexpr double p_min = -constants::pi;
    static constexpr double q_min = -2.0 * constants::pi;

    [[nodiscard]] double h_p() const { return 2.0 * constants::pi / n_p; }
    [[nodiscard]] double h_q() const { return 4.0 * constants::pi / n_q; }
    [[nodiscard]] double phi_p(int i) const { return p_min + h_p() * i; }
    [[nodiscard]] double phi_q(int j) const { return q_min + h_q() * j; }

    void validate(Sector sector) const
    {
        detail::require(n_p >= 16, "grid: n_p must be >= 16, got " + std::to_string(n_p));
        detail::require(n_q >= 32, "grid: n_q must be >= 32, got " + std::to_string(n_q));
        if (sector != Sector::full) {
            detail::require(n_p % 2 == 0 && n_q % 2 == 0,
                            "grid: the " + std::string(to_string(sector)) +
                                " sector needs even n_p and n_q, got " + std::to_string(n_p) + "x" +
                                std::to_string(n_q));
        }
    }

    friend bool operator==(const PhaseGrid&, const PhaseGrid&) = default;
};

/// alpha = 2 gamma cos(pi f_s): effective Josephson energy of the SQUID in units of E_J.
inline double effective_alpha(double gamma, double f_s)
{
    return 2.0 * gamma * std::cos(constants::pi * f_s);
}

/// U(phi_p, phi_q) / E_J.
inline double potential(double phi_p, double phi_q, const CircuitParams& params)
{
    const double pi = constants::pi;
    return 2.0 * (1.0 - std::cos(phi_p) * std::cos(pi * params.f + 0.5 * phi_q)) +
           2.0 * params.gamma * (1.0 - std::cos(pi * params.f_s) * std::cos(phi_q));
}

/// Loop current in units of I_c.
inline double circulating_current(double phi_p, double phi_q, double f)
{
    return -std::cos(phi_p) * std::sin(constants::pi * f + 0.5 * phi_q);
}

/// d(H/E_J)/d f_s at fixed f. Only the SQUID term depends on f_s.
inline double potential_derivative_fs(double phi_q, const CircuitParams& params)
{
    const double pi = constants::pi;
    return 2.0 * pi * params.gamma * std::sin(pi * params.f_s) * std::cos(phi_q);
}

/// d(H/E_J)/d f at fixed f_s; equals -2 pi times the circulating current.
inline double potential_derivative_f(double phi_p, double phi_q, const CircuitParams& params)
{
    return -2.0 * constants::pi * circulating_current(phi_p, phi_q, params.f);
}

/// Number of stored phi_p rows for a sector.
inline int stored_rows(const PhaseGrid& grid, Sector sector)
{
    return sector == Sector::full ? grid.n_p : grid.n_p / 2;
}

/// Samples fn(phi_p, phi_q) at every stored grid point, index i * n_q + j.
template <typename Fn>
Eigen::VectorXd sample_grid(const PhaseGrid& grid, Sector sector, Fn&& fn)
{
    const int rows = stored_rows(grid, sector);
    Eigen::VectorXd values(static_cast<Eigen::Index>(rows) * grid.n_q);
    for (int i = 0; i < rows; ++i) {
        const double p = grid.phi_p(i);
        for (int j = 0; j < grid.n_q; ++j) {
            values[static_cast<Eigen::Index>(i) * grid.n_q + j] = fn(p, grid.phi_q(j));
        }
    }
    return values;
}

/// Test hook: replaces U by zero so the operator reduces to the periodic Laplacian.
enum class PotentialModel { josephson, zero };

/// Discretized H / E_J acting on grid-sampled wavefunctions.
///
/// Kinetic coefficients. With P = -i hbar d/dphi, M_p = 2 C_J (Phi_0 / 2pi)^2,
/// Phi_0 / 2pi = hbar / 2e and E_c = e^2 / 2 C_J:
///   hbar^2 / 2M_p = hbar^2 (2e)^2 / (4 C_J hbar^2) = e^2 / C_J = 2 E_c,
///   M_q = M_p (1 + 4 gamma) / 4  =>  hbar^2 / 2M_q = 8 E_c / (1 + 4 gamma).
/// In units of E_J: c_p = 2 / x and c_q = 8 / (x (1 + 4 gamma)), x = E_J / E_c.
///
/// Storage index of point (i, j) is i * n_q + j, with i running over the
/// stored phi_p rows (all n_p rows for Sector::full, the first n_p / 2 otherwise).
class HamiltonianOperator {
public:
    using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

    HamiltonianOperator(CircuitParams params, PhaseGrid grid, Sector sector, PotentialModel model)
        : params_(params), grid_(grid), sector_(sector), model_(model)
    {
        params_.validate();
        grid_.validate(sector_);
        c_p_ = 2.0 / params_.ej_over_ec;
        c_q_ = 8.0 / (params_.ej_over_ec * (1.0 + 4.0 * params_.gamma));
        assemble();
    }

    [[nodiscard]] const CircuitParams& params() const { return params_; }
    [[nodiscard]] const PhaseGrid& grid() const { return grid_; }
    [[nodiscard]] Sector sector() const { return sector_; }
    [[nodiscard]] PotentialModel potential_model() const { return model_; }
    [[nodiscard]] double c_p() const { return c_p_; }
    [[nodiscard]] double c_q() const { return c_q_; }

    [[nodiscard]] int rows_p() const { return stored_rows(grid_, sector_); }
    [[nodiscard]] Eigen::Index dimension() const { return matrix_.rows(); }

    /// Quadrature weight per stored point. Reduced sectors stand for two copies
    /// of every stored point on the full torus, so the weight doubles there.
    [[nodiscard]] double weight() const
    {
        return grid_.h_p() * grid_.h_q() * (sector_ == Sector::full ? 1.0 : 2.0);
    }

    [[nodiscard]] const SparseMatrix& matrix() const { return matrix_; }
    [[nodiscard]] const Eigen::VectorXd& potential_values() const { return potential_; }

    void apply(std::span<const double> in, std::span<double> out) const
    {
        detail::require(static_cast<Eigen::Index>(in.size()) == dimension() &&
                            static_cast<Eigen::Index>(out.size()) == dimension(),
                        "hamiltonian: vector size mismatch");
        Eigen::Map<const Eigen::VectorXd> x(in.data(), dimension());
        Eigen::Map<Eigen::VectorXd> y(out.data(), dimension());
        y.noalias() = matrix_ * x;
    }

    [[nodiscard]] Eigen::VectorXd apply(const Eigen::VectorXd& x) const { return matrix_ * x; }

    template <typename Fn>
    [[nodiscard]] Eigen::VectorXd sample(Fn&& fn) const
    {
        return sample_grid(grid_, sector_, std::forward<Fn>(fn));
    }

private:
    void assemble()
    {
        const int rows = rows_p();
        const int n_q = grid_.n_q;
        const Eigen::Index n = static_cast<Eigen::Index>(rows) * n_q;
        const double wp = c_p_ / (grid_.h_p() * grid_.h_p());
        const double wq = c_q_ / (grid_.h_q() * grid_.h_q());
        const double twist = sector_ == Sector::odd ? -1.0 : 1.0;

        if (model_ == PotentialModel::zero) {
            potential_ = Eigen::VectorXd::Zero(n);
        } else {
            potential_ = sample([this](double p, double q) { return potential(p, q, params_); });
        }

        auto index = [n_q](int i, int j) { return static_cast<Eigen::Index>(i) * n_q + j; };
        auto wrap_q = [n_q](int j) { return ((j % n_q) + n_q) % n_q; };

        std::vector<Eigen::Triplet<double>> entries;
        entries.reserve(static_cast<std::size_t>(n) * 5);
        for (int i = 0; i < rows; ++i) {
            for (int j = 0; j < n_q; ++j) {
                const Eigen::Index r = index(i, j);
                entries.emplace_back(r, r, potential_[r] + 2.0 * wp + 2.0 * wq);
                entries.emplace_back(r, index(i, wrap_q(j + 1)), -wq);
                entries.emplace_back(r, index(i, wrap_q(j - 1)), -wq);

                for (int step : {+1, -1}) {
                    int ii = i + step;
                    int jj = j;
                    double sign = 1.0;
                    if (sector_ == Sector::full) {
                        ii = (ii + rows) % rows;
                    } else if (ii == rows || ii < 0) {
                        // psi(phi_p + pi, phi_q + 2pi) = sign * psi(phi_p, phi_q)
                        ii = ii < 0 ? rows - 1 : 0;
                        jj = wrap_q(j + n_q / 2);
                        sign = twist;
                    }
                    entries.emplace_back(r, index(ii, jj), -sign * wp);
                }
            }
        }
        matrix_.resize(n, n);
        matrix_.setFromTriplets(entries.begin(), entries.end());
        matrix_.makeCompressed();
    }

    CircuitParams params_;
    PhaseGrid grid_;
    Sector sector_;
    PotentialModel model_;
    double c_p_ = 0.0;
    double c_q_ = 0.0;
    Eigen::VectorXd potential_;
    SparseMatrix matrix_;
};

inline HamiltonianOperator assemble_hamiltonian(const CircuitParams& params, const PhaseGrid& grid,
                                                Sector sector = Sector::even,
                                                PotentialModel model = PotentialModel::josephson)
{
    return HamiltonianOperator(params, grid, sector, model);
}

} // namespace sqcmaser
