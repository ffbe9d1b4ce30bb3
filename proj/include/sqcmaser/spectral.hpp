#pragma once

// Lowest eigenpairs of the circuit Hamiltonian and flux sweeps over them.

#include "sqcmaser/circuit.hpp"
#include "sqcmaser/errors.hpp"
#include "sqcmaser/parallel.hpp"
#include "sqcmaser/text.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace sqcmaser {

struct SolverOptions {
    std::uint64_t seed = 20070611; ///< start block of the iterative solver
    Eigen::Index dense_threshold = 1024;
    int guard_vectors = 4;  ///< block size is k + guard_vectors
    int block_steps = 6;    ///< Krylov block steps between restarts
    int max_restarts = 40;
    double shift_margin = 0.05;  ///< shift sits this far below min U
    double tolerance = 1e-10;    ///< residual target relative to max(1, |E|)
};

class EigenSolveError : public NumericalError {
public:
    EigenSolveError(const std::string& what, double worst_residual)
        : NumericalError(what + " (worst residual " + text::fixed_digits(worst_residual, 3) + ")"),
          worst_residual_(worst_residual)
    {
    }

    [[nodiscard]] double worst_residual() const { return worst_residual_; }

private:
    double worst_residual_;
};

/// Lowest levels of H / E_J with grid-sampled eigenvectors.
///
/// States are real, normalized so that weight * sum(psi^2) = 1, and carry a
/// fixed sign: the component of largest magnitude is positive.
struct EigenSpectrum {
    CircuitParams params;
    PhaseGrid grid;
    Sector sector = Sector::even;
    double weight = 0.0;
    std::vector<double> levels;
    std::vector<double> residuals; ///< ||H psi - E psi|| / ||psi||
    Eigen::MatrixXd states;        ///< one column per level; empty when dropped

    [[nodiscard]] int size() const { return static_cast<int>(levels.size()); }
    [[nodiscard]] bool has_states() const { return states.cols() == size() && size() > 0; }

    /// weight * sum_x psi_i(x) O(x) psi_j(x) for a diagonal (multiplicative) operator O.
    [[nodiscard]] double matrix_element(int i, int j, const Eigen::VectorXd& op) const
    {
        detail::require(has_states(), "spectrum: eigenvectors were not kept");
        detail::require(i >= 0 && j >= 0 && i < size() && j < size(),
                        "spectrum: level index out of range");
        return weight * states.col(i).cwiseProduct(op).dot(states.col(j));
    }

    template <typename Fn>
    [[nodiscard]] Eigen::VectorXd sample(Fn&& fn) const
    {
        return sample_grid(grid, sector, std::forward<Fn>(fn));
    }
};

namespace detail {

inline void fix_phase(Eigen::Ref<Eigen::VectorXd> v)
{
    const double peak = v.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (std::abs(v[i]) >= (1.0 - 1e-8) * peak) {
            if (v[i] < 0.0) {
                v = -v;
            }
            return;
        }
    }
}

inline double relative_residual(double residual, double level)
{
    return residual / std::max(1.0, std::abs(level));
}

struct RitzPairs {
    Eigen::VectorXd values;
    Eigen::MatrixXd vectors; // orthonormal in the Euclidean inner product
    Eigen::VectorXd residuals;
};

inline RitzPairs dense_lowest(const HamiltonianOperator& op, int k)
{
    const Eigen::MatrixXd dense = Eigen::MatrixXd(op.matrix());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(dense);
    if (solver.info() != Eigen::Success) {
        throw EigenSolveError("dense eigensolver failed", std::numeric_limits<double>::infinity());
    }
    RitzPairs out;
    out.values = solver.eigenvalues().head(k);
    out.vectors = solver.eigenvectors().leftCols(k);
    out.residuals.resize(k);
    for (int i = 0; i < k; ++i) {
        out.residuals[i] = (op.matrix() * out.vectors.col(i) - out.values[i] * out.vectors.col(i)).norm();
    }
    return out;
}

/// Block shift-invert Krylov iteration with full reorthogonalization and
/// Rayleigh-Ritz on H. The shift sits below min U, so H - sigma is positive
/// definite (the kinetic part is positive semidefinite) and an LDLT of it
/// never pivots through zero. Blocks resolve degenerate levels that a
/// single-vector Lanczos run would miss.
inline RitzPairs krylov_lowest(const HamiltonianOperator& op, int k, const SolverOptions& opt)
{
    using Eigen::Index;
    using Eigen::MatrixXd;

    const Index n = op.dimension();
    const Eigen::SparseMatrix<double> h = op.matrix();

    double sigma = op.potential_values().minCoeff() - opt.shift_margin;
    Eigen::SparseMatrix<double> identity(n, n);
    identity.setIdentity();
    Eigen::SparseMatrix<double> shifted = h - sigma * identity;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(shifted);
    if (ldlt.info() != Eigen::Success || ldlt.vectorD().minCoeff() <= 0.0) {
        throw EigenSolveError("shifted Hamiltonian is not positive definite",
                              std::numeric_limits<double>::infinity());
    }

    const Index block = std::min<Index>(k + opt.guard_vectors, n);
    const Index capacity = std::min<Index>(block * (opt.block_steps + 1), n);

    std::mt19937_64 rng(opt.seed);
    std::uniform_real_distribution<double> uniform(-1.0, 1.0);
    MatrixXd start(n, block);
    for (Index c = 0; c < block; ++c) {
        for (Index r = 0; r < n; ++r) {
            start(r, c) = uniform(rng);
        }
    }
    MatrixXd x = Eigen::HouseholderQR<MatrixXd>(start).householderQ() * MatrixXd::Identity(n, block);

    MatrixXd basis(n, capacity);
    RitzPairs best;
    double worst = std::numeric_limits<double>::infinity();

    for (int restart = 0; restart <= opt.max_restarts; ++restart) {
        Index m = block;
        basis.leftCols(block) = x;
        Index last_begin = 0;
        Index last_count = block;

        for (int step = 0; step < opt.block_steps && m < capacity; ++step) {
            MatrixXd w = ldlt.solve(basis.middleCols(last_begin, last_count));
            const Index begin = m;
            for (Index c = 0; c < w.cols() && m < capacity; ++c) {
                Eigen::VectorXd v = w.col(c);
                const double original = v.norm();
                for (int pass = 0; pass < 2; ++pass) {
                    v -= basis.leftCols(m) * (basis.leftCols(m).transpose() * v);
                }
                const double remaining = v.norm();
                if (remaining > 1e-10 * original) {
                    basis.col(m++) = v / remaining;
                }
            }
            last_begin = begin;
            last_count = m - begin;
            if (last_count == 0) {
                break;
            }
        }

        const auto q = basis.leftCols(m);
        const MatrixXd hq = h * q;
        MatrixXd projected = q.transpose() * hq;
        projected = 0.5 * (projected + projected.transpose()).eval();
        Eigen::SelfAdjointEigenSolver<MatrixXd> small(projected);
        if (small.info() != Eigen::Success) {
            throw EigenSolveError("Rayleigh-Ritz step failed", worst);
        }

        const Index keep = std::min<Index>(block, m);
        const MatrixXd z = small.eigenvectors().leftCols(keep);
        best.values = small.eigenvalues().head(k);
        best.vectors = q * z;
        const MatrixXd residual = hq * z - best.vectors * small.eigenvalues().head(keep).asDiagonal();
        best.residuals.resize(k);
        worst = 0.0;
        for (int i = 0; i < k; ++i) {
            best.residuals[i] = residual.col(i).norm();
            worst = std::max(worst, relative_residual(best.residuals[i], best.values[i]));
        }
        if (worst <= opt.tolerance) {
            best.vectors.conservativeResize(Eigen::NoChange, k);
            return best;
        }
        x = Eigen::HouseholderQR<MatrixXd>(best.vectors).householderQ() * MatrixXd::Identity(n, keep);
        if (keep < block) {
            break;
        }
    }
    throw EigenSolveError("shift-invert Krylov solver did not converge in " +
                              std::to_string(opt.max_restarts) + " restarts",
                          worst);
}

} // namespace detail

/// The k lowest eigenpairs of `op`, 1 <= k <= 8.
inline EigenSpectrum lowest_eigenpairs(const HamiltonianOperator& op, int k, const SolverOptions& options = {})
{
    detail::require(k >= 1 && k <= 8, "lowest_eigenpairs: k must be in [1, 8]");
    detail::require(k < op.dimension(), "lowest_eigenpairs: k must be below the dimension");

    detail::RitzPairs pairs = op.dimension() <= options.dense_threshold
                                  ? detail::dense_lowest(op, k)
                                  : detail::krylov_lowest(op, k, options);

    EigenSpectrum out;
    out.params = op.params();
    out.grid = op.grid();
    out.sector = op.sector();
    out.weight = op.weight();
    out.levels.assign(pairs.values.data(), pairs.values.data() + k);
    out.residuals.assign(pairs.residuals.data(), pairs.residuals.data() + k);
    out.states = pairs.vectors / std::sqrt(out.weight);
    for (int i = 0; i < k; ++i) {
        detail::fix_phase(out.states.col(i));
    }

    double worst = 0.0;
    for (int i = 0; i < k; ++i) {
        worst = std::max(worst, detail::relative_residual(out.residuals[i], out.levels[i]));
    }
    if (!(worst <= 1e-8)) {
        throw EigenSolveError("eigenpairs fail the residual check", worst);
    }
    return out;
}

struct SweepOptions {
    Sector sector = Sector::even;
    SolverOptions solver;
    int workers = 0; ///< 0: environment or hardware default
    bool keep_states = false;
};

struct SweepResult {
    CircuitParams base; ///< f is ignored; f_s is the sweep's SQUID flux
    PhaseGrid grid;
    Sector sector = Sector::even;
    int k = 0;
    std::uint64_t seed = 0;
    std::vector<double> axis;
    std::vector<EigenSpectrum> spectra;
};

/// One sweep point: either a spectrum or the failure message.
struct SweepPoint {
    double f = 0.0;
    std::optional<EigenSpectrum> spectrum;
    std::string error;
};

namespace detail {

inline void validate_axis(const std::vector<double>& f_values)
{
    require(!f_values.empty(), "sweep: f axis is empty");
    for (std::size_t i = 0; i < f_values.size(); ++i) {
        require(std::isfinite(f_values[i]), "sweep: f values must be finite");
        if (i > 0) {
            require(f_values[i] > f_values[i - 1], "sweep: f axis must be strictly increasing");
        }
    }
}

} // namespace detail

/// Solves every point and records per-point numerical failures instead of throwing.
inline std::vector<SweepPoint> run_sweep_points(const CircuitParams& base, const std::vector<double>& f_values,
                                                double f_s, const PhaseGrid& grid, int k,
                                                const SweepOptions& options = {})
{
    detail::validate_axis(f_values);
    base.at_flux(f_values.front(), f_s).validate();
    grid.validate(options.sector);

    std::vector<SweepPoint> points(f_values.size());
    parallel_for(f_values.size(), resolve_workers(options.workers), [&](std::size_t i) {
        points[i].f = f_values[i];
        try {
            const auto op = assemble_hamiltonian(base.at_flux(f_values[i], f_s), grid, options.sector);
            EigenSpectrum spectrum = lowest_eigenpairs(op, k, options.solver);
            if (!options.keep_states) {
                spectrum.states.resize(0, 0);
            }
            points[i].spectrum = std::move(spectrum);
        } catch (const NumericalError& e) {
            points[i].error = e.what();
        }
    });
    return points;
}

/// One spectrum per f value. Any point failure aborts with the failing f in the message.
inline SweepResult sweep_spectrum(const CircuitParams& base, const std::vector<double>& f_values, double f_s,
                                  const PhaseGrid& grid, int k, const SweepOptions& options = {})
{
    auto points = run_sweep_points(base, f_values, f_s, grid, k, options);
    SweepResult out;
    out.base = base.at_flux(f_values.front(), f_s);
    out.grid = grid;
    out.sector = options.sector;
    out.k = k;
    out.seed = options.solver.seed;
    out.axis = f_values;
    out.spectra.reserve(points.size());
    for (auto& point : points) {
        if (!point.spectrum) {
            throw NumericalError("sweep point f = " + text::fixed_digits(point.f, 12) +
                                 " failed: " + point.error);
        }
        out.spectra.push_back(std::move(*point.spectrum));
    }
    return out;
}

// ---------------------------------------------------------------------------
// On-disk memoization of sweep levels.
//
// Text container, one token per field, floats written as C99 hex floats so a
// save/load cycle is bit-exact. The key hashes every input that affects the
// levels; a mismatch means the file belongs to a different sweep.

inline constexpr int sweep_cache_format = 1;

inline std::string sweep_cache_key(const CircuitParams& base, const std::vector<double>& f_values, double f_s,
                                   const PhaseGrid& grid, Sector sector, int k, std::uint64_t seed)
{
    std::ostringstream s;
    s << "gamma " << text::hexfloat(base.gamma) << " x " << text::hexfloat(base.ej_over_ec) << " ej "
      << text::hexfloat(base.ej_freq) << " fs " << text::hexfloat(f_s) << " grid " << grid.n_p << ' '
      << grid.n_q << " sector " << to_string(sector) << " k " << k << " seed " << seed << " axis";
    for (double f : f_values) {
        s << ' ' << text::hexfloat(f);
    }
    return text::hex64(text::fnv1a64(s.str()));
}

inline std::string sweep_cache_key(const SweepResult& sweep)
{
    return sweep_cache_key(sweep.base, sweep.axis, sweep.base.f_s, sweep.grid, sweep.sector, sweep.k,
                           sweep.seed);
}

inline void save_sweep(const SweepResult& sweep, const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw ValidationError("cannot write sweep cache " + path.string());
    }
    out << "sqcmaser-sweep " << sweep_cache_format << '\n'
        << "key " << sweep_cache_key(sweep) << '\n'
        << "gamma " << text::hexfloat(sweep.base.gamma) << '\n'
        << "ej_over_ec " << text::hexfloat(sweep.base.ej_over_ec) << '\n'
        << "ej_freq " << text::hexfloat(sweep.base.ej_freq) << '\n'
        << "f_s " << text::hexfloat(sweep.base.f_s) << '\n'
        << "grid " << sweep.grid.n_p << ' ' << sweep.grid.n_q << '\n'
        << "sector " << to_string(sweep.sector) << '\n'
        << "k " << sweep.k << '\n'
        << "seed " << sweep.seed << '\n'
        << "points " << sweep.axis.size() << '\n';
    for (std::size_t i = 0; i < sweep.axis.size(); ++i) {
        out << text::hexfloat(sweep.axis[i]);
        for (double e : sweep.spectra[i].levels) {
            out << ' ' << text::hexfloat(e);
        }
        for (double r : sweep.spectra[i].residuals) {
            out << ' ' << text::hexfloat(r);
        }
        out << '\n';
    }
}

/// Loads a levels-only sweep; throws ValidationError on malformed or tampered files.
inline SweepResult load_sweep(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ValidationError("cannot read sweep cache " + path.string());
    }
    auto expect = [&](const std::string& label) {
        std::string token;
        if (!(in >> token) || token != label) {
            throw ValidationError("sweep cache " + path.string() + ": expected '" + label + "'");
        }
    };
    auto read_double = [&] {
        std::string token;
        in >> token;
        return text::parse_double(token);
    };

    int format = 0;
    expect("sqcmaser-sweep");
    in >> format;
    detail::require(format == sweep_cache_format, "sweep cache: unsupported format version");

    SweepResult out;
    std::string key;
    std::string sector;
    std::size_t count = 0;
    expect("key");
    in >> key;
    expect("gamma");
    out.base.gamma = read_double();
    expect("ej_over_ec");
    out.base.ej_over_ec = read_double();
    expect("ej_freq");
    out.base.ej_freq = read_double();
    expect("f_s");
    out.base.f_s = read_double();
    expect("grid");
    in >> out.grid.n_p >> out.grid.n_q;
    expect("sector");
    in >> sector;
    out.sector = parse_sector(sector);
    expect("k");
    in >> out.k;
    expect("seed");
    in >> out.seed;
    expect("points");
    in >> count;
    detail::require(static_cast<bool>(in) && out.k >= 1 && out.k <= 8, "sweep cache: corrupt header");

    for (std::size_t i = 0; i < count; ++i) {
        out.axis.push_back(read_double());
        EigenSpectrum spectrum;
        spectrum.params = out.base.at_flux(out.axis.back(), out.base.f_s);
        spectrum.grid = out.grid;
        spectrum.sector = out.sector;
        spectrum.weight = out.grid.h_p() * out.grid.h_q() * (out.sector == Sector::full ? 1.0 : 2.0);
        for (int l = 0; l < out.k; ++l) {
            spectrum.levels.push_back(read_double());
        }
        for (int l = 0; l < out.k; ++l) {
            spectrum.residuals.push_back(read_double());
        }
        out.spectra.push_back(std::move(spectrum));
    }
    detail::require(static_cast<bool>(in), "sweep cache: truncated body");
    out.base.f = out.axis.empty() ? 0.0 : out.axis.front();
    detail::require(sweep_cache_key(out) == key, "sweep cache: key does not match contents");
    return out;
}

/// sweep_spectrum with memoization under `cache_dir` (levels only).
inline SweepResult cached_sweep(const std::filesystem::path& cache_dir, const CircuitParams& base,
                                const std::vector<double>& f_values, double f_s, const PhaseGrid& grid, int k,
                                const SweepOptions& options = {})
{
    detail::validate_axis(f_values);
    const std::string key = sweep_cache_key(base, f_values, f_s, grid, options.sector, k, options.solver.seed);
    const auto path = cache_dir / ("sweep-" + key + ".txt");
    if (std::filesystem::exists(path)) {
        try {
            return load_sweep(path);
        } catch (const ValidationError&) {
            // stale or corrupt entry: recompute and overwrite
        }
    }
    SweepOptions levels_only = options;
    levels_only.keep_states = false;
    SweepResult sweep = sweep_spectrum(base, f_values, f_s, grid, k, levels_only);
    std::filesystem::create_directories(cache_dir);
    save_sweep(sweep, path);
    return sweep;
}

} // namespace sqcmaser
