#pragma once

// Batch commands behind the CLI. Each writes deterministic CSV files (fixed
// precision, fixed row order, #-prefixed header) into the output directory.

#include "sqcmaser/config.hpp"
#include "sqcmaser/device.hpp"
#include "sqcmaser/lindblad.hpp"
#include "sqcmaser/maser_stats.hpp"
#include "sqcmaser/parallel.hpp"
#include "sqcmaser/spectral.hpp"
#include "sqcmaser/transitions.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace sqcmaser {

struct RunOptions {
    int workers = 0;                          ///< 0: $SQCMASER_WORKERS or hardware concurrency
    std::optional<std::string> out_dir;       ///< overrides output.directory
    std::optional<PhaseGrid> grid;            ///< overrides circuit.grid
    std::optional<std::uint64_t> seed;        ///< overrides sweep.seed
    std::optional<std::filesystem::path> cache_dir; ///< level cache for the generic sweep
};

inline void apply_overrides(RunConfig& cfg, const RunOptions& opt)
{
    if (opt.out_dir) cfg.output.directory = *opt.out_dir;
    if (opt.grid) cfg.circuit.grid = *opt.grid;
    if (opt.seed) cfg.sweep.seed = *opt.seed;
}

struct CommandResult {
    std::vector<std::filesystem::path> files;
    std::string summary; ///< human-readable lines for stdout
};

/// Fraction of sweep points allowed to fail before the command fails.
inline constexpr double max_failure_fraction = 0.01;

namespace detail {

class CsvFile {
public:
    CsvFile(const RunConfig& cfg, const std::filesystem::path& path, const std::string& command)
        : path_(path), precision_(cfg.output.precision)
    {
        header("generator " + std::string(tool_version));
        header("command " + command);
        header("config_hash " + config_hash(cfg));
    }

    void header(const std::string& line) { head_ += "# " + line + '\n'; }

    void columns(const std::vector<std::string>& names)
    {
        std::string line;
        for (const auto& name : names) {
            line += (line.empty() ? "" : ",") + name;
        }
        body_ += line + '\n';
    }

    [[nodiscard]] std::string num(double v) const { return text::fixed_digits(v, precision_); }

    void row(const std::vector<std::string>& cells)
    {
        std::string line;
        for (std::size_t i = 0; i < cells.size(); ++i) {
            line += (i ? "," : "") + cells[i];
        }
        body_ += line + '\n';
    }

    void row(const std::vector<double>& values)
    {
        std::vector<std::string> cells;
        cells.reserve(values.size());
        for (double v : values) cells.push_back(num(v));
        row(cells);
    }

    std::filesystem::path write() const
    {
        if (path_.has_parent_path()) {
            std::filesystem::create_directories(path_.parent_path());
        }
        std::ofstream out(path_, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw ValidationError("cannot write " + path_.string());
        }
        out << head_ << body_;
        if (!out) {
            throw NumericalError("write failed for " + path_.string());
        }
        return path_;
    }

private:
    std::filesystem::path path_;
    int precision_;
    std::string head_;
    std::string body_;
};

inline std::string tag(double value)
{
    return text::fixed_digits(value, 6);
}

inline std::filesystem::path out_path(const RunConfig& cfg, const std::string& name)
{
    return std::filesystem::path(cfg.output.directory) / name;
}

inline SweepOptions sweep_options(const RunConfig& cfg, int workers, bool keep_states)
{
    SweepOptions opt;
    opt.sector = cfg.circuit.sector;
    opt.solver.seed = cfg.sweep.seed;
    opt.workers = workers;
    opt.keep_states = keep_states;
    return opt;
}

/// Writes the failure sidecar and throws once failures exceed the allowed fraction.
inline std::filesystem::path record_failures(const RunConfig& cfg, const std::string& name,
                                             const std::vector<SweepPoint>& points, const std::string& command,
                                             double f_s)
{
    CsvFile log(cfg, out_path(cfg, name), command);
    log.header("f_s " + tag(f_s));
    log.header("per-point eigensolver failures; rows missing from the data file");
    log.columns({"f", "error"});
    std::size_t failed = 0;
    for (const auto& p : points) {
        if (!p.spectrum) {
            ++failed;
            std::string message = p.error;
            std::replace(message.begin(), message.end(), ',', ';');
            std::replace(message.begin(), message.end(), '\n', ' ');
            log.row(std::vector<std::string>{log.num(p.f), message});
        }
    }
    auto path = log.write();
    if (static_cast<double>(failed) > max_failure_fraction * static_cast<double>(points.size())) {
        throw NumericalError(command + ": " + std::to_string(failed) + " of " + std::to_string(points.size()) +
                             " points failed at f_s = " + tag(f_s) + " (see " + path.string() + ")");
    }
    return path;
}

} // namespace detail

/// Levels E0..E3 and |t_01|, |t_02|, |t_12| versus f, one file per f_s.
inline CommandResult cmd_fig2(const RunConfig& cfg, const RunOptions& opt = {})
{
    cfg.validate();
    const auto axis = cfg.sweep.axis();
    CommandResult result;
    for (double f_s : cfg.sweep.f_s) {
        const auto points = run_sweep_points(cfg.circuit.params, axis, f_s, cfg.circuit.grid, cfg.sweep.k,
                                             detail::sweep_options(cfg, opt.workers, true));
        std::vector<std::optional<TransitionRow>> rows(points.size());
        parallel_for(points.size(), resolve_workers(opt.workers), [&](std::size_t i) {
            if (points[i].spectrum) rows[i] = transition_row(*points[i].spectrum, cfg.circuit.k_time);
        });

        const std::string stem = "fig2_fs" + detail::tag(f_s);
        detail::CsvFile csv(cfg, detail::out_path(cfg, stem + ".csv"), "fig2");
        csv.header("f_s " + detail::tag(f_s));
        csv.header("grid " + std::to_string(cfg.circuit.grid.n_p) + "x" + std::to_string(cfg.circuit.grid.n_q) +
                   " sector " + std::string(to_string(cfg.circuit.sector)));
        csv.header("units: f, f_s in flux quanta; E_i in E_J; t_ij in I_c*Phi_w0");
        csv.columns({"f", "E0", "E1", "E2", "E3", "t01", "t02", "t12"});
        for (const auto& row : rows) {
            if (!row) continue;
            csv.row(std::vector<double>{row->f, row->levels[0], row->levels[1], row->levels[2], row->levels[3],
                                        row->t01, row->t02, row->t12});
        }
        result.files.push_back(csv.write());
        result.files.push_back(detail::record_failures(cfg, stem + ".failures.csv", points, "fig2", f_s));
        result.summary += "fig2 f_s=" + detail::tag(f_s) + ": " + std::to_string(axis.size()) + " points\n";
    }
    return result;
}

/// K_01 and K_12 versus f, one file per f_s; "crossing" where the pair is degenerate.
inline CommandResult cmd_fig3(const RunConfig& cfg, const RunOptions& opt = {})
{
    cfg.validate();
    const auto axis = cfg.sweep.axis();
    CommandResult result;
    for (double f_s : cfg.sweep.fig3_f_s) {
        const auto points = run_sweep_points(cfg.circuit.params, axis, f_s, cfg.circuit.grid, cfg.sweep.k,
                                             detail::sweep_options(cfg, opt.workers, true));
        std::vector<std::optional<TransitionRow>> rows(points.size());
        parallel_for(points.size(), resolve_workers(opt.workers), [&](std::size_t i) {
            if (points[i].spectrum) rows[i] = transition_row(*points[i].spectrum, cfg.circuit.k_time);
        });

        const std::string stem = "fig3_fs" + detail::tag(f_s);
        detail::CsvFile csv(cfg, detail::out_path(cfg, stem + ".csv"), "fig3");
        csv.header("f_s " + detail::tag(f_s));
        csv.header("k_time " + std::string(to_string(cfg.circuit.k_time)) + " hbar/E_J = " +
                   text::fixed_digits(hbar_over_ej_ns(cfg.circuit.params.ej_freq, cfg.circuit.k_time), 6) + " ns");
        csv.header("units: f in flux quanta; K_ij in ns; gaps in E_J; 'crossing' where |gap| < " +
                   text::fixed_digits(degeneracy_floor, 3) + " E_J");
        csv.columns({"f", "K01_ns", "K12_ns", "gap10", "gap21"});
        for (const auto& row : rows) {
            if (!row) continue;
            csv.row(std::vector<std::string>{csv.num(row->f), row->k01 ? csv.num(*row->k01) : "crossing",
                                             row->k12 ? csv.num(*row->k12) : "crossing", csv.num(row->gap_10),
                                             csv.num(row->gap_21)});
        }
        result.files.push_back(csv.write());
        result.files.push_back(detail::record_failures(cfg, stem + ".failures.csv", points, "fig3", f_s));
        result.summary += "fig3 f_s=" + detail::tag(f_s) + ": " + std::to_string(axis.size()) + " points\n";
    }
    return result;
}

/// Steady-state photon statistics for every (N_t, tau_int) pair, plus a moments summary.
inline CommandResult cmd_fig4(const RunConfig& cfg, const RunOptions& = {})
{
    cfg.validate();
    CommandResult result;
    detail::CsvFile summary(cfg, detail::out_path(cfg, "fig4_summary.csv"), "fig4");
    summary.header("n_th " + detail::tag(cfg.maser.n_th));
    summary.header("units: tau_int in multiples of pi; moments in photons");
    summary.columns({"N_t", "tau_int_pi", "n_max", "mean_sqc", "var_sqc", "fano_sqc", "mean_atomic", "var_atomic",
                     "fano_atomic", "negative_sqc", "tail_sqc", "tail_atomic", "unstable_sqc",
                     "unstable_atomic"});

    for (double n_t : cfg.maser.n_t) {
        for (double tau_pi : cfg.maser.tau_int_pi) {
            MaserConfig mc = MaserConfig::from_pump(cfg.maser.n_th, n_t, tau_pi * constants::pi, cfg.maser.n_max);
            // Both columns share one truncation: the larger of the two adaptive choices.
            const int n_max = std::max(steady_state_sqc(mc).n_max(), steady_state_atomic(mc).n_max());
            mc.n_max = n_max;
            const auto sqc = steady_state_sqc(mc, Truncation::fixed);
            const auto atomic = steady_state_atomic(mc, Truncation::fixed);
            auto finite = [](const PhotonDistribution& d) {
                return std::all_of(d.p.begin(), d.p.end(), [](double v) { return std::isfinite(v); });
            };
            if (!finite(sqc) || !finite(atomic)) {
                throw NumericalError("fig4: non-finite recursion at N_t = " + detail::tag(n_t) +
                                     ", tau_int = " + detail::tag(tau_pi) + " pi");
            }
            const auto ms = distribution_moments(sqc);
            const auto ma = distribution_moments(atomic);

            const std::string name = "fig4_Nt" + detail::tag(n_t) + "_tau" + detail::tag(tau_pi) + "pi.csv";
            detail::CsvFile csv(cfg, detail::out_path(cfg, name), "fig4");
            csv.header("N_t " + detail::tag(n_t) + " tau_int " + detail::tag(tau_pi) + " pi n_th " +
                       detail::tag(cfg.maser.n_th) + " n_max " + std::to_string(n_max));
            csv.header("sqc: regular switching; atomic: Poissonian injection");
            csv.header("sqc negative entries " + std::to_string(sqc.negative) + " min " +
                       csv.num(sqc.min_value) + "; tail " + csv.num(sqc.tail_mass) +
                       (sqc.truncation_limited ? " (truncation limited)" : ""));
            csv.header("atomic tail " + csv.num(atomic.tail_mass) +
                       (atomic.truncation_limited ? " (truncation limited)" : ""));
            csv.header("clamped round-off entries sqc " + std::to_string(sqc.clamped) + " atomic " +
                       std::to_string(atomic.clamped) +
                       (sqc.unstable || atomic.unstable ? " (instability flag set)" : ""));
            csv.columns({"n", "p_sqc", "p_atomic"});
            for (std::size_t n = 0; n < sqc.p.size(); ++n) {
                csv.row(std::vector<double>{static_cast<double>(n), sqc.p[n], atomic.p[n]});
            }
            result.files.push_back(csv.write());
            summary.row(std::vector<double>{n_t, tau_pi, static_cast<double>(n_max), ms.mean, ms.variance, ms.fano,
                                            ma.mean, ma.variance, ma.fano, static_cast<double>(sqc.negative),
                                            sqc.tail_mass, atomic.tail_mass, sqc.unstable ? 1.0 : 0.0,
                                            atomic.unstable ? 1.0 : 0.0});
            result.summary += "fig4 N_t=" + detail::tag(n_t) + " tau_int=" + detail::tag(tau_pi) +
                              "pi: var_sqc=" + text::fixed_digits(ms.variance, 6) +
                              " var_atomic=" + text::fixed_digits(ma.variance, 6) +
                              (sqc.unstable || atomic.unstable ? " [instability flag]" : "") + "\n";
        }
    }
    result.files.push_back(summary.write());
    return result;
}

/// Steady state the evolution should approach: the recursion (or the thermal state without pumping).
inline std::vector<double> evolve_reference(const MaserConfig& mc)
{
    if (mc.n_t > 0.0) {
        return steady_state_sqc(mc, Truncation::fixed).p;
    }
    std::vector<double> p(static_cast<std::size_t>(mc.n_max) + 1);
    const double ratio = mc.n_th / (mc.n_th + 1.0);
    double w = 1.0;
    double total = 0.0;
    for (auto& v : p) {
        v = w;
        total += w;
        w *= ratio;
    }
    for (auto& v : p) v /= total;
    return p;
}

/// Master-equation trajectory plus a comparison of the final diagonal with the steady state.
inline CommandResult cmd_evolve(const RunConfig& cfg, const RunOptions& = {})
{
    cfg.validate();
    const MaserConfig mc = cfg.evolve.maser();
    EvolveOptions eo;
    eo.kappa = cfg.evolve.kappa;
    eo.t_final = cfg.evolve.t_final;
    eo.dt = cfg.evolve.dt;
    eo.report_every = cfg.evolve.report_every;
    const Trajectory traj = evolve(cfg.evolve.initial_state(), mc, eo);

    CommandResult result;
    detail::CsvFile csv(cfg, detail::out_path(cfg, "evolve.csv"), "evolve");
    csv.header("N_t " + detail::tag(mc.n_t) + " tau_int " + detail::tag(cfg.evolve.tau_int_pi) + " pi n_th " +
               detail::tag(mc.n_th) + " n_max " + std::to_string(mc.n_max) + " kappa " +
               detail::tag(eo.kappa) + " dt " + csv.num(traj.dt) + " initial " + cfg.evolve.initial);
    csv.header("max trace error " + text::fixed_digits(traj.max_trace_error, 3) + "; max hermiticity error " +
               text::fixed_digits(traj.max_hermiticity_error, 3) + "; min population " +
               text::fixed_digits(traj.min_population, 3));
    csv.header("units: t in units of 1/kappa");
    std::vector<std::string> cols{"t", "tr"};
    for (int n = 0; n < cfg.evolve.p_columns; ++n) cols.push_back("p_" + std::to_string(n));
    cols.push_back("mean_n");
    csv.columns(cols);
    for (const auto& point : traj.points) {
        std::vector<double> values{point.t, point.trace};
        for (int n = 0; n < cfg.evolve.p_columns; ++n) values.push_back(point.populations[static_cast<std::size_t>(n)]);
        values.push_back(point.mean_n);
        csv.row(values);
    }
    result.files.push_back(csv.write());

    const auto final_p = populations(traj.final_state);
    const auto steady = evolve_reference(mc);
    double worst = 0.0;
    for (std::size_t n = 0; n < steady.size(); ++n) worst = std::max(worst, std::abs(final_p[n] - steady[n]));
    detail::CsvFile fin(cfg, detail::out_path(cfg, "evolve_final.csv"), "evolve");
    fin.header("final diagonal at t = " + csv.num(eo.t_final) + " against the steady state at the same n_max");
    fin.header("max |p_final - p_steady| " + text::fixed_digits(worst, 3));
    fin.columns({"n", "p_final", "p_steady", "abs_diff"});
    for (std::size_t n = 0; n < steady.size(); ++n) {
        fin.row(std::vector<double>{static_cast<double>(n), final_p[n], steady[n], std::abs(final_p[n] - steady[n])});
    }
    result.files.push_back(fin.write());
    result.summary = "evolve: " + std::to_string(traj.points.size()) + " reported points, max trace error " +
                     text::fixed_digits(traj.max_trace_error, 3) + ", final vs steady state " +
                     text::fixed_digits(worst, 3) + "\n";
    return result;
}

inline std::string device_report_text(const DeviceReport& r)
{
    struct Line {
        const char* name;
        double value;
        const char* unit;
    };
    const Line lines[] = {
        {"cavity frequency nu", r.nu_ghz, "GHz"},
        {"wavelength lambda", r.wavelength_m * 100.0, "cm"},
        {"vacuum flux Phi_w0/Phi_0", r.phi_w0_over_phi0, ""},
        {"coupling g", r.g_rad_per_s * 1e-6, "MHz (rad/s / 1e6)"},
        {"interaction time tau", r.tau_interaction_ns, "ns"},
        {"photon lifetime tau_p", r.tau_photon_s * 1e6, "us"},
        {"critical current I_c", r.critical_current_a * 1e6, "uA"},
        {"Josephson inductance L_J", r.josephson_inductance_h * 1e12, "pH"},
        {"loop inductance L", r.loop_inductance_h * 1e12, "pH"},
        {"beta_L", r.beta_l, ""},
        {"sigma_z term", r.sigma_z_term_over_ej, "E_J"},
        {"sigma_z term / gap", r.sigma_z_term_over_gap, ""},
    };
    std::string out;
    for (const auto& line : lines) {
        char buffer[160];
        std::snprintf(buffer, sizeof buffer, "%-28s %14.6g  %s\n", line.name, line.value, line.unit);
        out += buffer;
    }
    return out;
}

/// Device report as aligned text; with write_csv also device.csv in SI units.
inline CommandResult cmd_estimate_device(const RunConfig& cfg, bool write_csv, const RunOptions& = {})
{
    cfg.validate();
    const DeviceReport r = estimate_device(cfg.device_inputs());
    CommandResult result;
    result.summary = device_report_text(r);
    if (write_csv) {
        detail::CsvFile csv(cfg, detail::out_path(cfg, "device.csv"), "estimate-device");
        csv.header("g is an angular frequency; MHz column value = rad/s / 1e6");
        csv.columns({"quantity", "value", "unit"});
        auto add = [&](const char* q, double v, const char* u) { csv.row(std::vector<std::string>{q, csv.num(v), u}); };
        add("nu", r.nu_ghz, "GHz");
        add("lambda", r.wavelength_m, "m");
        add("phi_w0_over_phi0", r.phi_w0_over_phi0, "1");
        add("g", r.g_rad_per_s, "rad/s");
        add("tau_interaction", r.tau_interaction_ns, "ns");
        add("tau_photon", r.tau_photon_s, "s");
        add("I_c", r.critical_current_a, "A");
        add("L_J", r.josephson_inductance_h, "H");
        add("L_loop", r.loop_inductance_h, "H");
        add("beta_L", r.beta_l, "1");
        add("sigma_z_term_over_ej", r.sigma_z_term_over_ej, "1");
        add("sigma_z_term_over_gap", r.sigma_z_term_over_gap, "1");
        result.files.push_back(csv.write());
    }
    return result;
}

/// Generic level sweep: E0..E_{k-1} and the worst residual, one file per f_s.
/// With a cache directory the levels are memoized between runs.
inline CommandResult cmd_sweep(const RunConfig& cfg, const RunOptions& opt = {})
{
    cfg.validate();
    const auto axis = cfg.sweep.axis();
    CommandResult result;
    for (double f_s : cfg.sweep.f_s) {
        const auto options = detail::sweep_options(cfg, opt.workers, false);
        const SweepResult sweep =
            opt.cache_dir ? cached_sweep(*opt.cache_dir, cfg.circuit.params, axis, f_s, cfg.circuit.grid,
                                         cfg.sweep.k, options)
                          : sweep_spectrum(cfg.circuit.params, axis, f_s, cfg.circuit.grid, cfg.sweep.k, options);
        const std::string name = "sweep_fs" + detail::tag(f_s) + ".csv";
        detail::CsvFile csv(cfg, detail::out_path(cfg, name), "sweep");
        csv.header("f_s " + detail::tag(f_s) + " k " + std::to_string(cfg.sweep.k));
        csv.header("units: f in flux quanta; E_i in E_J; residual relative to max(1, |E|)");
        std::vector<std::string> cols{"f"};
        for (int l = 0; l < cfg.sweep.k; ++l) cols.push_back("E" + std::to_string(l));
        cols.push_back("max_residual");
        csv.columns(cols);
        for (std::size_t i = 0; i < sweep.axis.size(); ++i) {
            std::vector<double> values{sweep.axis[i]};
            const auto& s = sweep.spectra[i];
            values.insert(values.end(), s.levels.begin(), s.levels.end());
            values.push_back(*std::max_element(s.residuals.begin(), s.residuals.end()));
            csv.row(values);
        }
        result.files.push_back(csv.write());
        result.summary += "sweep f_s=" + detail::tag(f_s) + ": " + std::to_string(axis.size()) + " points\n";
    }
    return result;
}

} // namespace sqcmaser
