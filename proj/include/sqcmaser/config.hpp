#pragma once

// Run configuration for the batch tool: JSON with comments, nested blocks,
// unknown keys rejected. Everything is validated before any computation.

#include "sqcmaser/circuit.hpp"
#include "sqcmaser/constants.hpp"
#include "sqcmaser/device.hpp"
#include "sqcmaser/errors.hpp"
#include "sqcmaser/lindblad.hpp"
#include "sqcmaser/maser_stats.hpp"
#include "sqcmaser/spectral.hpp"
#include "sqcmaser/text.hpp"
#include "sqcmaser/transitions.hpp"

#include "json.hpp"

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace sqcmaser {

inline constexpr std::string_view tool_version = "sqcmaser 1.0.0";

using Json = nlohmann::json;

struct CircuitBlock {
    CircuitParams params; ///< f and f_s come from the sweep block
    PhaseGrid grid;
    Sector sector = Sector::even;
    KTimeConvention k_time = KTimeConvention::angular;
};

struct SweepBlock {
    double f_min = 0.45;
    double f_max = 0.55;
    double f_step = 0.001;
    std::vector<double> f_s{0.0, 0.22, 0.27};
    std::vector<double> fig3_f_s{0.15, 0.22, 0.27};
    int k = 4;
    std::uint64_t seed = SolverOptions{}.seed;

    /// f_min, f_min + step, ... up to f_max (inclusive within 1e-9 steps).
    [[nodiscard]] std::vector<double> axis() const
    {
        detail::require(std::isfinite(f_min) && std::isfinite(f_max) && f_max >= f_min,
                        "sweep: empty f range (f_max < f_min)");
        detail::require(std::isfinite(f_step) && f_step > 0.0, "sweep: f_step must be > 0");
        const double span = (f_max - f_min) / f_step;
        detail::require(span < 1e6, "sweep: more than 1e6 points");
        const auto count = static_cast<std::size_t>(std::floor(span + 1e-9)) + 1;
        std::vector<double> out(count);
        for (std::size_t i = 0; i < count; ++i) {
            out[i] = f_min + f_step * static_cast<double>(i);
        }
        return out;
    }
};

struct MaserBlock {
    double n_th = 0.1;
    std::vector<double> n_t{1.0, 10.0, 100.0};
    std::vector<double> tau_int_pi{0.5, 1.4, 10.0};
    int n_max = 256;
};

struct EvolveBlock {
    double n_t = 1.0;
    double tau_int_pi = 1.4;
    double n_th = 0.1;
    int n_max = 40;
    double kappa = 1.0;
    double t_final = 20.0;
    double dt = 0.002;
    int report_every = 100;
    std::string initial = "vacuum"; ///< vacuum | thermal | fock:N
    int p_columns = 4;

    /// g tau from the pump parameter; zero pump rate means pure cavity decay.
    [[nodiscard]] MaserConfig maser() const
    {
        const double g_tau = n_t > 0.0 ? tau_int_pi * constants::pi / std::sqrt(n_t) : 0.0;
        return {n_th, n_t, g_tau, n_max};
    }

    [[nodiscard]] DensityMatrix initial_state() const
    {
        if (initial == "vacuum") {
            return DensityMatrix::fock(n_max, 0);
        }
        if (initial == "thermal") {
            std::vector<double> p(static_cast<std::size_t>(n_max) + 1);
            const double ratio = n_th / (n_th + 1.0);
            double w = 1.0;
            double total = 0.0;
            for (auto& v : p) {
                v = w;
                total += w;
                w *= ratio;
            }
            for (auto& v : p) {
                v /= total;
            }
            return DensityMatrix::from_populations(p);
        }
        if (initial.rfind("fock:", 0) == 0) {
            const std::string digits = initial.substr(5);
            detail::require(!digits.empty() && digits.find_first_not_of("0123456789") == std::string::npos,
                            "evolve: initial '" + initial + "' is not fock:<n>");
            const int n = std::stoi(digits);
            detail::require(n <= n_max, "evolve: initial Fock level exceeds n_max");
            return DensityMatrix::fock(n_max, n);
        }
        throw ValidationError("evolve: unknown initial state '" + initial + "' (expected vacuum|thermal|fock:<n>)");
    }
};

struct DeviceBlock {
    double gap_over_ej = 0.05;
    double t01 = 0.13;
    double beta_l = 0.1;
    double n_t = 1.0;
    double tau_int_pi = 1.4;
};

struct OutputBlock {
    std::string directory = "out";
    int precision = 12;
};

struct RunConfig {
    CircuitBlock circuit;
    SweepBlock sweep;
    MaserBlock maser;
    EvolveBlock evolve;
    CavityParams cavity;
    DeviceBlock device;
    OutputBlock output;

    void validate() const;

    [[nodiscard]] DeviceInputs device_inputs() const
    {
        DeviceInputs in;
        in.gap_over_ej = device.gap_over_ej;
        in.ej_freq = circuit.params.ej_freq;
        in.t01 = device.t01;
        in.beta_l = device.beta_l;
        in.n_t = device.n_t;
        in.tau_int = device.tau_int_pi * constants::pi;
        in.cavity = cavity;
        return in;
    }
};

namespace detail {

inline void check_keys(const Json& obj, const std::string& where, std::initializer_list<std::string_view> allowed)
{
    require(obj.is_object(), where + ": expected an object");
    for (const auto& item : obj.items()) {
        bool known = false;
        for (auto key : allowed) {
            known = known || item.key() == key;
        }
        if (!known) {
            std::string list;
            for (auto key : allowed) {
                list += (list.empty() ? "" : ", ") + std::string(key);
            }
            throw ValidationError(where + ": unknown key '" + item.key() + "' (allowed: " + list + ")");
        }
    }
}

inline void read_number(const Json& obj, const std::string& where, const char* key, double& out)
{
    if (!obj.contains(key)) return;
    const auto& v = obj.at(key);
    require(v.is_number(), where + "." + key + ": expected a number");
    out = v.get<double>();
}

inline void read_int(const Json& obj, const std::string& where, const char* key, int& out)
{
    if (!obj.contains(key)) return;
    const auto& v = obj.at(key);
    require(v.is_number_integer(), where + "." + key + ": expected an integer");
    out = v.get<int>();
}

inline void read_string(const Json& obj, const std::string& where, const char* key, std::string& out)
{
    if (!obj.contains(key)) return;
    const auto& v = obj.at(key);
    require(v.is_string(), where + "." + key + ": expected a string");
    out = v.get<std::string>();
}

inline void read_list(const Json& obj, const std::string& where, const char* key, std::vector<double>& out)
{
    if (!obj.contains(key)) return;
    const auto& v = obj.at(key);
    require(v.is_array(), where + "." + key + ": expected an array of numbers");
    out.clear();
    for (const auto& x : v) {
        require(x.is_number(), where + "." + key + ": expected an array of numbers");
        out.push_back(x.get<double>());
    }
}

inline bool all_finite(const std::vector<double>& values)
{
    for (double v : values) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

} // namespace detail

inline RunConfig parse_config(std::string_view text)
{
    Json root;
    try {
        root = Json::parse(text.begin(), text.end(), nullptr, true, true);
    } catch (const Json::parse_error& e) {
        throw ValidationError(std::string("config: ") + e.what());
    }
    detail::check_keys(root, "config", {"circuit", "sweep", "maser", "evolve", "cavity", "device", "output"});

    RunConfig cfg;
    if (root.contains("circuit")) {
        const auto& c = root["circuit"];
        detail::check_keys(c, "circuit", {"gamma", "ej_over_ec", "ej_freq", "grid", "sector", "k_time"});
        detail::read_number(c, "circuit", "gamma", cfg.circuit.params.gamma);
        detail::read_number(c, "circuit", "ej_over_ec", cfg.circuit.params.ej_over_ec);
        detail::read_number(c, "circuit", "ej_freq", cfg.circuit.params.ej_freq);
        if (c.contains("grid")) {
            const auto& g = c["grid"];
            detail::require(g.is_array() && g.size() == 2 && g[0].is_number_integer() && g[1].is_number_integer(),
                            "circuit.grid: expected [n_p, n_q]");
            cfg.circuit.grid = {g[0].get<int>(), g[1].get<int>()};
        }
        std::string sector(to_string(cfg.circuit.sector));
        detail::read_string(c, "circuit", "sector", sector);
        cfg.circuit.sector = parse_sector(sector);
        std::string k_time(to_string(cfg.circuit.k_time));
        detail::read_string(c, "circuit", "k_time", k_time);
        cfg.circuit.k_time = parse_k_convention(k_time);
    }
    if (root.contains("sweep")) {
        const auto& s = root["sweep"];
        detail::check_keys(s, "sweep", {"f_min", "f_max", "f_step", "f_s", "fig3_f_s", "k", "seed"});
        detail::read_number(s, "sweep", "f_min", cfg.sweep.f_min);
        detail::read_number(s, "sweep", "f_max", cfg.sweep.f_max);
        detail::read_number(s, "sweep", "f_step", cfg.sweep.f_step);
        detail::read_list(s, "sweep", "f_s", cfg.sweep.f_s);
        detail::read_list(s, "sweep", "fig3_f_s", cfg.sweep.fig3_f_s);
        detail::read_int(s, "sweep", "k", cfg.sweep.k);
        if (s.contains("seed")) {
            detail::require(s["seed"].is_number_unsigned(), "sweep.seed: expected a non-negative integer");
            cfg.sweep.seed = s["seed"].get<std::uint64_t>();
        }
    }
    if (root.contains("maser")) {
        const auto& m = root["maser"];
        detail::check_keys(m, "maser", {"n_th", "n_t", "tau_int_pi", "n_max"});
        detail::read_number(m, "maser", "n_th", cfg.maser.n_th);
        detail::read_list(m, "maser", "n_t", cfg.maser.n_t);
        detail::read_list(m, "maser", "tau_int_pi", cfg.maser.tau_int_pi);
        detail::read_int(m, "maser", "n_max", cfg.maser.n_max);
    }
    if (root.contains("evolve")) {
        const auto& e = root["evolve"];
        detail::check_keys(e, "evolve", {"n_t", "tau_int_pi", "n_th", "n_max", "kappa", "t_final", "dt",
                                         "report_every", "initial", "p_columns"});
        detail::read_number(e, "evolve", "n_t", cfg.evolve.n_t);
        detail::read_number(e, "evolve", "tau_int_pi", cfg.evolve.tau_int_pi);
        detail::read_number(e, "evolve", "n_th", cfg.evolve.n_th);
        detail::read_int(e, "evolve", "n_max", cfg.evolve.n_max);
        detail::read_number(e, "evolve", "kappa", cfg.evolve.kappa);
        detail::read_number(e, "evolve", "t_final", cfg.evolve.t_final);
        detail::read_number(e, "evolve", "dt", cfg.evolve.dt);
        detail::read_int(e, "evolve", "report_every", cfg.evolve.report_every);
        detail::read_string(e, "evolve", "initial", cfg.evolve.initial);
        detail::read_int(e, "evolve", "p_columns", cfg.evolve.p_columns);
    }
    if (root.contains("cavity")) {
        const auto& c = root["cavity"];
        detail::check_keys(c, "cavity", {"area_m2", "thickness_m", "quality_factor", "loop_area_m2", "loop_diameter_m"});
        detail::require(!(c.contains("loop_area_m2") && c.contains("loop_diameter_m")),
                        "cavity: give loop_area_m2 or loop_diameter_m, not both");
        detail::read_number(c, "cavity", "area_m2", cfg.cavity.area);
        detail::read_number(c, "cavity", "thickness_m", cfg.cavity.thickness);
        detail::read_number(c, "cavity", "quality_factor", cfg.cavity.quality);
        detail::read_number(c, "cavity", "loop_area_m2", cfg.cavity.loop_area);
        if (c.contains("loop_diameter_m")) {
            double d = 0.0;
            detail::read_number(c, "cavity", "loop_diameter_m", d);
            detail::require(d > 0.0, "cavity.loop_diameter_m must be > 0");
            cfg.cavity.loop_area = CavityParams::circle_area(d);
        }
    }
    if (root.contains("device")) {
        const auto& d = root["device"];
        detail::check_keys(d, "device", {"gap_over_ej", "t01", "beta_L", "n_t", "tau_int_pi"});
        detail::read_number(d, "device", "gap_over_ej", cfg.device.gap_over_ej);
        detail::read_number(d, "device", "t01", cfg.device.t01);
        detail::read_number(d, "device", "beta_L", cfg.device.beta_l);
        detail::read_number(d, "device", "n_t", cfg.device.n_t);
        detail::read_number(d, "device", "tau_int_pi", cfg.device.tau_int_pi);
    }
    if (root.contains("output")) {
        const auto& o = root["output"];
        detail::check_keys(o, "output", {"directory", "precision"});
        detail::read_string(o, "output", "directory", cfg.output.directory);
        detail::read_int(o, "output", "precision", cfg.output.precision);
    }
    return cfg;
}

inline RunConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ValidationError("cannot read config " + path.string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str());
}

inline void RunConfig::validate() const
{
    circuit.params.validate();
    circuit.grid.validate(circuit.sector);

    const auto axis = sweep.axis();
    detail::require(sweep.k >= 4 && sweep.k <= 8, "sweep.k must be in [4, 8] (E0..E3 are reported)");
    detail::require(!sweep.f_s.empty() && detail::all_finite(sweep.f_s), "sweep.f_s: need finite values");
    detail::require(detail::all_finite(sweep.fig3_f_s), "sweep.fig3_f_s: need finite values");
    detail::require(!sweep.fig3_f_s.empty(), "sweep.fig3_f_s: need at least one value");
    circuit.params.at_flux(axis.front(), sweep.f_s.front()).validate();

    detail::require(!maser.n_t.empty() && !maser.tau_int_pi.empty(), "maser: n_t and tau_int_pi must be non-empty");
    for (double n_t : maser.n_t) {
        for (double tau : maser.tau_int_pi) {
            detail::require(std::isfinite(tau) && tau >= 0.0, "maser.tau_int_pi must be >= 0");
            MaserConfig::from_pump(maser.n_th, n_t, tau * constants::pi, maser.n_max).validate();
        }
    }

    const MaserConfig ev = evolve.maser();
    ev.validate(true);
    detail::require(std::isfinite(evolve.tau_int_pi) && evolve.tau_int_pi >= 0.0, "evolve.tau_int_pi must be >= 0");
    detail::require(evolve.kappa > 0.0 && evolve.t_final > 0.0 && evolve.dt > 0.0 && evolve.report_every >= 1,
                    "evolve: kappa, t_final, dt must be > 0 and report_every >= 1");
    detail::require(evolve.p_columns >= 1 && evolve.p_columns <= evolve.n_max + 1,
                    "evolve.p_columns must be in [1, n_max + 1]");
    (void)evolve.initial_state();
    const double limit = max_stable_dt(ev, evolve.kappa);
    if (!(evolve.dt < limit)) {
        throw ValidationError("evolve.dt = " + text::fixed_digits(evolve.dt, 6) +
                              " violates the stability bound dt * (r_a + kappa (n_th+1) n_max) < 0.1; use dt <= " +
                              text::fixed_digits(0.9 * limit, 3));
    }

    cavity.validate();
    detail::require(device.gap_over_ej > 0.0 && device.t01 > 0.0 && device.beta_l >= 0.0 && device.n_t > 0.0 &&
                        device.tau_int_pi >= 0.0,
                    "device: gap_over_ej, t01, n_t must be > 0; beta_L, tau_int_pi >= 0");

    detail::require(!output.directory.empty(), "output.directory must be non-empty");
    detail::require(output.precision >= 6 && output.precision <= 17, "output.precision must be in [6, 17]");
}

/// Canonical JSON of every setting that affects results (the output directory is excluded).
inline Json canonical_json(const RunConfig& cfg)
{
    Json j;
    j["circuit"] = {{"gamma", cfg.circuit.params.gamma},
                    {"ej_over_ec", cfg.circuit.params.ej_over_ec},
                    {"ej_freq", cfg.circuit.params.ej_freq},
                    {"grid", {cfg.circuit.grid.n_p, cfg.circuit.grid.n_q}},
                    {"sector", std::string(to_string(cfg.circuit.sector))},
                    {"k_time", std::string(to_string(cfg.circuit.k_time))}};
    j["sweep"] = {{"f_min", cfg.sweep.f_min}, {"f_max", cfg.sweep.f_max},     {"f_step", cfg.sweep.f_step},
                  {"f_s", cfg.sweep.f_s},     {"fig3_f_s", cfg.sweep.fig3_f_s}, {"k", cfg.sweep.k},
                  {"seed", cfg.sweep.seed}};
    j["maser"] = {{"n_th", cfg.maser.n_th},
                  {"n_t", cfg.maser.n_t},
                  {"tau_int_pi", cfg.maser.tau_int_pi},
                  {"n_max", cfg.maser.n_max}};
    j["evolve"] = {{"n_t", cfg.evolve.n_t},         {"tau_int_pi", cfg.evolve.tau_int_pi},
                   {"n_th", cfg.evolve.n_th},       {"n_max", cfg.evolve.n_max},
                   {"kappa", cfg.evolve.kappa},     {"t_final", cfg.evolve.t_final},
                   {"dt", cfg.evolve.dt},           {"report_every", cfg.evolve.report_every},
                   {"initial", cfg.evolve.initial}, {"p_columns", cfg.evolve.p_columns}};
    j["cavity"] = {{"area_m2", cfg.cavity.area},
                   {"thickness_m", cfg.cavity.thickness},
                   {"quality_factor", cfg.cavity.quality},
                   {"loop_area_m2", cfg.cavity.loop_area}};
    j["device"] = {{"gap_over_ej", cfg.device.gap_over_ej},
                   {"t01", cfg.device.t01},
                   {"beta_L", cfg.device.beta_l},
                   {"n_t", cfg.device.n_t},
                   {"tau_int_pi", cfg.device.tau_int_pi}};
    j["output"] = {{"precision", cfg.output.precision}};
    return j;
}

inline std::string config_hash(const RunConfig& cfg)
{
    return text::hex64(text::fnv1a64(canonical_json(cfg).dump()));
}

/// "NPxNQ", e.g. "80x160".
inline PhaseGrid parse_grid(std::string_view value)
{
    const auto x = value.find('x');
    auto parse_int = [&](std::string_view part) {
        detail::require(!part.empty() && part.find_first_not_of("0123456789") == std::string_view::npos &&
                            part.size() < 7,
                        "grid '" + std::string(value) + "': expected NPxNQ");
        return std::stoi(std::string(part));
    };
    detail::require(x != std::string_view::npos, "grid '" + std::string(value) + "': expected NPxNQ");
    return {parse_int(value.substr(0, x)), parse_int(value.substr(x + 1))};
}

} // namespace sqcmaser
