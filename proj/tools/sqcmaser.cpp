// sqcmaser: batch front end. Exit codes: 0 ok, 1 bad input, 2 numerical failure.

#include "sqcmaser/config.hpp"
#include "sqcmaser/runner.hpp"

#include "CLI11.hpp"

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

namespace {

struct Args {
    std::string config;
    std::string out;
    std::string grid;
    std::optional<std::uint64_t> seed;
    int workers = 0;
    std::string cache;
    bool csv = false;
};

int run(const std::string& command, const Args& args)
{
    using namespace sqcmaser;
    RunConfig cfg = args.config.empty() ? RunConfig{} : load_config(args.config);
    RunOptions opt;
    opt.workers = args.workers;
    if (!args.out.empty()) opt.out_dir = args.out;
    if (!args.grid.empty()) opt.grid = parse_grid(args.grid);
    opt.seed = args.seed;
    if (!args.cache.empty()) opt.cache_dir = args.cache;
    apply_overrides(cfg, opt);
    cfg.validate();

    CommandResult result;
    if (command == "fig2") result = cmd_fig2(cfg, opt);
    else if (command == "fig3") result = cmd_fig3(cfg, opt);
    else if (command == "fig4") result = cmd_fig4(cfg, opt);
    else if (command == "evolve") result = cmd_evolve(cfg, opt);
    else if (command == "estimate-device") result = cmd_estimate_device(cfg, args.csv, opt);
    else if (command == "sweep") result = cmd_sweep(cfg, opt);

    std::cout << result.summary;
    for (const auto& f : result.files) std::cout << "wrote " << f.string() << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Spectrum, transition and micromaser statistics for a SQUID-tunable flux qutrit"};
    app.require_subcommand(1, 1);
    app.set_version_flag("--version", std::string(sqcmaser::tool_version));

    Args args;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", args.config, "JSON config (comments allowed; unknown keys rejected)")
            ->check(CLI::ExistingFile);
        sub->add_option("--out", args.out, "output directory (overrides output.directory)");
        sub->add_option("--workers", args.workers, "worker threads (default: $SQCMASER_WORKERS or all cores)")
            ->check(CLI::NonNegativeNumber);
        sub->add_option("--grid", args.grid, "grid override NPxNQ, e.g. 80x160");
        sub->add_option("--seed", args.seed, "eigensolver start-vector seed");
    };

    const std::pair<const char*, const char*> commands[] = {
        {"fig2", "levels and |t_ij| versus f, one CSV per f_s"},
        {"fig3", "K_01 and K_12 versus f, one CSV per f_s"},
        {"fig4", "steady-state photon statistics, regular vs Poissonian pumping"},
        {"evolve", "master-equation trajectory and comparison with the steady state"},
        {"estimate-device", "laboratory-scale device numbers"},
        {"sweep", "generic level sweep"},
    };
    for (const auto& [name, help] : commands) {
        auto* sub = app.add_subcommand(name, help);
        add_common(sub);
        if (std::string(name) == "estimate-device") {
            sub->add_flag("--csv", args.csv, "also write device.csv to the output directory");
        }
        if (std::string(name) == "sweep") {
            sub->add_option("--cache", args.cache, "directory memoizing sweep levels");
        }
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        return run(app.get_subcommands().front()->get_name(), args);
    } catch (const sqcmaser::ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const sqcmaser::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "failure: " << e.what() << '\n';
        return 2;
    }
}
