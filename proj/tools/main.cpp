#include "tsgame/suites.hpp"

#include "CLI11.hpp"

#include <cmath>
#include <iostream>

namespace {

enum Exit { Ok = 0, BadConfig = 1, Aborted = 2, CheckFailed = 3 };

int finish(const tsgame::ExperimentConfig& cfg, const tsgame::SuiteResult& r) {
    std::cout << "suite " << tsgame::to_string(cfg.suite) << " -> " << cfg.out.string() << " (" << r.files.size()
              << " files, " << r.aborted << " aborted paths";
    if (cfg.suite == tsgame::Suite::Validate) std::cout << ", " << r.failed_checks << " failed checks";
    std::cout << ")\n";
    if (r.failed_checks > 0) return CheckFailed;
    if (r.strict && r.aborted > 0) return Aborted;
    return Ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"tsgame: posterior-sampling control experiments on linear-quadratic games"};
    app.require_subcommand(1);

    std::string config_path, suite_name, out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> paths;
    std::optional<double> horizon;
    std::size_t threads = 1;

    auto* run = app.add_subcommand("run", "run an experiment suite");
    run->add_option("config", config_path, "INI config file")->required();
    run->add_option("--seed", seed, "base seed for the simulation streams");
    run->add_option("--paths", paths, "number of Monte Carlo paths");
    run->add_option("--horizon", horizon, "horizon T; steps = T / dt");
    run->add_option("--out", out_dir, "output directory");
    run->add_option("--suite", suite_name, "override the suite named in the file");
    run->add_option("--threads", threads, "worker threads over paths")->check(CLI::PositiveNumber);

    std::string validate_path, validate_out;
    auto* validate = app.add_subcommand("validate", "run the analytic/oracle check battery");
    validate->add_option("config", validate_path, "INI config file")->required();
    validate->add_option("--out", validate_out, "output directory");

    std::string csv_path, svg_path, title;
    auto* plot = app.add_subcommand("plot", "render a CSV produced by run as an SVG line plot");
    plot->add_option("csv", csv_path, "input CSV")->required();
    plot->add_option("--out", svg_path, "output SVG")->required();
    plot->add_option("--title", title, "plot title");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*plot) {
            const auto table = tsgame::read_csv(csv_path);
            tsgame::emit_svg(svg_path, tsgame::plot_from_table(table, title.empty() ? csv_path : title));
            return Ok;
        }

        tsgame::ExperimentConfig cfg;
        try {
            if (*validate) {
                cfg = tsgame::load_config(validate_path, tsgame::Suite::Validate);
                if (!validate_out.empty()) cfg.out = validate_out;
            } else {
                std::optional<tsgame::Suite> suite;
                if (!suite_name.empty()) suite = tsgame::parse_suite(suite_name);
                cfg = tsgame::load_config(config_path, suite);
                if (seed) cfg.sim.seed = *seed;
                if (paths) {
                    cfg.sim.paths = *paths;
                    if (cfg.suite == tsgame::Suite::RegretBaseline) cfg.sweep.path_counts = {*paths};
                }
                if (horizon) {
                    const double steps = *horizon / cfg.sim.dt;
                    if (!(steps >= 1) || std::abs(steps - std::round(steps)) > 1e-6 * steps) {
                        throw tsgame::ConfigError("--horizon must be a positive multiple of dt");
                    }
                    cfg.sim.steps = static_cast<std::size_t>(std::llround(steps));
                }
                if (!out_dir.empty()) cfg.out = out_dir;
                cfg.threads = threads;
                const auto problems = tsgame::check_config(cfg);
                if (!problems.empty()) {
                    std::string msg = "invalid configuration after overrides";
                    for (const auto& p : problems) msg += "\n  " + p;
                    throw tsgame::ConfigError(msg);
                }
            }
            // an instance that cannot be built (e.g. no admissible cost draw) is a config problem
            (void)tsgame::build_spec(cfg);
        } catch (const tsgame::GameError& e) {
            std::cerr << "error: " << e.what() << "\n";
            return BadConfig;
        } catch (const tsgame::ConfigError& e) {
            std::cerr << "error: " << e.what() << "\n";
            return BadConfig;
        } catch (const std::invalid_argument& e) {
            std::cerr << "error: " << e.what() << "\n";
            return BadConfig;
        }
        return finish(cfg, tsgame::run_suite(cfg));
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
}
