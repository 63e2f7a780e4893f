// Command-line front end: maze traces, peak tables, eigen reports, the
// step-schedule fit, search benchmarks, and trial-count analytics, all as
// reproducible machine-readable runs.

#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "ntree/commands.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitIo = 4;

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"scattering-walk searches on N-tree mazes"};
    app.get_formatter()->column_width(26);

    std::string command, config_path, out, format, f_leaf;
    std::string n_range, m_range;
    int n = 0, m = 0, threads = 0;
    std::int64_t runs = 0, steps = 0;
    std::uint64_t seed = 0;

    app.add_option("--command", command,
                   "one of: trace, peaks, eigen, fit, bench, analytics");
    app.add_option("--config", config_path, "RunConfig JSON file; flags override");
    app.add_option("--n", n, "branching factor N (>= 2)");
    app.add_option("--m", m, "maze depth M (>= 1)");
    app.add_option("--n-range", n_range, "grid range LO:HI for N");
    app.add_option("--m-range", m_range, "grid range LO:HI for M");
    app.add_option("--f-leaf", f_leaf, "final-node leaf index, or 'random'");
    app.add_option("--seed", seed, "64-bit run seed");
    app.add_option("--runs", runs, "benchmark runs");
    app.add_option("--steps", steps, "trace length (0 = auto)");
    app.add_option("--out", out, "output path ('-' or empty = stdout)");
    app.add_option("--format", format,
                   "csv or json (default: the command's native format)");
    app.add_option("--threads", threads, "worker threads for grids and runs");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }

    try {
        ntree::RunConfig cfg;
        if (!config_path.empty()) cfg = ntree::load_config_file(config_path);
        if (app.count("--command")) cfg.command = command;
        if (app.count("--n")) cfg.n = n;
        if (app.count("--m")) cfg.m = m;
        if (app.count("--n-range")) cfg.n_range = ntree::parse_range(n_range);
        if (app.count("--m-range")) cfg.m_range = ntree::parse_range(m_range);
        if (app.count("--f-leaf")) {
            if (f_leaf == "random")
                cfg.f_leaf = -1;
            else
                cfg.f_leaf = std::stoll(f_leaf);
        }
        if (app.count("--seed")) cfg.seed = seed;
        if (app.count("--runs")) cfg.runs = runs;
        if (app.count("--steps")) cfg.steps = steps;
        if (app.count("--out")) cfg.out = out;
        if (app.count("--format")) cfg.format = format;
        if (app.count("--threads")) cfg.threads = threads;
        if (cfg.command.empty())
            throw ntree::ConfigError("--command is required (or set it in --config)");

        ntree::run_command(cfg);
        return kExitOk;
    } catch (const ntree::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const ntree::InvalidParameters& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const ntree::NumericalFailure& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const ntree::NoPeakFound& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const ntree::IoError& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::invalid_argument& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    }
}
