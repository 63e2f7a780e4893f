#pragma once

#include <algorithm>
#include <atomic>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "ntree/analytics.hpp"
#include "ntree/io.hpp"
#include "ntree/reduced.hpp"
#include "ntree/search.hpp"
#include "ntree/walk.hpp"

namespace ntree {

// Default step-schedule constants, produced by this project's own fit
// pipeline over the 2..15 x 1..15 eigenangle grid. Regenerate at any time
// with the `fit` command; the unit suite checks the live fit against these.
inline StepModel default_step_model() {
    StepModel m;
    m.alpha = 48.166309;
    m.beta = -0.562676;
    m.rho = 0.075668;
    m.gamma = -0.496304;
    m.max_branching = 15;
    m.max_depth = 15;
    return m;
}

namespace detail {

template <typename Fn>
void parallel_grid(std::size_t total, int threads, Fn&& fn) {
    threads = std::max(1, threads);
    if (threads == 1) {
        for (std::size_t i = 0; i < total; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < total; i = next++) fn(i);
        });
    for (auto& th : pool) th.join();
}

inline std::int64_t draw_f_leaf(const RunConfig& cfg, const TreeMaze& probe) {
    if (cfg.f_leaf >= 0) {
        if (cfg.f_leaf >= probe.leaf_count())
            throw ConfigError("f_leaf out of range for this maze");
        return cfg.f_leaf;
    }
    RandomStream rng(cfg.seed, 0xf1ea5ULL);
    return static_cast<std::int64_t>(
        rng.below(static_cast<std::uint64_t>(probe.leaf_count())));
}

inline void validate_size(int n, int m) {
    if (n < 2) throw ConfigError("--n must be >= 2");
    if (m < 1) throw ConfigError("--m must be >= 1");
}

}  // namespace detail

// (step, f_prob, path_prob) rows from the uniform state of the full maze.
inline std::string cmd_trace(const RunConfig& cfg) {
    detail::validate_size(cfg.n, cfg.m);
    const StepModel model = default_step_model();
    const std::int64_t steps =
        cfg.steps > 0 ? cfg.steps : 4 * model.u_steps(cfg.n, cfg.m);
    TreeMaze probe(cfg.n, cfg.m, 0);
    const std::int64_t f = detail::draw_f_leaf(cfg, probe);
    TreeMaze maze(cfg.n, cfg.m, f);
    ReducedBasis basis(maze);
    ReducedOperator op(cfg.n, cfg.m);
    const auto rows = op.trace(basis.initial_state(), steps);
    Table table({"step", "f_prob", "path_prob"});
    for (const auto& r : rows) table.add_row({r.step, r.f_prob, r.path_prob});
    return table.render(cfg.format.empty() ? "csv" : cfg.format);
}

// First-peak step and probability of both observables over an (N, M) grid.
inline std::string cmd_peaks(const RunConfig& cfg) {
    const Range nr = cfg.n_range.set() ? cfg.n_range : Range{cfg.n, cfg.n};
    const Range mr = cfg.m_range.set() ? cfg.m_range : Range{cfg.m, cfg.m};
    detail::validate_size(nr.lo, mr.lo);
    const StepModel model = default_step_model();
    struct Row {
        int n, m;
        PeakResult path, f;
    };
    std::vector<Row> rows;
    for (int n = nr.lo; n <= nr.hi; ++n)
        for (int m = mr.lo; m <= mr.hi; ++m) rows.push_back({n, m, {}, {}});
    detail::parallel_grid(rows.size(), cfg.threads, [&](std::size_t i) {
        Row& r = rows[i];
        ReducedOperator op(r.n, r.m);
        TreeMaze probe(r.n, r.m, 0);
        const Eigen::VectorXd r0 = ReducedBasis(probe).initial_state();
        const std::int64_t window = 4 * model.u_steps(r.n, r.m) + 25;
        const PeakTable table = first_cycle_peaks(op.trace(r0, window));
        r.path = table.path;
        r.f = table.f_edge;
    });
    Table table({"n", "m", "path_peak_step", "path_peak_prob", "f_peak_step",
                  "f_peak_prob"});
    for (const auto& r : rows)
        table.add_row({std::int64_t{r.n}, std::int64_t{r.m}, r.path.step,
                       r.path.value, r.f.step, r.f.value});
    return table.render(cfg.format.empty() ? "csv" : cfg.format);
}

namespace detail {

inline void require_json_report(const RunConfig& cfg, const char* command) {
    if (!cfg.format.empty() && cfg.format != "json")
        throw ConfigError(std::string(command) + " emits a JSON report; use --format json");
}

}  // namespace detail

// Eigenangle report of one (N, M) system.
inline std::string cmd_eigen(const RunConfig& cfg) {
    detail::require_json_report(cfg, "eigen");
    detail::validate_size(cfg.n, cfg.m);
    TreeMaze probe(cfg.n, cfg.m, 0);
    auto [basis, op] = build_reduced(probe);
    const EigenSystem es = eigensystem(op, basis.initial_state());
    nlohmann::json j{{"schema_version", kSchemaVersion},
                     {"n", cfg.n},
                     {"m", cfg.m},
                     {"d", basis.class_count()},
                     {"theta_lambda_degrees", es.theta_lambda * 180.0 / M_PI},
                     {"beta_abs", es.beta_abs()},
                     {"truncation_mass", es.truncation_mass()}};
    return j.dump(2) + "\n";
}

// Eigenangles over a grid, then the two-stage power-law fit.
inline std::string cmd_fit(const RunConfig& cfg) {
    detail::require_json_report(cfg, "fit");
    const Range nr = cfg.n_range.set() ? cfg.n_range : Range{2, 15};
    const Range mr = cfg.m_range.set() ? cfg.m_range : Range{1, 15};
    detail::validate_size(nr.lo, mr.lo);
    std::vector<AngleSample> samples;
    for (int n = nr.lo; n <= nr.hi; ++n)
        for (int m = mr.lo; m <= mr.hi; ++m) samples.push_back({n, m, 0.0});
    detail::parallel_grid(samples.size(), cfg.threads, [&](std::size_t i) {
        auto& s = samples[i];
        TreeMaze probe(s.branching, s.depth, 0);
        auto [basis, op] = build_reduced(probe);
        const EigenSystem es = eigensystem(op, basis.initial_state());
        s.theta_degrees = es.theta_lambda * 180.0 / M_PI;
    });
    const FitReport report = fit_step_model(samples);
    nlohmann::json residuals = nlohmann::json::array();
    for (const auto& r : report.residuals)
        residuals.push_back({{"n", r.branching},
                             {"m", r.depth},
                             {"theta_degrees", r.theta_degrees},
                             {"fitted_degrees", r.fitted_degrees},
                             {"rel_error", r.rel_error}});
    nlohmann::json j{{"schema_version", kSchemaVersion},
                     {"alpha", report.model.alpha},
                     {"beta", report.model.beta},
                     {"rho", report.model.rho},
                     {"gamma", report.model.gamma},
                     {"grid",
                      {{"n_min", nr.lo},
                       {"n_max", nr.hi},
                       {"m_min", mr.lo},
                       {"m_max", mr.hi}}},
                     {"max_rel_residual", report.max_rel_residual},
                     {"residuals", residuals}};
    return j.dump(2) + "\n";
}

// Three-algorithm speed comparison at one (N, M).
inline std::string cmd_bench(const RunConfig& cfg) {
    detail::validate_size(cfg.n, cfg.m);
    BenchConfig bc;
    bc.branching = cfg.n;
    bc.depth = cfg.m;
    bc.runs = cfg.runs;
    bc.seed = cfg.seed;
    bc.threads = cfg.threads;
    if (!cfg.algorithms.empty()) {
        bc.algorithms.clear();
        for (const auto& name : cfg.algorithms) {
            if (name == "classical")
                bc.algorithms.push_back(Algorithm::Classical);
            else if (name == "direct-f")
                bc.algorithms.push_back(Algorithm::DirectF);
            else if (name == "movement")
                bc.algorithms.push_back(Algorithm::Movement);
            else
                throw ConfigError("unknown algorithm: " + name);
        }
    }
    const SpeedReport report = run_benchmark(bc, default_step_model());
    Table table({"n", "m", "algorithm", "runs", "mean_speed", "ci95", "mean_trials",
                  "reset_count"});
    // canonical ordering: by algorithm name
    std::vector<AlgorithmStats> stats = report.algorithms;
    std::sort(stats.begin(), stats.end(), [](const auto& a, const auto& b) {
        return std::string(algorithm_name(a.algorithm)) < algorithm_name(b.algorithm);
    });
    for (const auto& s : stats)
        table.add_row({std::int64_t{cfg.n}, std::int64_t{cfg.m},
                       std::string(algorithm_name(s.algorithm)), s.runs,
                       s.mean_speed, s.ci95, s.mean_trials, s.mean_resets});
    return table.render(cfg.format.empty() ? "csv" : cfg.format);
}

// Trial-count table: exact vs closed-form success probabilities.
inline std::string cmd_analytics(const RunConfig& cfg) {
    const Range mr = cfg.m_range.set() ? cfg.m_range : Range{cfg.m, cfg.m};
    if (mr.lo < 1) throw ConfigError("--m must be >= 1");
    static constexpr double kPs[] = {0.8, 0.9, 0.95, 1.0};
    Table table({"m", "p", "y", "p_succ_exact", "p_succ_closed"});
    for (int m = mr.lo; m <= mr.hi; ++m) {
        for (double p : kPs) {
            TrialModel model(m, p);
            for (int y = 1; y <= 8; ++y)
                table.add_row({std::int64_t{m}, p, std::int64_t{y},
                               model.p_succ(y, TrialModel::Mode::ExactSum),
                               model.p_succ(y, TrialModel::Mode::ClosedForm)});
        }
    }
    return table.render(cfg.format.empty() ? "csv" : cfg.format);
}

// Dispatch; returns the report text that was also written to cfg.out.
inline std::string run_command(const RunConfig& cfg) {
    std::string output;
    if (cfg.command == "trace")
        output = cmd_trace(cfg);
    else if (cfg.command == "peaks")
        output = cmd_peaks(cfg);
    else if (cfg.command == "eigen")
        output = cmd_eigen(cfg);
    else if (cfg.command == "fit")
        output = cmd_fit(cfg);
    else if (cfg.command == "bench")
        output = cmd_bench(cfg);
    else if (cfg.command == "analytics")
        output = cmd_analytics(cfg);
    else
        throw ConfigError("unknown command: '" + cfg.command + "'");
    write_text(cfg.out, output);
    return output;
}

}  // namespace ntree
