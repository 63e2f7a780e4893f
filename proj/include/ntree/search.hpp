#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "ntree/analytics.hpp"
#include "ntree/errors.hpp"
#include "ntree/maze.hpp"
#include "ntree/reduced.hpp"
#include "ntree/rng.hpp"

namespace ntree {

struct MeasurementRecord {
    int live_depth;
    Edge edge;
    bool on_path;
    std::optional<int> coordinate;
};

struct SearchTrace {
    std::int64_t total_steps = 0;  // unitary steps (quantum) or corridor steps
    std::int64_t trials = 0;       // prepare-and-measure cycles / doors checked
    std::vector<MeasurementRecord> measurements;
    bool found = false;
    std::int64_t resets = 0;  // returns to the full maze
};

// --- classical depth-first search ---------------------------------------

// Fixed-order depth-first walker. Each previously unexplored corridor costs
// one step; returning along corridors already mapped is free. For the leaf
// with digits d_1..d_M this gives (M+1) + sum_k d_k * (N^(M-k+1)-1)/(N-1)
// steps: minimum M+1, maximum exactly E, mean (E+M+1)/2.
inline SearchTrace classical_dfs(const TreeMaze& maze) {
    const int n = maze.branching();
    const int m = maze.depth();
    std::vector<int> digits(static_cast<std::size_t>(m), 0);
    std::int64_t rest = maze.f_leaf();
    for (int k = m - 1; k >= 0; --k) {
        digits[static_cast<std::size_t>(k)] = static_cast<int>(rest % n);
        rest /= n;
    }
    std::int64_t steps = m + 1;
    std::int64_t branch_edges = 1;  // edges of a branch hanging at level M
    std::vector<std::int64_t> branch(static_cast<std::size_t>(m) + 1, 0);
    for (int k = m; k >= 1; --k) {
        branch[static_cast<std::size_t>(k)] = branch_edges;
        branch_edges = branch_edges * n + 1;
    }
    for (int k = 1; k <= m; ++k)
        steps += digits[static_cast<std::size_t>(k - 1)] * branch[static_cast<std::size_t>(k)];
    SearchTrace trace;
    trace.total_steps = steps;
    trace.trials = maze.f_leaf() + 1;  // final nodes checked in DFS order
    trace.found = true;
    return trace;
}

// Random F placement for one run, then the deterministic walker.
inline SearchTrace classical_dfs(const TreeMaze& maze, RandomStream& rng) {
    const std::int64_t f = static_cast<std::int64_t>(
        rng.below(static_cast<std::uint64_t>(maze.leaf_count())));
    return classical_dfs(TreeMaze(maze.branching(), maze.depth(), f));
}

// --- direct search for F -------------------------------------------------

// Prepare-and-probe: each trial costs f_schedule unitary steps and succeeds
// with probability p_f (geometric trials, expectation 1/p_f).
inline SearchTrace direct_f_search(const TreeMaze&, std::int64_t f_schedule,
                                   double p_f, RandomStream& rng,
                                   std::int64_t cap = 1'000'000'000) {
    if (f_schedule < 1) throw InvalidParameters("f_schedule must be >= 1");
    if (!(p_f > 0.0) || p_f > 1.0) throw InvalidParameters("p_f must be in (0, 1]");
    SearchTrace trace;
    while (true) {
        if (trace.total_steps + f_schedule > cap) return trace;  // unfound
        trace.total_steps += f_schedule;
        ++trace.trials;
        if (rng.uniform01() < p_f) {
            trace.found = true;
            trace.resets = trace.trials - 1;
            return trace;
        }
    }
}

// --- movement search ------------------------------------------------------

// Precomputed per-depth machinery for movement runs: the scheduled step
// counts and the measurement distribution of the live (marked) maze at that
// schedule, over effective-edge state cells. Exact by symmetry; lets M = 15
// benchmarks run without ever touching the full state space.
class MovementTables {
public:
    MovementTables(int branching, int max_depth, const StepModel& model)
        : n_(branching) {
        steps_.resize(static_cast<std::size_t>(max_depth) + 1, 0);
        live_cdf_.resize(static_cast<std::size_t>(max_depth) + 1);
        cells_.resize(static_cast<std::size_t>(max_depth) + 1);
        for (int m = 1; m <= max_depth; ++m) {
            steps_[static_cast<std::size_t>(m)] = model.u_steps(branching, m);
            ReducedOperator op(branching, m);
            TreeMaze probe(branching, m, 0);
            ReducedBasis basis(probe);
            Eigen::VectorXd r = basis.initial_state();
            op.evolve(r, steps_[static_cast<std::size_t>(m)]);
            auto& cdf = live_cdf_[static_cast<std::size_t>(m)];
            auto& cells = cells_[static_cast<std::size_t>(m)];
            cdf.reserve(static_cast<std::size_t>(op.dim()));
            cells.reserve(static_cast<std::size_t>(op.dim()));
            double acc = 0.0;
            for (int c = 0; c < op.class_count(); ++c) {
                for (int dir = 0; dir < 2; ++dir) {
                    acc += r[2 * c + dir] * r[2 * c + dir];
                    cdf.push_back(acc);
                    cells.push_back({basis.class_at(c), dir == 1});
                }
            }
            for (double& v : cdf) v /= acc;  // guard rounding drift
        }
    }

    int branching() const { return n_; }
    std::int64_t schedule(int live_depth) const {
        return steps_[static_cast<std::size_t>(live_depth)];
    }

    struct CellSample {
        EffectiveEdge cell;
        bool up;
    };

    // Draw a measurement outcome class for a live maze of the given depth.
    CellSample sample_live(int live_depth, RandomStream& rng) const {
        const auto& cdf = live_cdf_[static_cast<std::size_t>(live_depth)];
        const double u = rng.uniform01();
        std::size_t lo = 0, hi = cdf.size() - 1;
        while (lo < hi) {
            const std::size_t mid = (lo + hi) / 2;
            if (u < cdf[mid])
                hi = mid;
            else
                lo = mid + 1;
        }
        return cells_[static_cast<std::size_t>(live_depth)][lo];
    }

    // Per-edge-class probabilities (both directions summed), for analysis.
    std::vector<double> class_probabilities(int live_depth) const {
        const auto& cdf = live_cdf_[static_cast<std::size_t>(live_depth)];
        std::vector<double> out(cdf.size() / 2);
        double prev = 0.0;
        for (std::size_t c = 0; c < out.size(); ++c) {
            out[c] = cdf[2 * c + 1] - prev;
            prev = cdf[2 * c + 1];
        }
        return out;
    }

private:
    int n_;
    std::vector<std::int64_t> steps_;
    std::vector<std::vector<double>> live_cdf_;
    std::vector<std::vector<CellSample>> cells_;
};

namespace detail {

// Concrete live edge for a sampled effective-edge class: the on-path edge at
// that depth, or a uniformly drawn member of the off-path orbit.
inline Edge concretize_cell(const TreeMaze& maze, const EffectiveEdge& cell,
                            RandomStream& rng) {
    const int top_level = maze.level_of(maze.live_top());
    if (cell.on_path())
        return Edge{maze.ancestor_at(maze.f_node(), top_level + cell.depth - 1)};
    const NodeId branch = maze.ancestor_at(maze.f_node(), top_level + cell.prefix - 1);
    const NodeId path_child = maze.ancestor_at(maze.f_node(), top_level + cell.prefix);
    const int path_slot = static_cast<int>(path_child - maze.child(branch, 0));
    int slot = static_cast<int>(rng.below(static_cast<std::uint64_t>(maze.branching() - 1)));
    if (slot >= path_slot) ++slot;
    NodeId node = maze.child(branch, slot);
    for (int l = cell.prefix + 1; l < cell.depth; ++l)
        node = maze.child(node, static_cast<int>(rng.below(
                                    static_cast<std::uint64_t>(maze.branching()))));
    return Edge{node};
}

// Uniform directed-state measurement of a dead maze (the walk leaves the
// uniform state invariant there, so no evolution is simulated).
inline Edge sample_dead_edge(const TreeMaze& maze, RandomStream& rng) {
    const std::int64_t edges = maze.live_edge_count();
    std::int64_t pick = static_cast<std::int64_t>(
        rng.below(static_cast<std::uint64_t>(edges)));
    NodeId lo = maze.live_top();
    std::int64_t width = 1;
    while (pick >= width) {
        pick -= width;
        lo = maze.child(lo, 0);
        width *= maze.branching();
    }
    return Edge{lo + pick};
}

}  // namespace detail

// The movement algorithm: prepare the live maze for its scheduled path-peak
// step count, measure, then move (freeze), re-prepare, reset on a wrong
// final node, or stop on F. Runs on the reduced measurement distribution,
// which is exact by symmetry; dead trees measure uniformly.
inline SearchTrace movement_search(const TreeMaze& maze, const MovementTables& tables,
                                   RandomStream& rng,
                                   std::int64_t cap = 1'000'000'000) {
    if (!maze.f_live())
        throw InvalidParameters("movement search starts from a maze containing F");
    SearchTrace trace;
    TreeMaze cur = maze;
    while (true) {
        const int m = cur.live_depth();
        const std::int64_t prep = tables.schedule(m);
        if (trace.total_steps + prep > cap) return trace;  // unfound
        trace.total_steps += prep;
        ++trace.trials;

        Edge measured;
        if (cur.f_live()) {
            const auto cell = tables.sample_live(m, rng);
            measured = detail::concretize_cell(cur, cell.cell, rng);
        } else {
            measured = detail::sample_dead_edge(cur, rng);
        }
        const bool on_path = cur.f_live() && cur.on_live_path(measured);
        trace.measurements.push_back(
            {m, measured, on_path, cur.path_coordinate(measured)});

        if (cur.f_live() && measured.child == cur.f_node()) {
            trace.found = true;
            return trace;
        }
        if (cur.is_leaf(measured.child)) {
            // wrong final node: start over from the full maze
            cur = maze.reset();
            ++trace.resets;
            continue;
        }
        if (measured.child == cur.live_top()) continue;  // re-prepare in place
        cur = cur.freeze_below(measured);
    }
}

// Exact expected movement speed (mean total steps / schedule of the full
// maze), from the same measurement distributions the sampler uses. The
// expectation over live depths m and dead depths k solves linearly because
// every reset returns to the full maze.
inline double movement_expected_speed(int branching, int depth,
                                      const MovementTables& tables) {
    const int n = branching;
    std::vector<double> dead(static_cast<std::size_t>(depth) + 1, 0.0);
    for (int k = 1; k <= depth; ++k) {
        double edges = 0.0, width = 1.0;
        std::vector<double> edges_at(static_cast<std::size_t>(k) + 2, 0.0);
        for (int d = 1; d <= k + 1; ++d) {
            edges_at[static_cast<std::size_t>(d)] = width;
            edges += width;
            width *= n;
        }
        double acc = static_cast<double>(tables.schedule(k));
        for (int d = 2; d <= k; ++d)
            acc += edges_at[static_cast<std::size_t>(d)] / edges *
                   dead[static_cast<std::size_t>(k + 1 - d)];
        dead[static_cast<std::size_t>(k)] =
            acc / (1.0 - edges_at[1] / edges);
    }
    // live: L(m) = a_m + b_m * L(M)
    std::vector<double> a(static_cast<std::size_t>(depth) + 1, 0.0);
    std::vector<double> b(static_cast<std::size_t>(depth) + 1, 0.0);
    for (int m = 1; m <= depth; ++m) {
        const auto probs = tables.class_probabilities(m);
        double p_root = 0.0;
        double acc_a = static_cast<double>(tables.schedule(m));
        double acc_b = 0.0;
        for (int d = 1; d <= m + 1; ++d) {
            for (int l = 1; l <= d; ++l) {
                const double p =
                    probs[static_cast<std::size_t>(ReducedBasis::class_index_of(d, l))];
                if (d == m + 1 && l == d) continue;  // found, no further cost
                if (d == 1) {
                    p_root += p;
                } else if (d == m + 1) {
                    acc_b += p;  // wrong final node: reset
                } else if (l == d) {
                    acc_a += p * a[static_cast<std::size_t>(m + 1 - d)];
                    acc_b += p * b[static_cast<std::size_t>(m + 1 - d)];
                } else {
                    acc_a += p * dead[static_cast<std::size_t>(m + 1 - d)];
                    acc_b += p;
                }
            }
        }
        a[static_cast<std::size_t>(m)] = acc_a / (1.0 - p_root);
        b[static_cast<std::size_t>(m)] = acc_b / (1.0 - p_root);
    }
    const double total = a[static_cast<std::size_t>(depth)] /
                         (1.0 - b[static_cast<std::size_t>(depth)]);
    return total / static_cast<double>(tables.schedule(depth));
}

// --- benchmark harness ----------------------------------------------------

enum class Algorithm { Classical, DirectF, Movement };

inline const char* algorithm_name(Algorithm a) {
    switch (a) {
        case Algorithm::Classical: return "classical";
        case Algorithm::DirectF: return "direct-f";
        case Algorithm::Movement: return "movement";
    }
    return "?";
}

struct BenchConfig {
    int branching = 2;
    int depth = 4;
    std::int64_t runs = 1000;
    std::uint64_t seed = 1;
    std::vector<Algorithm> algorithms = {Algorithm::Classical, Algorithm::DirectF,
                                         Algorithm::Movement};
    int threads = 1;
    std::int64_t cap = 1'000'000'000;
};

struct AlgorithmStats {
    Algorithm algorithm;
    std::int64_t runs = 0;
    double mean_speed = 0.0;
    double ci95 = 0.0;  // 95% confidence half-width
    double mean_trials = 0.0;
    double mean_resets = 0.0;
    std::int64_t unfound = 0;
    std::int64_t schedule_steps = 0;  // the denominator of this speed
};

// Average speeds per the step-count metric: each speed is mean total steps
// divided by the steps of one full-maze preparation for that algorithm
// (path-peak schedule for classical and movement, F-peak schedule for the
// direct search), so the quantum minimum is exactly 1.
struct SpeedReport {
    int branching = 0;
    int depth = 0;
    std::int64_t u_path = 0;   // scanned path-peak step of the full maze
    std::int64_t u_f = 0;      // scanned F-peak step (first cycle)
    double p_f = 0.0;          // F-edge probability at u_f
    std::vector<AlgorithmStats> algorithms;

    const AlgorithmStats* stats(Algorithm a) const {
        for (const auto& s : algorithms)
            if (s.algorithm == a) return &s;
        return nullptr;
    }
    // classical over direct-F, the headline comparison
    double speedup() const {
        const auto* c = stats(Algorithm::Classical);
        const auto* d = stats(Algorithm::DirectF);
        if (!c || !d || d->mean_speed == 0.0) return 0.0;
        return c->mean_speed / d->mean_speed;
    }
};

namespace detail {

template <typename Fn>
void parallel_runs(std::int64_t runs, int threads, Fn&& per_run) {
    threads = std::max(1, threads);
    if (threads == 1) {
        for (std::int64_t i = 0; i < runs; ++i) per_run(i);
        return;
    }
    std::vector<std::thread> pool;
    const std::int64_t chunk = (runs + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
        const std::int64_t lo = t * chunk;
        const std::int64_t hi = std::min(runs, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&per_run, lo, hi] {
            for (std::int64_t i = lo; i < hi; ++i) per_run(i);
        });
    }
    for (auto& th : pool) th.join();
}

struct RunOutcome {
    double speed;
    double trials;
    double resets;
    bool found;
};

inline AlgorithmStats reduce_outcomes(Algorithm alg, const std::vector<RunOutcome>& runs,
                                      std::int64_t denom) {
    AlgorithmStats s;
    s.algorithm = alg;
    s.runs = static_cast<std::int64_t>(runs.size());
    s.schedule_steps = denom;
    double sum = 0, sum2 = 0, trials = 0, resets = 0;
    for (const auto& r : runs) {
        sum += r.speed;
        sum2 += r.speed * r.speed;
        trials += r.trials;
        resets += r.resets;
        if (!r.found) ++s.unfound;
    }
    const double n = static_cast<double>(runs.size());
    s.mean_speed = sum / n;
    const double var = std::max(0.0, sum2 / n - s.mean_speed * s.mean_speed);
    s.ci95 = 1.96 * std::sqrt(var / n);
    s.mean_trials = trials / n;
    s.mean_resets = resets / n;
    return s;
}

}  // namespace detail

// Monte Carlo comparison of the three search strategies. Each run draws its
// own F placement from a stream derived from (seed, run index), so the
// aggregate is identical for any thread count.
inline SpeedReport run_benchmark(const BenchConfig& config, const StepModel& model) {
    if (config.runs < 1) throw ConfigError("runs must be >= 1");
    SpeedReport report;
    report.branching = config.branching;
    report.depth = config.depth;

    const std::int64_t window = 4 * model.u_steps(config.branching, config.depth) + 25;
    ReducedOperator op(config.branching, config.depth);
    TreeMaze probe(config.branching, config.depth, 0);
    ReducedBasis basis(probe);
    const Eigen::VectorXd r0 = basis.initial_state();
    const PeakResult path_peak = op.find_first_peak(r0, Observable::Path, window);
    const PeakResult f_peak = op.find_first_peak(r0, Observable::FEdge, window);
    report.u_path = path_peak.step;
    report.u_f = f_peak.step;
    report.p_f = f_peak.value;

    const MovementTables tables(config.branching, config.depth, model);

    for (Algorithm alg : config.algorithms) {
        std::vector<detail::RunOutcome> outcomes(
            static_cast<std::size_t>(config.runs));
        const std::uint64_t stream_base =
            config.seed ^ (0x41c64e6dULL * (static_cast<std::uint64_t>(alg) + 1));
        std::int64_t denom = report.u_path;
        switch (alg) {
            case Algorithm::Classical: {
                detail::parallel_runs(config.runs, config.threads, [&](std::int64_t i) {
                    RandomStream rng(stream_base, static_cast<std::uint64_t>(i));
                    const SearchTrace t = classical_dfs(probe, rng);
                    outcomes[static_cast<std::size_t>(i)] = {
                        double(t.total_steps) / double(report.u_path),
                        double(t.trials), double(t.resets), t.found};
                });
                denom = report.u_path;
                break;
            }
            case Algorithm::DirectF: {
                detail::parallel_runs(config.runs, config.threads, [&](std::int64_t i) {
                    RandomStream rng(stream_base, static_cast<std::uint64_t>(i));
                    const SearchTrace t = direct_f_search(probe, report.u_f, report.p_f,
                                                          rng, config.cap);
                    outcomes[static_cast<std::size_t>(i)] = {
                        double(t.total_steps) / double(report.u_f), double(t.trials),
                        double(t.resets), t.found};
                });
                denom = report.u_f;
                break;
            }
            case Algorithm::Movement: {
                const std::int64_t full_prep = tables.schedule(config.depth);
                detail::parallel_runs(config.runs, config.threads, [&](std::int64_t i) {
                    RandomStream rng(stream_base, static_cast<std::uint64_t>(i));
                    const std::int64_t f = static_cast<std::int64_t>(
                        rng.below(static_cast<std::uint64_t>(probe.leaf_count())));
                    const TreeMaze maze(config.branching, config.depth, f);
                    const SearchTrace t = movement_search(maze, tables, rng, config.cap);
                    outcomes[static_cast<std::size_t>(i)] = {
                        double(t.total_steps) / double(full_prep), double(t.trials),
                        double(t.resets), t.found};
                });
                denom = full_prep;
                break;
            }
        }
        report.algorithms.push_back(detail::reduce_outcomes(alg, outcomes, denom));
    }
    return report;
}

}  // namespace ntree
