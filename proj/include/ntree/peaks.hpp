#pragma once

#include <cstdint>
#include <cstddef>
#include <algorithm>
#include <vector>

#include "ntree/errors.hpp"

namespace ntree {

// Which measurement record a scan is asking about.
enum class Observable { FEdge, Path };

struct PeakResult {
    std::int64_t step = 0;
    double value = 0.0;
};

namespace detail {

inline constexpr double kPeakNoiseFloor = 1e-9;

// First schedule peak of a probability trace: the earliest strict local
// maximum (1e-9 plateau tolerance) after the trace first clears a prominence
// gate halfway between the initial value and the window maximum. The gate
// suppresses the tiny transient bumps the marked reflection produces in the
// first few steps. Returns false when the trace never rises above its
// initial value (dead tree).
inline bool schedule_peak(const std::vector<double>& vals, PeakResult& out) {
    if (vals.size() < 2) return false;
    const double v0 = vals.front();
    double gmax = v0;
    for (double v : vals) gmax = std::max(gmax, v);
    if (gmax <= v0 + kPeakNoiseFloor) return false;
    const double gate = v0 + 0.5 * (gmax - v0);
    for (std::size_t i = 1; i + 1 < vals.size(); ++i) {
        if (vals[i] < gate) continue;
        if (vals[i] > vals[i - 1] - kPeakNoiseFloor &&
            vals[i] > vals[i + 1] + kPeakNoiseFloor) {
            std::size_t j = i;  // report the first step of a plateau
            while (j > 1 && vals[j - 1] > vals[i] - kPeakNoiseFloor) --j;
            out = {static_cast<std::int64_t>(j), vals[j]};
            return true;
        }
    }
    // rose but never turned within the window: report the window max
    std::size_t arg = 0;
    for (std::size_t i = 1; i < vals.size(); ++i)
        if (vals[i] > vals[arg]) arg = i;
    out = {static_cast<std::int64_t>(arg), vals[arg]};
    return true;
}

// Peak-table value of a trace: the maximum over the first probability cycle,
// bounded by twice the path schedule peak. The F-edge observable rides fast
// ripples on its slow oscillation, so a local-max rule is meaningless there;
// the first-cycle maximum is what a peak table reports.
inline bool cycle_max(const std::vector<double>& vals, std::int64_t path_peak_step,
                      PeakResult& out) {
    if (vals.size() < 2) return false;
    const double v0 = vals.front();
    std::size_t hi = std::min(vals.size(),
                              static_cast<std::size_t>(2 * path_peak_step + 3));
    std::size_t arg = 0;
    for (std::size_t i = 1; i < hi; ++i)
        if (vals[i] > vals[arg]) arg = i;
    if (vals[arg] <= v0 + kPeakNoiseFloor) return false;
    out = {static_cast<std::int64_t>(arg), vals[arg]};
    return true;
}

}  // namespace detail

// One row of a probability trace.
struct TracePoint {
    std::int64_t step;
    double f_prob;
    double path_prob;
};

// Locate the first peak of an observable given precomputed traces.
//
// Path: the schedule peak (first gated strict local maximum) — the step a
// solver would schedule, the ground truth for U(N,M).
// FEdge: the first-cycle maximum, windowed by the path schedule peak — the
// ground truth for U_F(N,M) and the per-trial success probability.
inline PeakResult find_first_peak_in_trace(const std::vector<TracePoint>& trace,
                                           Observable obs) {
    std::vector<double> path(trace.size()), fe(trace.size());
    for (std::size_t i = 0; i < trace.size(); ++i) {
        path[i] = trace[i].path_prob;
        fe[i] = trace[i].f_prob;
    }
    PeakResult p;
    if (!detail::schedule_peak(path, p)) {
        if (obs == Observable::Path)
            throw NoPeakFound("path probability has no peak in the window");
        // a dead tree is constant in every observable
        PeakResult f;
        if (!detail::cycle_max(fe, static_cast<std::int64_t>(trace.size()), f))
            throw NoPeakFound("observable has no peak in the window");
        return f;
    }
    if (obs == Observable::Path) return p;
    PeakResult f;
    if (!detail::cycle_max(fe, p.step, f))
        throw NoPeakFound("F-edge probability has no peak in the window");
    return f;
}

// Peak-table entries for both observables: the maxima over the first
// probability cycle. The table value can sit a few steps past the schedule
// peak when ripples put the first local maximum slightly before the crest
// of the underlying sinusoid.
struct PeakTable {
    PeakResult path;
    PeakResult f_edge;
};

inline PeakTable first_cycle_peaks(const std::vector<TracePoint>& trace) {
    std::vector<double> path(trace.size()), fe(trace.size());
    for (std::size_t i = 0; i < trace.size(); ++i) {
        path[i] = trace[i].path_prob;
        fe[i] = trace[i].f_prob;
    }
    PeakResult sched;
    if (!detail::schedule_peak(path, sched))
        throw NoPeakFound("path probability has no peak in the window");
    PeakTable table;
    if (!detail::cycle_max(path, sched.step, table.path) ||
        !detail::cycle_max(fe, sched.step, table.f_edge))
        throw NoPeakFound("observable has no peak in the window");
    return table;
}

}  // namespace ntree
