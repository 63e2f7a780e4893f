#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "ntree/errors.hpp"
#include "ntree/maze.hpp"
#include "ntree/peaks.hpp"
#include "ntree/rng.hpp"

namespace ntree {

// Local scattering rule of a degree-n vertex: transmission 2/n toward every
// other edge, reflection (n-2)/n back. Columns of the local block are unit
// vectors: (n-1) t^2 + r^2 = 1. Degree-1 end nodes reflect with a phase,
// +1 everywhere except -1 at the marked final node.
struct LocalScattering {
    int degree = 3;
    double transmission() const { return 2.0 / degree; }
    double reflection() const { return (degree - 2.0) / degree; }
};

// Real amplitude vector over the 2E' directed edge states of the live graph,
// laid out as amp[2*edge + dir]. The step operator is real in this basis, so
// no complex storage is ever needed.
struct WalkState {
    std::vector<double> amp;

    std::size_t size() const { return amp.size(); }
    double norm() const {
        double s = 0.0;
        for (double a : amp) s += a * a;
        return std::sqrt(s);
    }
};

// Full-Hilbert-space evolution of the scattering walk on the live sub-maze.
//
// Vertices scatter with transmission t = 2/n and reflection r = (n-2)/n;
// end nodes reflect with +1 except the marked final node F, which reflects
// with -1. The engine is immutable after construction and safe to share
// across threads; evolution is deterministic bit for bit.
class WalkEngine {
public:
    explicit WalkEngine(const TreeMaze& maze, bool marked = true)
        : maze_(maze), marked_(marked && maze.f_live()) {
        const int lt = maze_.level_of(maze_.live_top());
        const int lmax = maze_.depth() + 1;
        const std::int64_t top_offset =
            maze_.live_top() - level_start(lt);
        std::int64_t width = 1;
        std::size_t pos = 0;
        for (int l = lt; l <= lmax; ++l) {
            level_lo_.push_back(level_start(l) + top_offset * width);
            level_count_.push_back(width);
            level_offset_.push_back(pos);
            pos += static_cast<std::size_t>(width);
            width *= maze_.branching();
        }
        edge_count_ = pos;
        if (edge_count_ > (1u << 27))
            throw InvalidParameters("live maze too large for full-space evolution");
        f_edge_pos_ = maze_.f_live() ? pos_of(maze_.f_node()) : level_offset_.back();
    }

    const TreeMaze& maze() const { return maze_; }
    std::size_t edge_count() const { return edge_count_; }
    std::size_t state_count() const { return 2 * edge_count_; }
    bool marked() const { return marked_; }

    // Equal superposition of all live directed states.
    WalkState initial_state() const {
        WalkState s;
        s.amp.assign(state_count(), 1.0 / std::sqrt(double(state_count())));
        return s;
    }

    // One application of the step operator, out-of-place.
    void step_into(const WalkState& in, WalkState& out) const {
        check(in);
        out.amp.resize(in.amp.size());
        const double* a = in.amp.data();
        double* b = out.amp.data();
        const int n = maze_.branching();
        const double t = LocalScattering{n + 1}.transmission();
        // root end node: reflect the top edge with +1
        b[2 * 0 + 0] = a[2 * 0 + 1];
        // junction levels
        const int levels = static_cast<int>(level_lo_.size());
        for (int li = 0; li + 1 < levels; ++li) {
            const std::size_t off = level_offset_[li];
            const std::size_t coff = level_offset_[li + 1];
            const std::int64_t cnt = level_count_[li];
            for (std::int64_t j = 0; j < cnt; ++j) {
                const std::size_t p = off + j;
                const std::size_t c0 = coff + j * n;
                double s = a[2 * p];  // incoming from the parent side
                for (int k = 0; k < n; ++k) s += a[2 * (c0 + k) + 1];
                s *= t;
                b[2 * p + 1] = s - a[2 * p];
                for (int k = 0; k < n; ++k)
                    b[2 * (c0 + k)] = s - a[2 * (c0 + k) + 1];
            }
        }
        // leaf end nodes: reflect with +1, except a live marked F with -1
        const std::size_t loff = level_offset_.back();
        const std::int64_t lcnt = level_count_.back();
        for (std::int64_t j = 0; j < lcnt; ++j) {
            const std::size_t p = loff + j;
            b[2 * p + 1] = a[2 * p];
        }
        if (marked_) b[2 * f_edge_pos_ + 1] = -a[2 * f_edge_pos_];
    }

    WalkState step(const WalkState& s) const {
        WalkState out;
        step_into(s, out);
        return out;
    }

    // n_steps applications of the step operator.
    void evolve(WalkState& s, std::int64_t n_steps) const {
        if (n_steps < 0) throw InvalidParameters("step count must be >= 0");
        check(s);
        WalkState buf;
        buf.amp.resize(s.amp.size());
        for (std::int64_t i = 0; i < n_steps; ++i) {
            step_into(s, buf);
            std::swap(s.amp, buf.amp);
        }
    }

    // Probability on the edge connected to F (both directed states). In a
    // dead tree F is absent; the first live leaf edge stands in, which under
    // the uniform fixed point carries the same 2/(2E') as any other leaf.
    double f_probability(const WalkState& s) const {
        check(s);
        const double d = s.amp[2 * f_edge_pos_];
        const double u = s.amp[2 * f_edge_pos_ + 1];
        return d * d + u * u;
    }

    // Probability summed over the on-path edges. The root edge (x = 1) is
    // excluded by default; include_root_edge adds its two states. A dead
    // tree has no on-path edges and returns 0.
    double path_probability(const WalkState& s, bool include_root_edge = false) const {
        check(s);
        if (!maze_.f_live()) return 0.0;
        double total = 0.0;
        NodeId node = maze_.f_node();
        const int lt = maze_.level_of(maze_.live_top());
        for (int l = maze_.depth() + 1; l >= lt; --l) {
            const int x = l - lt + 1;
            if (x > 1 || include_root_edge) {
                const std::size_t p = pos_of(node);
                total += s.amp[2 * p] * s.amp[2 * p] +
                         s.amp[2 * p + 1] * s.amp[2 * p + 1];
            }
            if (l > lt) node = maze_.parent(node);
        }
        return total;
    }

    double probability_of(const WalkState& s, const DirectedEdgeState& st) const {
        check(s);
        const double a = s.amp[2 * pos_of(st.child) + static_cast<int>(st.dir)];
        return a * a;
    }

    // Projective measurement over the directed-state basis. Consumes exactly
    // one uniform draw; reproducible under a fixed seed.
    DirectedEdgeState sample_measurement(const WalkState& s, RandomStream& rng) const {
        check(s);
        if (std::abs(s.norm() - 1.0) > 1e-6)
            throw InvalidState("cannot measure an unnormalized state");
        const double u = rng.uniform01();
        double acc = 0.0;
        const std::size_t count = s.amp.size();
        for (std::size_t i = 0; i < count; ++i) {
            acc += s.amp[i] * s.amp[i];
            if (u < acc) return state_at(i);
        }
        return state_at(count - 1);
    }

    // Probability trace from the uniform state, steps 0..max_steps.
    std::vector<TracePoint> trace(std::int64_t max_steps) const {
        std::vector<TracePoint> rows;
        rows.reserve(static_cast<std::size_t>(max_steps) + 1);
        WalkState s = initial_state();
        WalkState buf;
        buf.amp.resize(s.amp.size());
        rows.push_back({0, f_probability(s), path_probability(s)});
        for (std::int64_t n = 1; n <= max_steps; ++n) {
            step_into(s, buf);
            std::swap(s.amp, buf.amp);
            rows.push_back({n, f_probability(s), path_probability(s)});
        }
        return rows;
    }

    // First peak of an observable starting from the uniform state; the
    // ground-truth oracle for U(N,M) (path) and U_F(N,M) (F edge).
    // Throws NoPeakFound when the observable never rises (dead tree).
    PeakResult find_first_peak(Observable obs, std::int64_t max_steps) const {
        return find_first_peak_in_trace(trace(max_steps), obs);
    }

    // Mapping between state indices and directed edge states.
    DirectedEdgeState state_at(std::size_t amp_index) const {
        const std::size_t pos = amp_index / 2;
        const Dir dir = (amp_index % 2 == 0) ? Dir::Down : Dir::Up;
        return DirectedEdgeState{child_at(pos), dir};
    }
    std::size_t amp_index(const DirectedEdgeState& st) const {
        return 2 * pos_of(st.child) + static_cast<int>(st.dir);
    }

private:
    std::int64_t level_start(int l) const {
        // leftmost node at level l, via repeated first-child steps
        if (l == 0) return 0;
        NodeId node = 1;
        for (int i = 1; i < l; ++i) node = maze_.child(node, 0);
        return node;
    }

    std::size_t pos_of(NodeId child) const {
        const int lt = maze_.level_of(maze_.live_top());
        const int l = maze_.level_of(child);
        const int li = l - lt;
        return level_offset_[li] + static_cast<std::size_t>(child - level_lo_[li]);
    }

    NodeId child_at(std::size_t pos) const {
        int li = static_cast<int>(level_offset_.size()) - 1;
        while (level_offset_[li] > pos) --li;
        return level_lo_[li] + static_cast<std::int64_t>(pos - level_offset_[li]);
    }

    void check(const WalkState& s) const {
        if (s.amp.size() != state_count())
            throw InvalidState("walk state does not match the live maze dimension");
    }

    TreeMaze maze_;
    bool marked_;
    std::size_t edge_count_ = 0;
    std::size_t f_edge_pos_ = 0;
    std::vector<std::int64_t> level_lo_;
    std::vector<std::int64_t> level_count_;
    std::vector<std::size_t> level_offset_;
};

}  // namespace ntree
