#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ntree/errors.hpp"

namespace ntree {

using NodeId = std::int64_t;

// Direction of a directed edge state relative to the root: Down moves away
// from the root (deeper), Up moves toward it.
enum class Dir : int { Down = 0, Up = 1 };

// An undirected edge, keyed by its deeper endpoint (every non-root node has
// exactly one parent edge).
struct Edge {
    NodeId child = -1;
    friend bool operator==(const Edge&, const Edge&) = default;
};

// A directed edge state |A,B>: the particle on edge {A,B} scattering into B.
struct DirectedEdgeState {
    NodeId child = -1;  // deeper endpoint of the undirected edge
    Dir dir = Dir::Down;
    Edge edge() const { return Edge{child}; }
    friend bool operator==(const DirectedEdgeState&, const DirectedEdgeState&) = default;
};

// N-ary tree maze: a start node S joined by one edge to a chain of junction
// layers, each junction offering N choices, M layers deep, with N^M final
// nodes. One final node F is marked. Nodes are indexed in breadth-first
// level order with S = 0, so parent/child lookups are pure arithmetic.
//
// Freezing ("movement") never deletes anything: the live sub-maze is fully
// described by its top junction, and the node just above it acts as the
// degree-1 root. A TreeMaze value is immutable; freeze_below and reset
// return new values.
class TreeMaze {
public:
    TreeMaze(int branching, int depth, std::int64_t f_leaf) {
        if (branching < 2) throw InvalidParameters("branching N must be >= 2");
        if (depth < 1) throw InvalidParameters("depth M must be >= 1");
        n_ = branching;
        m_ = depth;
        level_start_.resize(m_ + 3);
        level_start_[0] = 0;
        level_start_[1] = 1;
        std::int64_t width = 1;
        for (int l = 1; l <= m_ + 1; ++l) {
            level_start_[l + 1] = checked_add(level_start_[l], width);
            if (l <= m_) width = checked_mul(width, n_);
        }
        if (f_leaf < 0 || f_leaf >= leaf_count())
            throw InvalidParameters("f_leaf out of range");
        f_leaf_ = f_leaf;
        top_ = 1;
    }

    int branching() const { return n_; }
    int depth() const { return m_; }
    std::int64_t f_leaf() const { return f_leaf_; }

    // --- full-maze node arithmetic ------------------------------------
    std::int64_t node_count() const { return level_start_[m_ + 2]; }
    std::int64_t edge_count() const { return node_count() - 1; }
    std::int64_t leaf_count() const {
        return level_start_[m_ + 2] - level_start_[m_ + 1];
    }

    int level_of(NodeId node) const {
        if (node < 0 || node >= node_count()) throw InvalidEdge("node out of range");
        int l = 0;
        while (node >= level_start_[l + 1]) ++l;
        return l;
    }

    NodeId parent(NodeId node) const {
        int l = level_of(node);
        if (l == 0) throw InvalidEdge("root has no parent");
        if (l == 1) return 0;
        return level_start_[l - 1] + (node - level_start_[l]) / n_;
    }

    NodeId child(NodeId node, int k) const {
        int l = level_of(node);
        if (l > m_) throw InvalidEdge("leaves have no children");
        if (l == 0) return 1;
        return level_start_[l + 1] + (node - level_start_[l]) * n_ + k;
    }

    NodeId leaf_node(std::int64_t leaf_index) const {
        return level_start_[m_ + 1] + leaf_index;
    }
    NodeId f_node() const { return leaf_node(f_leaf_); }
    bool is_leaf(NodeId node) const { return node >= level_start_[m_ + 1]; }

    // Ancestor of `node` at level `l` (l <= level_of(node)).
    NodeId ancestor_at(NodeId node, int l) const {
        int cur = level_of(node);
        while (cur > l) {
            node = (cur == 1) ? 0
                              : level_start_[cur - 1] + (node - level_start_[cur]) / n_;
            --cur;
        }
        return node;
    }

    // --- live (unfrozen) sub-maze --------------------------------------
    // The live graph is {live_root()} plus the subtree of live_top(); it is
    // itself an N-tree maze of depth live_depth() whose degree-1 root is the
    // turned-off node just above the top junction.
    NodeId live_top() const { return top_; }
    NodeId live_root() const { return top_ == 1 ? 0 : parent(top_); }
    int live_depth() const { return m_ + 1 - level_of(top_); }
    bool is_full() const { return top_ == 1; }

    std::int64_t live_edge_count() const {
        // edges of the live sub-maze: 1 + N + ... + N^M'
        std::int64_t e = 0, w = 1;
        for (int j = 0; j <= live_depth(); ++j) {
            e += w;
            w *= n_;
        }
        return e;
    }
    std::int64_t live_leaf_count() const {
        std::int64_t w = 1;
        for (int j = 0; j < live_depth(); ++j) w *= n_;
        return w;
    }

    bool is_live(NodeId node) const {
        if (node == live_root()) return true;
        int l = level_of(node);
        int lt = level_of(top_);
        return l >= lt && ancestor_at(node, lt) == top_;
    }
    bool is_live(const Edge& e) const {
        if (e.child <= 0 || e.child >= node_count()) return false;
        int l = level_of(e.child);
        int lt = level_of(top_);
        return l >= lt && ancestor_at(e.child, lt) == top_;
    }

    bool f_live() const { return is_live(Edge{f_node()}); }

    // Root edge of the live sub-maze (coordinate x = 1).
    Edge active_root_edge() const { return Edge{top_}; }

    // Depth of an edge within the live maze: 1 for the root edge, up to
    // M'+1 for leaf edges.
    int live_edge_depth(const Edge& e) const {
        if (!is_live(e)) throw InvalidEdge("edge is frozen or absent");
        return level_of(e.child) - level_of(top_) + 1;
    }

    bool on_live_path(const Edge& e) const {
        if (!is_live(e)) throw InvalidEdge("edge is frozen or absent");
        if (!f_live()) return false;
        return ancestor_at(f_node(), level_of(e.child)) == e.child;
    }

    // Coordinate x (1..M'+1) of a live on-path edge, absent off the path.
    // In a dead tree nothing is on the path.
    std::optional<int> path_coordinate(const Edge& e) const {
        if (!on_live_path(e)) return std::nullopt;
        return live_edge_depth(e);
    }

    // Turn off the node on the root side of `e`, freezing everything above
    // it. The measured edge becomes the new active root edge; the live graph
    // becomes an N-tree maze of depth M'+1-x for an on-path edge at
    // coordinate x (likewise for off-path edges, which leave F frozen).
    // Re-freezing the current root edge is a no-op. Final-node edges are
    // checked, not moved to.
    TreeMaze freeze_below(const Edge& e) const {
        if (!is_live(e)) throw InvalidEdge("cannot freeze at a frozen edge");
        if (is_leaf(e.child))
            throw InvalidMove("cannot freeze the edge of a final node");
        TreeMaze out = *this;
        out.top_ = e.child;
        return out;
    }

    // Back to the fully active maze.
    TreeMaze reset() const {
        TreeMaze out = *this;
        out.top_ = 1;
        return out;
    }

    // Endpoints of a directed state: Down enters the child, Up leaves it.
    NodeId state_from(const DirectedEdgeState& s) const {
        return s.dir == Dir::Down ? parent(s.child) : s.child;
    }
    NodeId state_to(const DirectedEdgeState& s) const {
        return s.dir == Dir::Down ? s.child : parent(s.child);
    }

private:
    static std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
        if (a != 0 && b > (INT64_MAX - 1) / a)
            throw InvalidParameters("maze too large for 64-bit indexing");
        return a * b;
    }
    static std::int64_t checked_add(std::int64_t a, std::int64_t b) {
        if (b > INT64_MAX - a)
            throw InvalidParameters("maze too large for 64-bit indexing");
        return a + b;
    }

    int n_ = 2;
    int m_ = 1;
    std::int64_t f_leaf_ = 0;
    NodeId top_ = 1;
    std::vector<std::int64_t> level_start_;  // level_start_[l] = first id at level l
};

inline TreeMaze build_maze(int branching, int depth, std::int64_t f_leaf) {
    return TreeMaze(branching, depth, f_leaf);
}

}  // namespace ntree
