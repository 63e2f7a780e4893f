#include <catch2/catch_amalgamated.hpp>

#include "ntree/io.hpp"
#include "ntree/maze.hpp"
#include "ntree/rng.hpp"

using namespace ntree;

TEST_CASE("edge and leaf counts match the closed forms") {
    // E = (N^(M+1) - 1)/(N - 1), N^M leaves
    CHECK(TreeMaze(2, 4, 0).edge_count() == 31);
    CHECK(TreeMaze(2, 4, 0).leaf_count() == 16);
    CHECK(TreeMaze(2, 1, 1).edge_count() == 3);
    CHECK(TreeMaze(3, 2, 5).edge_count() == 13);
    for (int n = 2; n <= 4; ++n) {
        for (int m = 1; m <= 6; ++m) {
            TreeMaze maze(n, m, 0);
            std::int64_t e = 0, w = 1;
            for (int j = 0; j <= m; ++j) {
                e += w;
                w *= n;
            }
            CHECK(maze.edge_count() == e);
            CHECK(maze.leaf_count() == w / n);
            CHECK(maze.node_count() == e + 1);
        }
    }
}

TEST_CASE("degree sequence: root 1, junctions N+1, leaves 1") {
    for (int n = 2; n <= 4; ++n) {
        for (int m = 1; m <= 5; ++m) {
            TreeMaze maze(n, m, 0);
            std::vector<int> degree(static_cast<std::size_t>(maze.node_count()), 0);
            for (NodeId v = 1; v < maze.node_count(); ++v) {
                degree[static_cast<std::size_t>(v)]++;
                degree[static_cast<std::size_t>(maze.parent(v))]++;
            }
            CHECK(degree[0] == 1);
            std::int64_t junctions = 0, leaves = 0;
            for (NodeId v = 1; v < maze.node_count(); ++v) {
                if (maze.is_leaf(v)) {
                    CHECK(degree[static_cast<std::size_t>(v)] == 1);
                    ++leaves;
                } else {
                    CHECK(degree[static_cast<std::size_t>(v)] == n + 1);
                    ++junctions;
                }
            }
            CHECK(leaves == maze.leaf_count());
            CHECK(junctions == maze.node_count() - 1 - leaves);
        }
    }
}

TEST_CASE("invalid parameters are rejected") {
    CHECK_THROWS_AS(TreeMaze(1, 3, 0), InvalidParameters);
    CHECK_THROWS_AS(TreeMaze(2, 0, 0), InvalidParameters);
    CHECK_THROWS_AS(TreeMaze(2, 3, 8), InvalidParameters);   // N^M = 8 leaves
    CHECK_THROWS_AS(TreeMaze(2, 3, -1), InvalidParameters);
}

TEST_CASE("path coordinates run 1..M+1 from S to F") {
    TreeMaze maze(2, 4, 5);
    // walk F's ancestor chain
    NodeId node = maze.f_node();
    int x = maze.depth() + 1;
    while (node != 0) {
        Edge e{node};
        REQUIRE(maze.on_live_path(e));
        CHECK(maze.path_coordinate(e) == x);
        node = maze.parent(node);
        --x;
    }
    CHECK(maze.path_coordinate(maze.active_root_edge()) == 1);
    CHECK(maze.path_coordinate(Edge{maze.f_node()}) == maze.depth() + 1);

    // a sibling subtree is never on the path
    const NodeId j1 = 1;
    const NodeId toward_f = maze.ancestor_at(maze.f_node(), 2);
    for (int k = 0; k < 2; ++k) {
        const NodeId c = maze.child(j1, k);
        if (c == toward_f) continue;
        CHECK_FALSE(maze.path_coordinate(Edge{c}).has_value());
        CHECK_FALSE(maze.path_coordinate(Edge{maze.child(c, 1)}).has_value());
    }
}

TEST_CASE("freeze_below moves the live maze down the measured edge") {
    TreeMaze maze(2, 4, 0);

    SECTION("on-path edge at x = 3 leaves a depth-2 maze containing F") {
        const Edge e{maze.ancestor_at(maze.f_node(), 3)};
        REQUIRE(maze.path_coordinate(e) == 3);
        const TreeMaze next = maze.freeze_below(e);
        CHECK(next.live_depth() == 2);
        CHECK(next.f_live());
        CHECK(next.active_root_edge() == e);
        CHECK(next.live_edge_count() == 7);
        CHECK_FALSE(next.is_live(maze.active_root_edge()));
    }

    SECTION("the root edge freezes to an isomorphic maze") {
        const TreeMaze next = maze.freeze_below(maze.active_root_edge());
        CHECK(next.live_depth() == maze.depth());
        CHECK(next.live_top() == maze.live_top());
        CHECK(next.f_live());
    }

    SECTION("an off-path edge leaves a dead tree of the subtree depth") {
        // deviate from the path at the first junction, then one level down
        const NodeId toward_f = maze.ancestor_at(maze.f_node(), 2);
        NodeId dev = -1;
        for (int k = 0; k < 2; ++k)
            if (maze.child(1, k) != toward_f) dev = maze.child(1, k);
        const Edge e{maze.child(dev, 0)};  // depth-3 edge, off path
        const TreeMaze next = maze.freeze_below(e);
        CHECK(next.live_depth() == 2);
        CHECK_FALSE(next.f_live());
        CHECK(next.path_coordinate(next.active_root_edge()) == std::nullopt);
    }

    SECTION("final-node edges are checked, not moved to") {
        CHECK_THROWS_AS(maze.freeze_below(Edge{maze.f_node()}), InvalidMove);
        CHECK_THROWS_AS(maze.freeze_below(Edge{maze.leaf_node(3)}), InvalidMove);
    }

    SECTION("frozen edges cannot be measured again") {
        const Edge e{maze.ancestor_at(maze.f_node(), 3)};
        const TreeMaze next = maze.freeze_below(e);
        CHECK_THROWS_AS(next.freeze_below(maze.active_root_edge()), InvalidEdge);
        CHECK_THROWS_AS(next.path_coordinate(maze.active_root_edge()), InvalidEdge);
    }
}

TEST_CASE("freeze sequences keep F live exactly when every edge was on-path") {
    RandomStream rng(20240811);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 2 + static_cast<int>(rng.below(3));
        const int m = 2 + static_cast<int>(rng.below(4));
        TreeMaze maze(n, m, 0);
        const std::int64_t f =
            static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(maze.leaf_count())));
        maze = TreeMaze(n, m, f);
        bool all_on_path = true;
        while (maze.live_depth() > 1) {
            // pick any live non-leaf edge: a uniformly chosen junction below top
            const int depth = 1 + static_cast<int>(
                rng.below(static_cast<std::uint64_t>(maze.live_depth())));
            NodeId node = maze.live_top();
            for (int d = 1; d < depth; ++d)
                node = maze.child(node, static_cast<int>(rng.below(
                                            static_cast<std::uint64_t>(n))));
            const Edge e{node};
            if (node == maze.live_top()) {
                const TreeMaze same = maze.freeze_below(e);
                CHECK(same.live_depth() == maze.live_depth());
                break;  // no progress; end this trial
            }
            all_on_path = all_on_path && maze.on_live_path(e);
            maze = maze.freeze_below(e);
            CHECK(maze.f_live() == all_on_path);
            std::int64_t leaves = 1;
            for (int j = 0; j < maze.live_depth(); ++j) leaves *= n;
            CHECK(maze.live_leaf_count() == leaves);
        }
        CHECK(maze.live_depth() >= 1);
    }
}

TEST_CASE("reset restores the full maze") {
    TreeMaze maze(3, 3, 7);
    const TreeMaze frozen = maze.freeze_below(Edge{maze.ancestor_at(maze.f_node(), 2)});
    REQUIRE(frozen.live_depth() == 2);
    const TreeMaze back = frozen.reset();
    CHECK(back.is_full());
    CHECK(back.live_depth() == 3);
    CHECK(back.f_leaf() == 7);
}

TEST_CASE("maze descriptor JSON round-trips") {
    TreeMaze maze(3, 4, 17);
    const TreeMaze frozen = maze.freeze_below(Edge{maze.ancestor_at(maze.f_node(), 2)});
    for (const TreeMaze& src : {maze, frozen}) {
        const TreeMaze parsed = maze_from_json(maze_to_json(src));
        CHECK(parsed.branching() == src.branching());
        CHECK(parsed.depth() == src.depth());
        CHECK(parsed.f_leaf() == src.f_leaf());
        CHECK(parsed.live_top() == src.live_top());
        CHECK(parsed.live_depth() == src.live_depth());
    }
}
