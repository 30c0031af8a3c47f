#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <vector>

#include "gossip_nash/graph.hpp"
#include "oracles.hpp"

using namespace gossip_nash;

namespace {

UndirectedGraph example_gi() { return build_graph(4, {{0, 1}, {1, 2}, {2, 3}, {0, 3}, {0, 2}}); }
UndirectedGraph example_gc() { return build_graph(4, {{0, 1}, {1, 2}, {0, 3}, {0, 2}}); }

// The counterexample: G_C drops two interference edges, leaving players 2
// and 3 three hops apart.
UndirectedGraph far_gi() { return build_graph(4, {{0, 1}, {1, 2}, {2, 3}, {0, 3}, {0, 2}}); }
UndirectedGraph far_gc() { return build_graph(4, {{0, 1}, {1, 2}, {0, 3}}); }

bool contains_edge_set(const std::vector<std::vector<Edge>>& sets, const UndirectedGraph& g) {
  return std::any_of(sets.begin(), sets.end(), [&](std::vector<Edge> s) {
    std::sort(s.begin(), s.end());
    return s == g.edges();
  });
}

}  // namespace

TEST(Graph, EdgesAreNormalizedAndDeduplicated) {
  const std::vector<Edge> edges{{2, 0}, {0, 2}, {1, 0}};
  UndirectedGraph g(3, edges);
  EXPECT_EQ(g.edge_count(), 2u);
  EXPECT_EQ(g.edges()[0], Edge(0, 1));
  EXPECT_EQ(g.edges()[1], Edge(0, 2));
  EXPECT_EQ(g.neighbors(0), (std::vector<Vertex>{1, 2}));
  EXPECT_TRUE(g.has_edge(2, 0));
  EXPECT_FALSE(g.has_edge(1, 2));
}

TEST(Graph, RejectsSelfLoopsAndOutOfRange) {
  EXPECT_THROW(build_graph(3, {{1, 1}}), GraphError);
  EXPECT_THROW(build_graph(3, {{0, 3}}), GraphError);
}

TEST(Graph, ConnectivityAndCompleteness) {
  EXPECT_TRUE(is_connected(example_gi()));
  EXPECT_FALSE(is_connected(build_graph(4, {{0, 1}, {2, 3}})));
  EXPECT_TRUE(is_complete(complete_graph(5)));
  EXPECT_FALSE(is_complete(example_gi()));
  EXPECT_EQ(complete_graph(5).edge_count(), 10u);
}

TEST(TriangleFree, DefaultOrderOnExampleIsStarInsideCommunicationGraph) {
  const auto gm = maximal_triangle_free_spanning_subgraph(example_gi());
  EXPECT_EQ(gm, build_graph(4, {{0, 1}, {0, 2}, {0, 3}}));
  EXPECT_TRUE(gm.is_subgraph_of(example_gc()));
}

TEST(TriangleFree, EdgeOrderReproducesPublishedTree) {
  // 1-based tree {2-3, 1-4, 1-3}.
  const std::vector<Edge> order{{1, 2}, {0, 3}, {0, 2}, {0, 1}, {2, 3}};
  const auto gm = maximal_triangle_free_spanning_subgraph(example_gi(), order);
  EXPECT_EQ(gm, build_graph(4, {{1, 2}, {0, 3}, {0, 2}}));
}

TEST(TriangleFree, RejectsBadOrderAndDisconnectedInput) {
  const std::vector<Edge> short_order{{0, 1}};
  EXPECT_THROW(maximal_triangle_free_spanning_subgraph(example_gi(), short_order), GraphError);
  EXPECT_THROW(maximal_triangle_free_spanning_subgraph(build_graph(4, {{0, 1}, {2, 3}})), GraphError);
}

TEST(TriangleFree, CompleteGraphOnFourVertices) {
  const auto k4 = complete_graph(4);
  const auto all = oracle::all_maximal_triangle_free(k4);
  // Stars and 4-cycles.
  EXPECT_EQ(all.size(), 7u);
  EXPECT_TRUE(std::any_of(all.begin(), all.end(), [](const auto& s) { return s.size() == 4; }));

  const auto star = maximal_triangle_free_spanning_subgraph(k4);
  EXPECT_TRUE(contains_edge_set(all, star));

  const std::vector<Edge> path_first{{0, 1}, {1, 2}, {2, 3}, {0, 2}, {0, 3}, {1, 3}};
  const auto cycle = maximal_triangle_free_spanning_subgraph(k4, path_first);
  EXPECT_EQ(cycle.edge_count(), 4u);
  EXPECT_TRUE(contains_edge_set(all, cycle));
}

TEST(TriangleFree, TreeIsItsOwnSubgraph) {
  const auto tree = build_graph(5, {{0, 1}, {1, 2}, {1, 3}, {3, 4}});
  EXPECT_EQ(maximal_triangle_free_spanning_subgraph(tree), tree);
}

TEST(TriangleFree, RandomGraphsMatchBruteForceDefinition) {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 3 + rng() % 4;
    const auto g = oracle::random_connected_graph(n, 0.5, rng);
    if (g.edge_count() > 14) continue;
    std::vector<Edge> order = g.edges();
    std::shuffle(order.begin(), order.end(), rng);
    const auto gm = maximal_triangle_free_spanning_subgraph(g, order);
    EXPECT_TRUE(is_triangle_free(gm));
    EXPECT_TRUE(is_connected(gm));
    EXPECT_TRUE(gm.is_subgraph_of(g));
    EXPECT_TRUE(contains_edge_set(oracle::all_maximal_triangle_free(g), gm));
  }
}

TEST(Validation, ExamplePairPasses) {
  const auto rep = validate_communication_graph(make_graph_pair(example_gi(), example_gc()));
  EXPECT_TRUE(rep.sandwich);
  EXPECT_TRUE(rep.pass);
  EXPECT_TRUE(rep.far_pairs.empty());
  EXPECT_TRUE(check_neighbor_union(example_gi(), example_gc()));
}

TEST(Validation, FarPairIsDiagnosed) {
  const auto pair = make_graph_pair(far_gi(), far_gc());
  const auto rep = validate_communication_graph(pair);
  EXPECT_FALSE(rep.pass);
  EXPECT_FALSE(rep.two_hop_fallback);
  ASSERT_EQ(rep.far_pairs.size(), 1u);
  EXPECT_EQ(rep.far_pairs[0], Edge(2, 3));
  EXPECT_FALSE(check_neighbor_union(pair));
  EXPECT_EQ(unreachable_interferers(far_gi(), far_gc(), 2), std::vector<Vertex>{3});
  // Player 3 still reaches 2 through player 0, who interferes with both.
  EXPECT_TRUE(unreachable_interferers(far_gi(), far_gc(), 3).empty());
}

TEST(Validation, CompleteGraphAnyConnectedCommunication) {
  const auto k5 = complete_graph(5);
  const auto path = build_graph(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}});
  EXPECT_TRUE(check_neighbor_union(k5, path));
  EXPECT_TRUE(validate_communication_graph(make_graph_pair(k5, k5)).pass);
}

TEST(Validation, SandwichedCommunicationGraphsSatisfyNeighborUnion) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 2 + rng() % 10;
    const auto gi = oracle::random_connected_graph(n, 0.4, rng);
    const auto gm = maximal_triangle_free_spanning_subgraph(gi);
    const auto gc = oracle::random_sandwiched(gi, gm, 0.5, rng);
    const auto rep = validate_communication_graph(GraphPair{gi, gc, gm});
    EXPECT_TRUE(rep.sandwich);
    EXPECT_TRUE(rep.two_hop_fallback);
    EXPECT_TRUE(check_neighbor_union(gi, gc));
  }
}
