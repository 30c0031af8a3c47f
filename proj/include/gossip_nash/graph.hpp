#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <optional>
#include <queue>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace gossip_nash {

using Vertex = std::size_t;

/// Unordered vertex pair, stored with first < second.
struct Edge {
  Vertex u = 0;
  Vertex v = 0;

  Edge() = default;
  Edge(Vertex a, Vertex b) : u(std::min(a, b)), v(std::max(a, b)) {}

  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

class GraphError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Simple undirected graph on vertices 0..n-1 with a dense adjacency table.
///
/// The graphs handled here are small (tens to a few hundred players), so the
/// n*n adjacency bitmap is cheaper than any hashing scheme and makes edge
/// queries O(1).
class UndirectedGraph {
 public:
  UndirectedGraph() = default;

  UndirectedGraph(std::size_t n, std::span<const Edge> edges)
      : n_(n), adjacency_(n * n, 0), neighbors_(n) {
    for (const Edge& e : edges) {
      if (e.u >= n || e.v >= n) {
        std::ostringstream msg;
        msg << "edge (" << e.u << "," << e.v << ") out of range for n=" << n;
        throw GraphError(msg.str());
      }
      if (e.u == e.v) {
        std::ostringstream msg;
        msg << "self-loop (" << e.u << "," << e.v << ")";
        throw GraphError(msg.str());
      }
      if (adjacency_[e.u * n_ + e.v]) continue;
      adjacency_[e.u * n_ + e.v] = 1;
      adjacency_[e.v * n_ + e.u] = 1;
      edges_.push_back(e);
    }
    std::sort(edges_.begin(), edges_.end());
    for (const Edge& e : edges_) {
      neighbors_[e.u].push_back(e.v);
      neighbors_[e.v].push_back(e.u);
    }
    for (auto& list : neighbors_) std::sort(list.begin(), list.end());
  }

  std::size_t size() const { return n_; }
  std::size_t edge_count() const { return edges_.size(); }

  /// Edges sorted lexicographically.
  const std::vector<Edge>& edges() const { return edges_; }

  /// N(v), ascending.
  const std::vector<Vertex>& neighbors(Vertex v) const { return neighbors_.at(v); }

  std::size_t degree(Vertex v) const { return neighbors_.at(v).size(); }

  bool has_edge(Vertex a, Vertex b) const {
    return a < n_ && b < n_ && adjacency_[a * n_ + b] != 0;
  }

  /// Row-major n*n 0/1 table.
  std::vector<int> adjacency_matrix() const {
    return std::vector<int>(adjacency_.begin(), adjacency_.end());
  }

  /// True iff every edge of this graph is also an edge of `other`.
  bool is_subgraph_of(const UndirectedGraph& other) const {
    if (other.size() != n_) return false;
    return std::all_of(edges_.begin(), edges_.end(),
                       [&](const Edge& e) { return other.has_edge(e.u, e.v); });
  }

  friend bool operator==(const UndirectedGraph& a, const UndirectedGraph& b) {
    return a.n_ == b.n_ && a.edges_ == b.edges_;
  }

 private:
  std::size_t n_ = 0;
  std::vector<unsigned char> adjacency_;
  std::vector<Edge> edges_;
  std::vector<std::vector<Vertex>> neighbors_;
};

inline UndirectedGraph build_graph(std::size_t n, std::span<const Edge> edges) {
  return UndirectedGraph(n, edges);
}

inline UndirectedGraph build_graph(std::size_t n, std::initializer_list<std::pair<Vertex, Vertex>> pairs) {
  std::vector<Edge> edges;
  edges.reserve(pairs.size());
  for (auto [a, b] : pairs) {
    if (a == b) {
      std::ostringstream msg;
      msg << "self-loop (" << a << "," << b << ")";
      throw GraphError(msg.str());
    }
    edges.emplace_back(a, b);
  }
  return UndirectedGraph(n, edges);
}

inline UndirectedGraph complete_graph(std::size_t n) {
  std::vector<Edge> edges;
  for (Vertex a = 0; a < n; ++a)
    for (Vertex b = a + 1; b < n; ++b) edges.emplace_back(a, b);
  return UndirectedGraph(n, edges);
}

inline bool is_connected(const UndirectedGraph& g) {
  const std::size_t n = g.size();
  if (n <= 1) return true;
  std::vector<bool> seen(n, false);
  std::queue<Vertex> frontier;
  frontier.push(0);
  seen[0] = true;
  std::size_t reached = 1;
  while (!frontier.empty()) {
    const Vertex v = frontier.front();
    frontier.pop();
    for (Vertex w : g.neighbors(v)) {
      if (!seen[w]) {
        seen[w] = true;
        ++reached;
        frontier.push(w);
      }
    }
  }
  return reached == n;
}

inline bool is_complete(const UndirectedGraph& g) {
  const std::size_t n = g.size();
  return g.edge_count() == n * (n - 1) / 2;
}

/// True iff a and b are joined by a path of at most two edges.
inline bool within_two_hops(const UndirectedGraph& g, Vertex a, Vertex b) {
  if (a == b || g.has_edge(a, b)) return true;
  for (Vertex w : g.neighbors(a))
    if (g.has_edge(w, b)) return true;
  return false;
}

inline bool closes_triangle(const UndirectedGraph& g, Vertex a, Vertex b) {
  for (Vertex w : g.neighbors(a))
    if (g.has_edge(w, b)) return true;
  return false;
}

inline bool is_triangle_free(const UndirectedGraph& g) {
  for (const Edge& e : g.edges())
    if (closes_triangle(g, e.u, e.v)) return false;
  return true;
}

namespace detail {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent_[b] = a;
    return true;
  }

 private:
  std::vector<std::size_t> parent_;
};

// Incrementally grown graph used while building G_m.
class GrowingGraph {
 public:
  explicit GrowingGraph(std::size_t n) : n_(n), adj_(n * n, 0), nbrs_(n) {}

  void add(const Edge& e) {
    adj_[e.u * n_ + e.v] = adj_[e.v * n_ + e.u] = 1;
    nbrs_[e.u].push_back(e.v);
    nbrs_[e.v].push_back(e.u);
    edges_.push_back(e);
  }

  bool has(Vertex a, Vertex b) const { return adj_[a * n_ + b] != 0; }

  bool closes_triangle(const Edge& e) const {
    for (Vertex w : nbrs_[e.u])
      if (has(w, e.v)) return true;
    return false;
  }

  const std::vector<Edge>& edges() const { return edges_; }

 private:
  std::size_t n_;
  std::vector<unsigned char> adj_;
  std::vector<std::vector<Vertex>> nbrs_;
  std::vector<Edge> edges_;
};

}  // namespace detail

/// Maximal triangle-free spanning subgraph G_m of a connected graph.
///
/// Construction: a spanning tree is taken Kruskal-style over `edge_order`
/// (trees have no triangles and keep G_m connected), then every remaining edge
/// is added, in the same order, unless it would close a triangle. Every edge
/// that ends up rejected closes a triangle with edges that stay in the result,
/// so the output is maximal. An empty `edge_order` means lexicographic order;
/// otherwise it must be a permutation of the edges of `g`.
inline UndirectedGraph maximal_triangle_free_spanning_subgraph(const UndirectedGraph& g,
                                                               std::span<const Edge> edge_order = {}) {
  if (!is_connected(g)) throw GraphError("interference graph must be connected");

  std::vector<Edge> order;
  if (edge_order.empty()) {
    order = g.edges();
  } else {
    order.reserve(edge_order.size());
    for (const Edge& e : edge_order) order.emplace_back(e.u, e.v);
    std::vector<Edge> sorted = order;
    std::sort(sorted.begin(), sorted.end());
    if (sorted != g.edges())
      throw GraphError("edge order must be a permutation of the graph's edges");
  }

  const std::size_t n = g.size();
  detail::GrowingGraph h(n);
  detail::DisjointSets components(n);
  std::vector<bool> used(order.size(), false);
  for (std::size_t idx = 0; idx < order.size(); ++idx) {
    if (components.unite(order[idx].u, order[idx].v)) {
      h.add(order[idx]);
      used[idx] = true;
    }
  }
  for (std::size_t idx = 0; idx < order.size(); ++idx) {
    if (used[idx]) continue;
    if (!h.closes_triangle(order[idx])) h.add(order[idx]);
  }

  UndirectedGraph result(n, h.edges());
  if (!is_connected(result)) throw std::logic_error("triangle-free subgraph lost connectivity");
  return result;
}

/// Interference graph, communication graph and the G_m used to check them.
struct GraphPair {
  UndirectedGraph interference;
  UndirectedGraph communication;
  UndirectedGraph triangle_free;
};

inline GraphPair make_graph_pair(UndirectedGraph interference, UndirectedGraph communication,
                                 std::span<const Edge> edge_order = {}) {
  UndirectedGraph gm = maximal_triangle_free_spanning_subgraph(interference, edge_order);
  return GraphPair{std::move(interference), std::move(communication), std::move(gm)};
}

struct CommunicationReport {
  bool same_size = true;
  bool lower_bound_holds = false;   // G_m ⊆ G_C
  bool upper_bound_holds = false;   // G_C ⊆ G_I
  bool sandwich = false;
  bool two_hop_fallback = false;    // every interference edge spans ≤ 2 hops in G_C
  bool communication_connected = false;
  bool pass = false;
  std::vector<Edge> far_pairs;      // interference edges more than two hops apart in G_C
  std::vector<Edge> missing_lower;  // edges of G_m absent from G_C
  std::vector<Edge> extra_upper;    // edges of G_C absent from G_I
};

inline CommunicationReport validate_communication_graph(const GraphPair& pair) {
  CommunicationReport report;
  const auto& gi = pair.interference;
  const auto& gc = pair.communication;
  const auto& gm = pair.triangle_free;
  if (gi.size() != gc.size() || gi.size() != gm.size()) {
    report.same_size = false;
    return report;
  }
  for (const Edge& e : gm.edges())
    if (!gc.has_edge(e.u, e.v)) report.missing_lower.push_back(e);
  for (const Edge& e : gc.edges())
    if (!gi.has_edge(e.u, e.v)) report.extra_upper.push_back(e);
  for (const Edge& e : gi.edges())
    if (!within_two_hops(gc, e.u, e.v)) report.far_pairs.push_back(e);

  report.lower_bound_holds = report.missing_lower.empty();
  report.upper_bound_holds = report.extra_upper.empty();
  report.sandwich = report.lower_bound_holds && report.upper_bound_holds;
  report.two_hop_fallback = report.far_pairs.empty();
  report.communication_connected = is_connected(gc);
  report.pass = report.sandwich || report.two_hop_fallback;
  return report;
}

/// Players j ∈ N_I(i) that i cannot learn about from any communication neighbor,
/// i.e. N_I(i) minus ⋃_{j∈N_C(i)} (N_I(i) ∩ Ñ_I(j)).
inline std::vector<Vertex> unreachable_interferers(const UndirectedGraph& gi, const UndirectedGraph& gc,
                                                   Vertex i) {
  std::vector<Vertex> missing;
  for (Vertex target : gi.neighbors(i)) {
    bool covered = false;
    for (Vertex j : gc.neighbors(i)) {
      if (j == target || gi.has_edge(j, target)) {
        covered = true;
        break;
      }
    }
    if (!covered) missing.push_back(target);
  }
  return missing;
}

inline bool check_neighbor_union(const UndirectedGraph& gi, const UndirectedGraph& gc) {
  if (gi.size() != gc.size()) return false;
  for (Vertex i = 0; i < gi.size(); ++i)
    if (!unreachable_interferers(gi, gc, i).empty()) return false;
  return true;
}

inline bool check_neighbor_union(const GraphPair& pair) {
  return check_neighbor_union(pair.interference, pair.communication);
}

}  // namespace gossip_nash
