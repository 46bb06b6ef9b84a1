#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "subquad/rng.hpp"

namespace subquad {

using Vertex = int;
using Spin = int;

// Simple undirected graph on dense vertex ids 0..n-1. Neighbor lists are kept
// sorted by the canonical vertex order (ascending id), so iteration order is
// deterministic and two loads of the same file yield identical structures.
struct Graph {
  int n = 0;
  std::vector<std::vector<Vertex>> adjacency;
  int max_degree = 0;

  static Graph from_edges(int n, const std::vector<std::pair<Vertex, Vertex>>& edges);

  int degree(Vertex v) const { return static_cast<int>(adjacency[v].size()); }
  const std::vector<Vertex>& neighbors(Vertex v) const { return adjacency[v]; }
  bool has_edge(Vertex a, Vertex b) const;
  std::size_t edge_count() const;
};

// k-uniform hypergraph: every edge has exactly k distinct vertices.
struct Hypergraph {
  int n = 0;
  int uniformity = 0;
  std::vector<std::vector<Vertex>> edges;        // each sorted ascending
  std::vector<std::vector<int>> incident_edges;  // vertex -> edge indices
  int max_degree = 0;  // max number of edges incident to one vertex

  static Hypergraph from_edges(int n, int k, const std::vector<std::vector<Vertex>>& edges);
};

// Feasible partial configuration: sparse map vertex -> spin. Feasibility with
// respect to a concrete model is the model's business, not checked here.
class Pinning {
 public:
  Pinning() = default;

  bool pinned(Vertex v) const { return map_.count(v) != 0; }
  std::optional<Spin> get(Vertex v) const {
    auto it = map_.find(v);
    if (it == map_.end()) return std::nullopt;
    return it->second;
  }
  void set(Vertex v, Spin s) { map_[v] = s; }
  void erase(Vertex v) { map_.erase(v); }
  std::size_t size() const { return map_.size(); }
  bool empty() const { return map_.empty(); }

  const std::map<Vertex, Spin>& entries() const { return map_; }

  bool operator==(const Pinning& o) const { return map_ == o.map_; }

 private:
  std::map<Vertex, Spin> map_;
};

// Total order on vertices; the canonical order is ascending id.
struct VertexOrder {
  std::vector<int> rank;  // rank[v] = position of v in the order

  static VertexOrder canonical(int n) {
    VertexOrder o;
    o.rank.resize(n);
    for (int i = 0; i < n; ++i) o.rank[i] = i;
    return o;
  }
  bool less(Vertex a, Vertex b) const { return rank[a] < rank[b]; }
};

enum class GraphFormat { EdgeList, HyperList };

// Text loaders. Edge list: first line "n", then one "a b" per line.
// Hyperedge list: first line "n k", then k vertex ids per line.
// Throws std::runtime_error with a line number on parse errors, duplicate
// edges, or self-loops.
Graph load_graph(const std::string& path);
Hypergraph load_hypergraph(const std::string& path);
Graph parse_graph(const std::string& text);
Hypergraph parse_hypergraph(const std::string& text);

// All connected vertex sets of size <= k that contain u, each exactly once,
// as sorted vertex lists. The count at exact size k is at most (e*Delta)^(k-1).
std::vector<std::vector<Vertex>> enumerate_connected_subgraphs(const Graph& g, Vertex u, int k);

// Seeded Delta-regular random graph via the configuration model, rejecting
// pairings with self-loops or multi-edges. n * degree must be even.
Graph random_regular_graph(int n, int degree, RngStream& rng);

}  // namespace subquad
