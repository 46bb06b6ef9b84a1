#include "subquad/corpus.hpp"

#include <algorithm>
#include <numeric>
#include <set>

namespace subquad {

namespace {

using EdgeMask = std::uint32_t;

std::vector<std::pair<int, int>> pair_index(int n) {
  std::vector<std::pair<int, int>> pairs;
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) pairs.emplace_back(a, b);
  }
  return pairs;
}

bool connected(int n, const std::vector<std::vector<int>>& adj) {
  std::vector<char> seen(n, 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  int count = 1;
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    for (int w : adj[v]) {
      if (!seen[w]) {
        seen[w] = 1;
        ++count;
        stack.push_back(w);
      }
    }
  }
  return count == n;
}

// Lexicographically smallest edge mask over all vertex relabelings.
EdgeMask canonical_mask(int n, EdgeMask mask, const std::vector<std::pair<int, int>>& pairs) {
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  EdgeMask best = ~EdgeMask(0);
  // pair -> index lookup
  std::vector<std::vector<int>> at(n, std::vector<int>(n, -1));
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    at[pairs[i].first][pairs[i].second] = static_cast<int>(i);
    at[pairs[i].second][pairs[i].first] = static_cast<int>(i);
  }
  do {
    EdgeMask relabeled = 0;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      if (mask & (EdgeMask(1) << i)) {
        int a = perm[pairs[i].first];
        int b = perm[pairs[i].second];
        relabeled |= EdgeMask(1) << at[a][b];
      }
    }
    best = std::min(best, relabeled);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

}  // namespace

std::vector<Graph> connected_graph_corpus(int n_min, int n_max, int max_degree) {
  std::vector<Graph> out;
  for (int n = n_min; n <= n_max; ++n) {
    if (n == 1) {
      out.push_back(Graph::from_edges(1, {}));
      continue;
    }
    auto pairs = pair_index(n);
    std::set<EdgeMask> seen;
    const EdgeMask all = EdgeMask(1) << pairs.size();
    for (EdgeMask mask = 0; mask < all; ++mask) {
      std::vector<std::vector<int>> adj(n);
      bool degree_ok = true;
      for (std::size_t i = 0; i < pairs.size() && degree_ok; ++i) {
        if (mask & (EdgeMask(1) << i)) {
          adj[pairs[i].first].push_back(pairs[i].second);
          adj[pairs[i].second].push_back(pairs[i].first);
          degree_ok = static_cast<int>(adj[pairs[i].first].size()) <= max_degree &&
                      static_cast<int>(adj[pairs[i].second].size()) <= max_degree;
        }
      }
      if (!degree_ok || !connected(n, adj)) continue;
      if (!seen.insert(canonical_mask(n, mask, pairs)).second) continue;
      std::vector<std::pair<Vertex, Vertex>> edges;
      for (std::size_t i = 0; i < pairs.size(); ++i) {
        if (mask & (EdgeMask(1) << i)) edges.emplace_back(pairs[i].first, pairs[i].second);
      }
      out.push_back(Graph::from_edges(n, edges));
    }
  }
  return out;
}

std::vector<PolymerInstance> polymer_corpus() {
  std::vector<PolymerInstance> out;
  out.push_back({"single-vertex-q3", PolymerModel::geometric(Graph::from_edges(1, {}), 3, 1.2)});
  out.push_back({"path4-q2", PolymerModel::geometric(path_graph(4), 2, 1.5)});
  {
    // Cycle with a size-capped weight function: polymers above size 3 are
    // forbidden outright.
    PolymerModel m = PolymerModel::geometric(cycle_graph(5), 2, 1.4);
    double theta = m.theta;
    m.weight = [theta](const Polymer& p) {
      if (p.size() > 3) return 0.0;
      return std::exp(-theta * p.size());
    };
    out.push_back({"cycle5-capped", std::move(m)});
  }
  return out;
}

std::vector<HypergraphInstance> hypergraph_corpus() {
  std::vector<HypergraphInstance> out;
  out.push_back({"h6-2edges", Hypergraph::from_edges(6, 4,
                                                     {{0, 1, 2, 3}, {2, 3, 4, 5}})});
  out.push_back({"h7-3edges", Hypergraph::from_edges(7, 4,
                                                     {{0, 1, 2, 3}, {1, 2, 4, 5}, {3, 4, 5, 6}})});
  return out;
}

Graph path_graph(int n) {
  std::vector<std::pair<Vertex, Vertex>> edges;
  for (int i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
  return Graph::from_edges(n, edges);
}

Graph cycle_graph(int n) {
  std::vector<std::pair<Vertex, Vertex>> edges;
  for (int i = 0; i < n; ++i) edges.emplace_back(i, (i + 1) % n);
  return Graph::from_edges(n, edges);
}

Graph complete_graph(int n) {
  std::vector<std::pair<Vertex, Vertex>> edges;
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) edges.emplace_back(a, b);
  }
  return Graph::from_edges(n, edges);
}

Graph complete_arity_tree(int arity, int depth) {
  std::vector<std::pair<Vertex, Vertex>> edges;
  std::vector<int> frontier{0};
  int next = 1;
  for (int level = 0; level < depth; ++level) {
    std::vector<int> new_frontier;
    for (int v : frontier) {
      for (int c = 0; c < arity; ++c) {
        edges.emplace_back(v, next);
        new_frontier.push_back(next);
        ++next;
      }
    }
    frontier = std::move(new_frontier);
  }
  return Graph::from_edges(next, edges);
}

}  // namespace subquad
