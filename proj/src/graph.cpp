#include "subquad/graph.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace subquad {

namespace {

[[noreturn]] void parse_fail(int line, const std::string& what) {
  throw std::runtime_error("parse error at line " + std::to_string(line) + ": " + what);
}

}  // namespace

Graph Graph::from_edges(int n, const std::vector<std::pair<Vertex, Vertex>>& edges) {
  if (n < 0) throw std::runtime_error("negative vertex count");
  Graph g;
  g.n = n;
  g.adjacency.assign(n, {});
  std::set<std::pair<Vertex, Vertex>> seen;
  for (auto [a, b] : edges) {
    if (a < 0 || a >= n || b < 0 || b >= n) throw std::runtime_error("vertex id out of range");
    if (a == b) throw std::runtime_error("self-loop at vertex " + std::to_string(a));
    auto key = std::minmax(a, b);
    if (!seen.insert(key).second) {
      throw std::runtime_error("duplicate edge " + std::to_string(key.first) + " " +
                               std::to_string(key.second));
    }
    g.adjacency[a].push_back(b);
    g.adjacency[b].push_back(a);
  }
  for (auto& nb : g.adjacency) {
    std::sort(nb.begin(), nb.end());
    g.max_degree = std::max(g.max_degree, static_cast<int>(nb.size()));
  }
  return g;
}

bool Graph::has_edge(Vertex a, Vertex b) const {
  const auto& nb = adjacency[a];
  return std::binary_search(nb.begin(), nb.end(), b);
}

std::size_t Graph::edge_count() const {
  std::size_t deg_sum = 0;
  for (const auto& nb : adjacency) deg_sum += nb.size();
  return deg_sum / 2;
}

Hypergraph Hypergraph::from_edges(int n, int k, const std::vector<std::vector<Vertex>>& edges) {
  if (k < 1) throw std::runtime_error("uniformity must be positive");
  Hypergraph h;
  h.n = n;
  h.uniformity = k;
  h.incident_edges.assign(n, {});
  std::set<std::vector<Vertex>> seen;
  for (auto e : edges) {
    std::sort(e.begin(), e.end());
    if (static_cast<int>(e.size()) != k) throw std::runtime_error("hyperedge arity mismatch");
    if (std::adjacent_find(e.begin(), e.end()) != e.end()) {
      throw std::runtime_error("repeated vertex in hyperedge");
    }
    if (e.front() < 0 || e.back() >= n) throw std::runtime_error("vertex id out of range");
    if (!seen.insert(e).second) throw std::runtime_error("duplicate hyperedge");
    int idx = static_cast<int>(h.edges.size());
    for (Vertex v : e) h.incident_edges[v].push_back(idx);
    h.edges.push_back(std::move(e));
  }
  for (const auto& inc : h.incident_edges) {
    h.max_degree = std::max(h.max_degree, static_cast<int>(inc.size()));
  }
  return h;
}

Graph parse_graph(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  int n = -1;
  std::vector<std::pair<Vertex, Vertex>> edges;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (n < 0) {
      if (!(ls >> n) || n < 0) parse_fail(lineno, "expected vertex count");
      continue;
    }
    Vertex a, b;
    if (!(ls >> a >> b)) parse_fail(lineno, "expected edge 'a b'");
    if (a == b) parse_fail(lineno, "self-loop " + std::to_string(a) + " " + std::to_string(b));
    if (a < 0 || a >= n || b < 0 || b >= n) parse_fail(lineno, "vertex id out of range");
    auto key = std::minmax(a, b);
    for (const auto& e : edges) {
      if (std::minmax(e.first, e.second) == key) parse_fail(lineno, "duplicate edge");
    }
    edges.emplace_back(a, b);
  }
  if (n < 0) throw std::runtime_error("empty graph file");
  return Graph::from_edges(n, edges);
}

Hypergraph parse_hypergraph(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  int n = -1, k = -1;
  std::vector<std::vector<Vertex>> edges;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (n < 0) {
      if (!(ls >> n >> k) || n < 0 || k < 1) parse_fail(lineno, "expected header 'n k'");
      continue;
    }
    std::vector<Vertex> e;
    Vertex v;
    while (ls >> v) e.push_back(v);
    if (static_cast<int>(e.size()) != k) parse_fail(lineno, "expected " + std::to_string(k) + " vertex ids");
    edges.push_back(std::move(e));
  }
  if (n < 0) throw std::runtime_error("empty hypergraph file");
  return Hypergraph::from_edges(n, k, edges);
}

namespace {
std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}
}  // namespace

Graph load_graph(const std::string& path) { return parse_graph(slurp(path)); }
Hypergraph load_hypergraph(const std::string& path) { return parse_hypergraph(slurp(path)); }

namespace {

// Connected-set enumeration by canonical-order pivoting: each set is emitted
// exactly once, extensions are restricted to candidates not previously
// declined on the current branch.
void enumerate_rec(const Graph& g, int k, std::vector<Vertex>& current,
                   std::vector<char>& in_set, std::vector<char>& excluded,
                   std::vector<std::vector<Vertex>>& out) {
  {
    std::vector<Vertex> sorted = current;
    std::sort(sorted.begin(), sorted.end());
    out.push_back(std::move(sorted));
  }
  if (static_cast<int>(current.size()) == k) return;

  std::vector<Vertex> candidates;
  for (Vertex s : current) {
    for (Vertex w : g.neighbors(s)) {
      if (!in_set[w] && !excluded[w]) {
        in_set[w] = 2;  // temporary mark to dedup candidates
        candidates.push_back(w);
      }
    }
  }
  for (Vertex w : candidates) in_set[w] = 0;
  std::sort(candidates.begin(), candidates.end());

  std::vector<Vertex> newly_excluded;
  for (Vertex w : candidates) {
    current.push_back(w);
    in_set[w] = 1;
    enumerate_rec(g, k, current, in_set, excluded, out);
    in_set[w] = 0;
    current.pop_back();
    excluded[w] = 1;
    newly_excluded.push_back(w);
  }
  for (Vertex w : newly_excluded) excluded[w] = 0;
}

}  // namespace

std::vector<std::vector<Vertex>> enumerate_connected_subgraphs(const Graph& g, Vertex u, int k) {
  if (k < 1) throw std::invalid_argument("size bound must be >= 1");
  if (u < 0 || u >= g.n) throw std::invalid_argument("pivot vertex out of range");
  std::vector<std::vector<Vertex>> out;
  std::vector<Vertex> current{u};
  std::vector<char> in_set(g.n, 0), excluded(g.n, 0);
  in_set[u] = 1;
  enumerate_rec(g, k, current, in_set, excluded, out);
  return out;
}

Graph random_regular_graph(int n, int degree, RngStream& rng) {
  if (n * degree % 2 != 0) throw std::invalid_argument("n * degree must be even");
  if (degree >= n) throw std::invalid_argument("degree must be below n");
  for (int attempt = 0; attempt < 10000; ++attempt) {
    std::vector<Vertex> stubs;
    stubs.reserve(static_cast<std::size_t>(n) * degree);
    for (Vertex v = 0; v < n; ++v) {
      for (int i = 0; i < degree; ++i) stubs.push_back(v);
    }
    // Fisher-Yates with the stream.
    for (std::size_t i = stubs.size(); i > 1; --i) {
      std::size_t j = rng.below(i);
      std::swap(stubs[i - 1], stubs[j]);
    }
    std::set<std::pair<Vertex, Vertex>> seen;
    std::vector<std::pair<Vertex, Vertex>> edges;
    bool ok = true;
    for (std::size_t i = 0; i + 1 < stubs.size(); i += 2) {
      Vertex a = stubs[i], b = stubs[i + 1];
      if (a == b) { ok = false; break; }
      auto key = std::minmax(a, b);
      if (!seen.insert(key).second) { ok = false; break; }
      edges.emplace_back(a, b);
    }
    if (ok) return Graph::from_edges(n, edges);
  }
  throw std::runtime_error("configuration model failed to produce a simple graph");
}

}  // namespace subquad
