#pragma once

#include <string>
#include <vector>

#include "subquad/models.hpp"

namespace subquad {

// All connected graphs with n_min <= n <= n_max vertices and maximum degree
// <= max_degree, one representative per isomorphism class, deterministically
// ordered. Sizes here are tiny, so canonical forms come from trying all
// vertex permutations.
std::vector<Graph> connected_graph_corpus(int n_min, int n_max, int max_degree);

// Named fixed instances used by the verification suites.
struct PolymerInstance {
  std::string name;
  PolymerModel model;
};
std::vector<PolymerInstance> polymer_corpus();

struct HypergraphInstance {
  std::string name;
  Hypergraph hyper;
};
std::vector<HypergraphInstance> hypergraph_corpus();

// Small convenience builders.
Graph path_graph(int n);
Graph cycle_graph(int n);
Graph complete_graph(int n);
// Complete rooted tree in which every internal vertex has `arity` children.
Graph complete_arity_tree(int arity, int depth);

}  // namespace subquad
