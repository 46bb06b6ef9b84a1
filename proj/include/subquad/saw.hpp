#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "subquad/models.hpp"
#include "subquad/pinning.hpp"
#include "subquad/rng.hpp"

namespace subquad {

// Derived graph of a self-avoiding walk, maintained incrementally against the
// host graph with an undo journal. Each step removes the walk tip and hangs a
// pinned copy of it on every other free neighbor; the copy's pin is the
// indicator of the neighbor being above the stepped-to vertex in the
// canonical order. Copies are degree-1 and identified as n + creation index.
class DerivedGraph {
 public:
  DerivedGraph(const Graph& g, const Pinning& tau);

  // Step the walk from `from` (the current tip) to `to`.
  void step(Vertex from, Vertex to);
  void undo();
  void reset();
  int steps() const { return static_cast<int>(journal_.size()); }

  std::vector<Vertex> neighbors_of(Vertex id) const;
  std::optional<Spin> pin_of(Vertex id) const;
  bool is_copy(Vertex id) const { return id >= g_->n; }
  bool removed(Vertex v) const { return removed_[v] != 0; }

  std::int64_t op_count() const { return ops_; }

 private:
  const Graph* g_;
  const Pinning* tau_;
  std::vector<char> removed_;
  // host -> indices into copy_info_ of live copies hanging on it
  std::vector<std::vector<int>> copies_at_;
  std::vector<std::pair<Vertex, Spin>> copy_info_;  // copy k: (host, pin); id = n + k
  struct StepRecord {
    Vertex removed_v;
    std::vector<Vertex> copy_hosts;
  };
  std::vector<StepRecord> journal_;
  mutable std::int64_t ops_ = 0;
};

// Incremental cursor over the self-avoiding-walk tree rooted at a vertex.
// Children of a node are the unpinned derived-graph neighbors of the walk
// tip; pinned neighbors (boundary-condition vertices and copies) appear as
// leaf children carrying only a spin.
class SawCursor {
 public:
  SawCursor(const Graph& g, const Pinning& tau, Vertex root);

  struct Children {
    std::vector<Vertex> free;       // extendable children, canonical order
    std::vector<Spin> pinned_spins; // pinned leaf children
  };
  Children children() const;

  void move(Vertex u);  // descend to a free child
  void ascend();        // back to the parent

  Vertex tip() const { return walk_.back(); }
  int depth() const { return static_cast<int>(walk_.size()) - 1; }
  const std::vector<Vertex>& walk() const { return walk_; }
  std::int64_t op_count() const { return derived_.op_count(); }

  const DerivedGraph& derived() const { return derived_; }

 private:
  DerivedGraph derived_;
  std::vector<Vertex> walk_;
};

// ---- boundary truncation ------------------------------------------------------

// Minimal rooted-tree access for the budgeted truncation rule.
class TreeCursor {
 public:
  virtual ~TreeCursor() = default;
  virtual int child_count() = 0;
  virtual void descend(int index) = 0;
  virtual void ascend() = 0;
};

struct BoundaryResult {
  std::vector<std::vector<int>> paths;  // child-index paths to boundary nodes
  int depth = 0;                        // max boundary depth
  std::int64_t size = 0;                // boundary plus root-component nodes visited
};

// Budget rule: a node with budget <= 1 joins the boundary; a leaf returns
// nothing; otherwise each of the d children recurses with budget N(1-delta)/d.
// The result is an antichain.
BoundaryResult boundary_on_tree(TreeCursor& cur, double delta, double N,
                                const std::function<void()>& on_boundary = {});

struct BoundarySet {
  std::vector<std::vector<Vertex>> walks;  // boundary nodes as root walks
  int depth = 0;
  std::int64_t size_tree = 0;
};

// Truncation of the SAW tree of (g, tau) rooted at `root`.
BoundarySet saw_boundary(const Graph& g, const Pinning& tau, Vertex root, double delta, double N);

// |S| bound exponent: x = log(1/(1-delta)) / log(Delta/(1-delta)).
double boundary_exponent(int Delta, double delta);

// ---- SAW tree with flower -------------------------------------------------------

// Oracle over the graph obtained from the SAW tree by replacing every
// boundary subtree with the walk's residual graph. Tree-region queries are
// answered from memory; flower queries replay the defining walk against the
// host graph in a shared scratch and undo afterwards. The root marginal is
// preserved exactly.
class FlowerOracle final : public SpinOracle {
 public:
  FlowerOracle(const Graph& g, const Pinning& tau, Vertex root, BoundarySet boundary);

  std::vector<Vertex> neighbors(Vertex gid) override;
  std::optional<Spin> pinning(Vertex gid) override;
  int max_degree() const override { return g_->max_degree; }

  Vertex root_id() const { return 0; }
  const std::vector<Vertex>& boundary_ids() const { return boundary_ids_; }

  // Dynamic reveals layered by the estimator on boundary vertices.
  void set_spin(Vertex gid, Spin s) { dynamic_[gid] = s; }
  void clear_spins() { dynamic_.clear(); }

  // Exact root marginal of spin 1 by the projective recursion over the tree
  // region; every boundary vertex must be pinned (structurally or via
  // set_spin) so the flowers factor out.
  double root_marginal_one(const TwoSpinParams& params) const;

  // Test support: the whole flower graph as an explicit instance.
  struct Materialized {
    Graph graph;
    Pinning pins;
    Vertex root;
    std::vector<Vertex> boundary;
  };
  Materialized materialize();

  std::int64_t tree_size() const { return static_cast<std::int64_t>(nodes_.size()); }

  // Structure of the tree region, for independent cross-checks in tests.
  struct TreeNodeView {
    Vertex parent = -1;
    std::optional<Spin> pin;
    bool is_boundary = false;
  };
  std::vector<TreeNodeView> tree_nodes() const;
  // Vertices of each flower (materialized gids; the boundary tip included).
  // Valid after materialize().
  std::vector<std::vector<Vertex>> flower_members() const;

 private:
  struct TreeNode {
    Vertex host = -1;  // walk tip (original vertex) or copy id for pinned leaves
    Vertex parent = -1;
    std::vector<Vertex> children;         // free children in T
    std::vector<Vertex> pinned_children;  // pinned leaf nodes
    std::optional<Spin> pin;
    int flower = -1;                      // boundary nodes: flower index
  };
  struct Flower {
    std::vector<Vertex> walk;
    std::map<Vertex, Vertex> local_to_gid;
    Vertex boundary_gid = -1;
  };

  void build(const BoundarySet& boundary);
  Vertex flower_gid(int flower, Vertex local);
  // Ensures the scratch holds the derived graph of this flower's walk; the
  // previous replay is undone lazily on the next switch.
  void ensure_replayed(int flower);

  const Graph* g_;
  const Pinning* tau_;
  Vertex root_vertex_;
  std::vector<TreeNode> nodes_;
  std::vector<Flower> flowers_;
  std::vector<Vertex> boundary_ids_;
  std::map<Vertex, std::pair<int, Vertex>> gid_to_flower_;  // gid -> (flower, local)
  std::map<Vertex, Spin> dynamic_;
  DerivedGraph scratch_;
  int replayed_flower_ = -1;
  Vertex next_gid_;
};

// ---- the unbiased estimator ------------------------------------------------------

// Perfect marginal sampler interface used as the black box: one draw at a
// vertex of an oracle-described instance.
using BlackBoxSampler = std::function<Spin(SpinOracle&, Vertex, RngStream&)>;

struct SawEstimateStats {
  std::int64_t boundary_size = 0;
  int boundary_depth = 0;
  std::int64_t tree_size = 0;
  std::int64_t sampler_calls = 0;
};

// Black-box AJ sampler for hardcore parameters (regime-checked against the
// oracle's max degree unless overridden).
BlackBoxSampler hardcore_black_box(double lambda, bool override_regime = false);
// Weak-interaction sampler as a black box for two-spin systems inside the
// weak window; the interaction matrix is rescaled to max-entry 1.
BlackBoxSampler weak_spin_black_box(const TwoSpinParams& params, int max_degree,
                                    bool override_regime = false);

// Draw the boundary spins coordinate-by-coordinate through the black box and
// return the root's conditional marginal of spin 1 from the tree recursion.
// Resets dynamic spins first, so one oracle serves many draws.
double saw_sample_once(FlowerOracle& oracle, const TwoSpinParams& params,
                       const BlackBoxSampler& sampler, RngStream& rng,
                       SawEstimateStats* stats = nullptr);

// End to end: unbiased estimate of mu_v(1 | tau) with budget N and gap delta.
// A pinned root short-circuits to its indicator.
double estimate_marginal_saw(const Graph& g, Vertex v, const Pinning& tau,
                             const TwoSpinParams& params, double delta, double N,
                             const BlackBoxSampler& sampler, RngStream& rng,
                             SawEstimateStats* stats = nullptr);

}  // namespace subquad
