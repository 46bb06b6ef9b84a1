#include "subquad/saw.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "subquad/samplers.hpp"

namespace subquad {

// ---- DerivedGraph ----------------------------------------------------------------

DerivedGraph::DerivedGraph(const Graph& g, const Pinning& tau)
    : g_(&g), tau_(&tau), removed_(g.n, 0), copies_at_(g.n) {}

void DerivedGraph::step(Vertex from, Vertex to) {
  if (to < 0 || to >= g_->n || removed_[to] || tau_->pinned(to)) {
    throw std::invalid_argument("walk must step to a free original vertex");
  }
  StepRecord rec;
  rec.removed_v = from;
  removed_[from] = 1;
  ++ops_;
  for (Vertex w : g_->neighbors(from)) {
    ++ops_;
    if (w == to || removed_[w] || tau_->pinned(w)) continue;
    // Copy of `from`, pinned to the indicator of w being above `to` in the
    // canonical order, hung on w. Copies on pinned hosts would join two fixed
    // spins and cannot shift any marginal, so they are not materialized.
    Spin pin = w > to ? 1 : 0;
    int idx = static_cast<int>(copy_info_.size());
    copy_info_.emplace_back(w, pin);
    copies_at_[w].push_back(idx);
    rec.copy_hosts.push_back(w);
  }
  journal_.push_back(std::move(rec));
}

void DerivedGraph::undo() {
  if (journal_.empty()) throw std::logic_error("nothing to undo");
  StepRecord& rec = journal_.back();
  for (auto it = rec.copy_hosts.rbegin(); it != rec.copy_hosts.rend(); ++it) {
    ++ops_;
    copies_at_[*it].pop_back();
    copy_info_.pop_back();
  }
  removed_[rec.removed_v] = 0;
  journal_.pop_back();
  ++ops_;
}

void DerivedGraph::reset() {
  while (!journal_.empty()) undo();
}

std::vector<Vertex> DerivedGraph::neighbors_of(Vertex id) const {
  std::vector<Vertex> out;
  if (is_copy(id)) {
    Vertex host = copy_info_[id - g_->n].first;
    if (!removed_[host]) out.push_back(host);
    ++ops_;
    return out;
  }
  if (removed_[id]) throw std::invalid_argument("queried a removed vertex");
  for (Vertex w : g_->neighbors(id)) {
    ++ops_;
    if (!removed_[w]) out.push_back(w);
  }
  for (int idx : copies_at_[id]) {
    ++ops_;
    out.push_back(g_->n + idx);
  }
  return out;
}

std::optional<Spin> DerivedGraph::pin_of(Vertex id) const {
  ++ops_;
  if (is_copy(id)) return copy_info_[id - g_->n].second;
  return tau_->get(id);
}

// ---- SawCursor --------------------------------------------------------------------

SawCursor::SawCursor(const Graph& g, const Pinning& tau, Vertex root)
    : derived_(g, tau), walk_{root} {
  if (root < 0 || root >= g.n) throw std::invalid_argument("root out of range");
}

SawCursor::Children SawCursor::children() const {
  Children out;
  for (Vertex id : derived_.neighbors_of(tip())) {
    auto pin = derived_.pin_of(id);
    if (pin) {
      out.pinned_spins.push_back(*pin);
    } else {
      out.free.push_back(id);
    }
  }
  std::sort(out.free.begin(), out.free.end());
  return out;
}

void SawCursor::move(Vertex u) {
  derived_.step(tip(), u);
  walk_.push_back(u);
}

void SawCursor::ascend() {
  if (walk_.size() <= 1) throw std::logic_error("cursor already at the root");
  derived_.undo();
  walk_.pop_back();
}

// ---- boundary ---------------------------------------------------------------------

namespace {

struct BoundaryWalker {
  TreeCursor& cur;
  double delta;
  const std::function<void()>& on_boundary;
  BoundaryResult result;
  std::vector<int> path;

  void visit(double budget) {
    ++result.size;
    if (budget <= 1.0) {
      result.paths.push_back(path);
      result.depth = std::max(result.depth, static_cast<int>(path.size()));
      if (on_boundary) on_boundary();
      return;
    }
    int d = cur.child_count();
    if (d == 0) return;
    double child_budget = budget * (1.0 - delta) / d;
    for (int i = 0; i < d; ++i) {
      cur.descend(i);
      path.push_back(i);
      visit(child_budget);
      path.pop_back();
      cur.ascend();
    }
  }
};

}  // namespace

BoundaryResult boundary_on_tree(TreeCursor& cur, double delta, double N,
                                const std::function<void()>& on_boundary) {
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must be in (0,1)");
  if (!(N > 0.0)) throw std::invalid_argument("budget must be positive");
  BoundaryWalker walker{cur, delta, on_boundary, {}, {}};
  walker.visit(N);
  return walker.result;
}

namespace {

class SawTreeCursor final : public TreeCursor {
 public:
  explicit SawTreeCursor(SawCursor& cur) : cur_(&cur) { refresh(); }

  int child_count() override { return static_cast<int>(free_stack_.back().size()); }

  void descend(int index) override {
    cur_->move(free_stack_.back()[index]);
    refresh();
  }

  void ascend() override {
    cur_->ascend();
    free_stack_.pop_back();
  }

 private:
  void refresh() { free_stack_.push_back(cur_->children().free); }

  SawCursor* cur_;
  std::vector<std::vector<Vertex>> free_stack_;
};

}  // namespace

BoundarySet saw_boundary(const Graph& g, const Pinning& tau, Vertex root, double delta, double N) {
  SawCursor cur(g, tau, root);
  SawTreeCursor adapter(cur);
  BoundarySet out;
  auto res = boundary_on_tree(adapter, delta, N, [&] { out.walks.push_back(cur.walk()); });
  out.depth = res.depth;
  out.size_tree = res.size;
  return out;
}

double boundary_exponent(int Delta, double delta) {
  return std::log(1.0 / (1.0 - delta)) / std::log(Delta / (1.0 - delta));
}

// ---- FlowerOracle -----------------------------------------------------------------

FlowerOracle::FlowerOracle(const Graph& g, const Pinning& tau, Vertex root, BoundarySet boundary)
    : g_(&g), tau_(&tau), root_vertex_(root), scratch_(g, tau) {
  build(boundary);
  next_gid_ = static_cast<Vertex>(nodes_.size());
}

void FlowerOracle::build(const BoundarySet& boundary) {
  // Antichain check: no boundary walk may extend another.
  std::set<std::vector<Vertex>> walk_set(boundary.walks.begin(), boundary.walks.end());
  {
    std::vector<std::vector<Vertex>> sorted(boundary.walks);
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
      const auto& a = sorted[i];
      const auto& b = sorted[i + 1];
      if (a.size() <= b.size() && std::equal(a.begin(), a.end(), b.begin())) {
        throw std::invalid_argument("boundary is not an antichain");
      }
    }
  }

  SawCursor cur(*g_, *tau_, root_vertex_);

  // Depth-first construction of the explored tree region.
  struct Builder {
    FlowerOracle& self;
    SawCursor& cur;
    const std::set<std::vector<Vertex>>& walks;

    Vertex visit(Vertex parent) {
      Vertex gid = static_cast<Vertex>(self.nodes_.size());
      self.nodes_.emplace_back();
      self.nodes_[gid].host = cur.tip();
      self.nodes_[gid].parent = parent;
      if (walks.count(cur.walk())) {
        self.nodes_[gid].flower = static_cast<int>(self.flowers_.size());
        Flower f;
        f.walk = cur.walk();
        f.boundary_gid = gid;
        f.local_to_gid[cur.tip()] = gid;
        self.flowers_.push_back(std::move(f));
        self.boundary_ids_.push_back(gid);
        return gid;
      }
      auto ch = cur.children();
      for (Spin s : ch.pinned_spins) {
        Vertex leaf = static_cast<Vertex>(self.nodes_.size());
        self.nodes_.emplace_back();
        self.nodes_[leaf].parent = gid;
        self.nodes_[leaf].pin = s;
        self.nodes_[gid].pinned_children.push_back(leaf);
      }
      for (Vertex u : ch.free) {
        cur.move(u);
        Vertex child = visit(gid);
        cur.ascend();
        self.nodes_[gid].children.push_back(child);
      }
      return gid;
    }
  } builder{*this, cur, walk_set};

  if (tau_->pinned(root_vertex_)) {
    // Degenerate: a pinned root is its own one-node tree.
    nodes_.emplace_back();
    nodes_[0].host = root_vertex_;
    nodes_[0].pin = tau_->get(root_vertex_);
    return;
  }
  builder.visit(-1);
}

Vertex FlowerOracle::flower_gid(int flower, Vertex local) {
  Flower& f = flowers_[flower];
  auto it = f.local_to_gid.find(local);
  if (it != f.local_to_gid.end()) return it->second;
  Vertex gid = next_gid_++;
  f.local_to_gid.emplace(local, gid);
  gid_to_flower_.emplace(gid, std::make_pair(flower, local));
  return gid;
}

void FlowerOracle::ensure_replayed(int flower) {
  if (replayed_flower_ == flower) return;
  scratch_.reset();
  const auto& walk = flowers_[flower].walk;
  for (std::size_t i = 0; i + 1 < walk.size(); ++i) scratch_.step(walk[i], walk[i + 1]);
  replayed_flower_ = flower;
}

std::vector<Vertex> FlowerOracle::neighbors(Vertex gid) {
  if (gid < static_cast<Vertex>(nodes_.size())) {
    const TreeNode& node = nodes_[gid];
    if (node.flower < 0) {
      std::vector<Vertex> out;
      if (node.parent >= 0) out.push_back(node.parent);
      out.insert(out.end(), node.children.begin(), node.children.end());
      out.insert(out.end(), node.pinned_children.begin(), node.pinned_children.end());
      return out;
    }
    // Boundary node: tree parent plus the flower side of the tip.
    std::vector<Vertex> out;
    if (node.parent >= 0) out.push_back(node.parent);
    ensure_replayed(node.flower);
    for (Vertex local : scratch_.neighbors_of(node.host)) {
      out.push_back(flower_gid(node.flower, local));
    }
    return out;
  }
  auto it = gid_to_flower_.find(gid);
  if (it == gid_to_flower_.end()) throw std::invalid_argument("unknown vertex id");
  auto [flower, local] = it->second;
  ensure_replayed(flower);
  std::vector<Vertex> out;
  for (Vertex nlocal : scratch_.neighbors_of(local)) {
    out.push_back(flower_gid(flower, nlocal));
  }
  return out;
}

std::optional<Spin> FlowerOracle::pinning(Vertex gid) {
  if (auto it = dynamic_.find(gid); it != dynamic_.end()) return it->second;
  if (gid < static_cast<Vertex>(nodes_.size())) {
    const TreeNode& node = nodes_[gid];
    if (node.pin) return node.pin;
    return std::nullopt;
  }
  auto it = gid_to_flower_.find(gid);
  if (it == gid_to_flower_.end()) throw std::invalid_argument("unknown vertex id");
  auto [flower, local] = it->second;
  ensure_replayed(flower);
  return scratch_.pin_of(local);
}

double FlowerOracle::root_marginal_one(const TwoSpinParams& params) const {
  // One descending sweep: nodes are in DFS order, so every child has a larger
  // id than its parent and can fold its factor into the parent's running
  // projective product.
  const std::size_t count = nodes_.size();
  std::vector<double> num(count, params.lambda), den(count, 1.0);
  for (std::size_t i = count; i-- > 0;) {
    const TreeNode& node = nodes_[i];
    double p1, p0;
    if (auto it = dynamic_.find(static_cast<Vertex>(i)); it != dynamic_.end()) {
      p1 = it->second == 1 ? 1.0 : 0.0;
      p0 = 1.0 - p1;
    } else if (node.pin) {
      p1 = *node.pin == 1 ? 1.0 : 0.0;
      p0 = 1.0 - p1;
    } else if (node.flower >= 0) {
      throw std::runtime_error("boundary vertex left unpinned in the tree recursion");
    } else {
      p1 = num[i];
      p0 = den[i];
      if (p1 == 0.0 && p0 == 0.0) throw std::runtime_error("infeasible instance in tree recursion");
    }
    if (i == 0) return p1 / (p1 + p0);
    std::size_t parent = static_cast<std::size_t>(node.parent);
    num[parent] *= params.beta * p1 + p0;
    den[parent] *= p1 + params.gamma * p0;
    double m = std::max(num[parent], den[parent]);
    if (m > 0.0) {
      num[parent] /= m;
      den[parent] /= m;
    }
  }
  throw std::logic_error("empty tree");
}

std::vector<FlowerOracle::TreeNodeView> FlowerOracle::tree_nodes() const {
  std::vector<TreeNodeView> out;
  out.reserve(nodes_.size());
  for (const TreeNode& n : nodes_) {
    out.push_back({n.parent, n.pin, n.flower >= 0});
  }
  return out;
}

std::vector<std::vector<Vertex>> FlowerOracle::flower_members() const {
  std::vector<std::vector<Vertex>> out(flowers_.size());
  for (std::size_t f = 0; f < flowers_.size(); ++f) {
    for (const auto& [local, gid] : flowers_[f].local_to_gid) out[f].push_back(gid);
    std::sort(out[f].begin(), out[f].end());
  }
  return out;
}

FlowerOracle::Materialized FlowerOracle::materialize() {
  Materialized out;
  out.root = 0;
  out.boundary = boundary_ids_;
  std::vector<std::pair<Vertex, Vertex>> edges;
  std::set<Vertex> seen{0};
  std::vector<Vertex> queue{0};
  Pinning pins;
  while (!queue.empty()) {
    Vertex u = queue.back();
    queue.pop_back();
    if (auto s = pinning(u)) pins.set(u, *s);
    for (Vertex v : neighbors(u)) {
      if (u < v) edges.emplace_back(u, v);
      if (seen.insert(v).second) queue.push_back(v);
    }
  }
  Vertex max_id = 0;
  for (Vertex v : seen) max_id = std::max(max_id, v);
  out.graph = Graph::from_edges(max_id + 1, edges);
  out.pins = pins;
  return out;
}

// ---- estimator ---------------------------------------------------------------------

BlackBoxSampler hardcore_black_box(double lambda, bool override_regime) {
  return [lambda, override_regime](SpinOracle& inst, Vertex u, RngStream& rng) {
    SamplerOptions opt;
    opt.override_regime = override_regime;
    return aj_sample(inst, lambda, u, PinList(), rng, opt);
  };
}

BlackBoxSampler weak_spin_black_box(const TwoSpinParams& params, int max_degree,
                                    bool override_regime) {
  // Rescale the interaction matrix to max entry 1; marginals are unchanged.
  double scale = std::max({params.beta, params.gamma, 1.0});
  auto sys = std::make_shared<SpinSystem>();
  sys->q = 2;
  sys->interaction = {{params.gamma / scale, 1.0 / scale}, {1.0 / scale, params.beta / scale}};
  sys->field = {1.0, params.lambda};
  sys->graph.n = 0;
  sys->graph.max_degree = max_degree;
  bool override_window = override_regime;
  return [sys, override_window](SpinOracle& inst, Vertex u, RngStream& rng) {
    SamplerOptions opt;
    opt.override_regime = override_window;
    return mms_spin(inst, *sys, u, PinView{&inst, PinList()}, rng, opt);
  };
}

double saw_sample_once(FlowerOracle& oracle, const TwoSpinParams& params,
                       const BlackBoxSampler& sampler, RngStream& rng, SawEstimateStats* stats) {
  oracle.clear_spins();
  for (Vertex s : oracle.boundary_ids()) {
    Spin spin;
    if (auto pin = oracle.pinning(s)) {
      spin = *pin;
    } else {
      spin = sampler(oracle, s, rng);
      if (stats) ++stats->sampler_calls;
    }
    oracle.set_spin(s, spin);
  }
  return oracle.root_marginal_one(params);
}

double estimate_marginal_saw(const Graph& g, Vertex v, const Pinning& tau,
                             const TwoSpinParams& params, double delta, double N,
                             const BlackBoxSampler& sampler, RngStream& rng,
                             SawEstimateStats* stats) {
  if (auto s = tau.get(v)) return *s == 1 ? 1.0 : 0.0;
  BoundarySet boundary = saw_boundary(g, tau, v, delta, N);
  if (stats) {
    stats->boundary_size = static_cast<std::int64_t>(boundary.walks.size());
    stats->boundary_depth = boundary.depth;
  }
  FlowerOracle oracle(g, tau, v, std::move(boundary));
  if (stats) stats->tree_size = oracle.tree_size();
  return saw_sample_once(oracle, params, sampler, rng, stats);
}

}  // namespace subquad
