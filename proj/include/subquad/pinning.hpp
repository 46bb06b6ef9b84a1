#pragma once

#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "subquad/graph.hpp"

namespace subquad {

// Persistent insert-only pinning overlay. Pushing shares the tail with the
// parent list, so branch proliferation in batched samplers never copies a
// whole pinning. Lookup walks the chain; chains stay short because they only
// hold the reveals of one recursion path.
class PinList {
 public:
  PinList() = default;

  PinList push(Vertex v, Spin s) const {
    auto node = std::make_shared<Node>();
    node->v = v;
    node->s = s;
    node->next = head_;
    node->len = length() + 1;
    return PinList(std::move(node));
  }

  std::optional<Spin> find(Vertex v) const {
    for (const Node* n = head_.get(); n != nullptr; n = n->next.get()) {
      if (n->v == v) return n->s;
    }
    return std::nullopt;
  }

  std::size_t length() const { return head_ ? head_->len : 0; }
  bool empty() const { return head_ == nullptr; }

  // Entries newest-first; shadowed duplicates are not produced by correct use.
  void collect(std::vector<std::pair<Vertex, Spin>>& out) const {
    for (const Node* n = head_.get(); n != nullptr; n = n->next.get()) {
      out.emplace_back(n->v, n->s);
    }
  }

 private:
  struct Node {
    Vertex v;
    Spin s;
    std::shared_ptr<const Node> next;
    std::size_t len = 1;
  };
  explicit PinList(std::shared_ptr<const Node> h) : head_(std::move(h)) {}
  std::shared_ptr<const Node> head_;
};

// Oracle access to the instance a marginal sampler runs on: adjacency and
// pinning queries only. Implementations: plain graphs, and the SAW-tree-with-
// flower structure whose adjacency is rebuilt on the fly.
class SpinOracle {
 public:
  virtual ~SpinOracle() = default;
  virtual std::vector<Vertex> neighbors(Vertex u) = 0;
  virtual std::optional<Spin> pinning(Vertex u) = 0;
  virtual int max_degree() const = 0;
};

class GraphOracle final : public SpinOracle {
 public:
  explicit GraphOracle(const Graph& g) : g_(&g), pins_(g.n, -1) {}
  GraphOracle(const Graph& g, const Pinning& p) : GraphOracle(g) {
    for (auto [v, s] : p.entries()) pins_[v] = s;
  }

  std::vector<Vertex> neighbors(Vertex u) override { return g_->neighbors(u); }
  std::optional<Spin> pinning(Vertex u) override {
    if (pins_[u] < 0) return std::nullopt;
    return pins_[u];
  }
  int max_degree() const override { return g_->max_degree; }

  void pin(Vertex v, Spin s) { pins_[v] = s; }
  void unpin(Vertex v) { pins_[v] = -1; }
  const Graph& graph() const { return *g_; }

 private:
  const Graph* g_;
  std::vector<Spin> pins_;
};

// A pinning view: local reveals layered over the oracle's own pins.
struct PinView {
  SpinOracle* oracle = nullptr;
  PinList local;

  std::optional<Spin> get(Vertex v) const {
    if (auto s = local.find(v)) return s;
    return oracle->pinning(v);
  }
  PinView with(Vertex v, Spin s) const { return {oracle, local.push(v, s)}; }
};

}  // namespace subquad
