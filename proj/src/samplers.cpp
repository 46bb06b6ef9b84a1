#include "subquad/samplers.hpp"

#include <algorithm>
#include <cmath>

namespace subquad {

namespace {

struct CallCtx {
  RngStream* rng;
  const SamplerOptions* opt;
  SamplerStats* stats;
  std::int64_t frames = 0;

  void enter() {
    ++frames;
    if (stats) ++stats->frames;
    if (frames > opt->frame_budget) throw RecursionBudgetError();
  }
  double coin() {
    if (stats) ++stats->coins;
    return rng->uniform();
  }
};

Spin sample_pmf(const std::vector<double>& pmf, CallCtx& ctx) {
  double u = ctx.coin();
  double acc = 0.0;
  for (std::size_t c = 0; c < pmf.size(); ++c) {
    acc += pmf[c];
    if (u < acc) return static_cast<Spin>(c);
  }
  return static_cast<Spin>(pmf.size() - 1);
}

}  // namespace

// ---- hardcore ---------------------------------------------------------------

namespace {

Spin aj_rec(SpinOracle& inst, double lambda, Vertex u, PinList lam, CallCtx& ctx) {
  ctx.enter();
  if (auto s = lam.find(u)) return *s;
  if (auto s = inst.pinning(u)) return *s;
  if (ctx.coin() < 1.0 / (1.0 + lambda) + ctx.opt->coin_bias) return 0;
  for (Vertex v : inst.neighbors(u)) {
    std::optional<Spin> pin = lam.find(v);
    if (!pin) pin = inst.pinning(v);
    Spin s = pin ? *pin : aj_rec(inst, lambda, v, lam, ctx);
    if (s == 1) return 0;
    lam = lam.push(v, 0);
  }
  return 1;
}

}  // namespace

Spin aj_sample(SpinOracle& inst, double lambda, Vertex u, const PinList& unoccupied,
               RngStream& rng, const SamplerOptions& opt, SamplerStats* stats) {
  if (!opt.override_regime && inst.max_degree() > 1 &&
      lambda >= 1.0 / (inst.max_degree() - 1.0)) {
    throw std::runtime_error("hardcore sampler regime: lambda >= 1/(Delta-1); pass override");
  }
  CallCtx ctx{&rng, &opt, stats};
  return aj_rec(inst, lambda, u, unoccupied, ctx);
}

Spin aj_sample_traced(SpinOracle& inst, double lambda, Vertex u,
                      const std::function<double()>& tape, std::vector<AjDecision>& trace) {
  struct Rec {
    SpinOracle& inst;
    double lambda;
    const std::function<double()>& tape;
    std::vector<AjDecision>& trace;

    Spin run(Vertex w, PinList lam) {
      if (auto s = lam.find(w)) return *s;
      if (auto s = inst.pinning(w)) return *s;
      bool indecisive = !(tape() < 1.0 / (1.0 + lambda));
      trace.push_back({w, indecisive});
      if (!indecisive) return 0;
      for (Vertex v : inst.neighbors(w)) {
        std::optional<Spin> pin = lam.find(v);
        if (!pin) pin = inst.pinning(v);
        Spin s = pin ? *pin : run(v, lam);
        if (s == 1) return 0;
        lam = lam.push(v, 0);
      }
      return 1;
    }
  } rec{inst, lambda, tape, trace};
  return rec.run(u, PinList());
}

// ---- abstract sampler --------------------------------------------------------

namespace {

Spin ms_abstract_rec(SpinOracle& inst, const Scenario& sc, Vertex u, PinView view, CallCtx& ctx) {
  ctx.enter();
  if (auto s = view.get(u)) return *s;
  RevealPlan plan = sc.draw_plan(inst, u, view, *ctx.rng);
  for (Vertex v : plan.order) {
    Spin c = ms_abstract_rec(inst, sc, v, view, ctx);
    auto cont = sc.continuation(inst, u, v, view);
    if (!view.get(v)) view = view.with(v, c);
    if (std::find(cont.begin(), cont.end(), c) == cont.end()) {
      if (plan.on_early >= 0) return plan.on_early;
      return sample_pmf(sc.exit_pmf(inst, u, view, plan, EarlyExit{v, c}), ctx);
    }
  }
  if (plan.on_complete >= 0) return plan.on_complete;
  return sample_pmf(sc.exit_pmf(inst, u, view, plan, std::nullopt), ctx);
}

}  // namespace

Spin ms_abstract(SpinOracle& inst, const Scenario& sc, Vertex u, const PinView& view,
                 RngStream& rng, const SamplerOptions& opt, SamplerStats* stats) {
  CallCtx ctx{&rng, &opt, stats};
  return ms_abstract_rec(inst, sc, u, view, ctx);
}

// ---- hardcore scenario -------------------------------------------------------

namespace {

class HardcoreScenario final : public Scenario {
 public:
  explicit HardcoreScenario(double lambda) : lambda_(lambda) {}

  int spin_count() const override { return 2; }

  RevealPlan draw_plan(SpinOracle& inst, Vertex u, const PinView& view,
                       RngStream& rng) const override {
    RevealPlan plan;
    plan.on_early = 0;
    if (rng.uniform() < lambda_ / (1.0 + lambda_)) {
      plan.order = reveal_set(inst, u, view);
      plan.on_complete = 1;
    } else {
      plan.on_complete = 0;
    }
    return plan;
  }

  std::vector<std::pair<RevealPlan, std::int64_t>> draw_plan_batch(
      SpinOracle& inst, Vertex u, const PinView& view, std::int64_t N,
      const BinomialOracle& oracle, RngStream& rng) const override {
    std::int64_t survivors = oracle.sample(N, lambda_ / (1.0 + lambda_), rng);
    std::vector<std::pair<RevealPlan, std::int64_t>> out;
    if (N - survivors > 0) {
      RevealPlan oblivious;
      oblivious.on_complete = 0;
      oblivious.on_early = 0;
      out.emplace_back(std::move(oblivious), N - survivors);
    }
    if (survivors > 0) {
      RevealPlan probe;
      probe.order = reveal_set(inst, u, view);
      probe.on_complete = 1;
      probe.on_early = 0;
      out.emplace_back(std::move(probe), survivors);
    }
    return out;
  }

  std::vector<Spin> continuation(SpinOracle&, Vertex, Vertex, const PinView&) const override {
    return {0};
  }

 private:
  // Neighbors pinned to 0 are dead weight for the loop; occupied pins stay in
  // so they trigger the early exit exactly like a revealed 1.
  static std::vector<Vertex> reveal_set(SpinOracle& inst, Vertex u, const PinView& view) {
    std::vector<Vertex> order;
    for (Vertex v : inst.neighbors(u)) {
      auto pin = view.get(v);
      if (!pin || *pin == 1) order.push_back(v);
    }
    return order;
  }

  double lambda_;
};

}  // namespace

std::unique_ptr<Scenario> make_hardcore_scenario(double lambda) {
  return std::make_unique<HardcoreScenario>(lambda);
}

// ---- weak-interaction spin systems -------------------------------------------

namespace {

void check_weak_window(const SpinSystem& sys, bool override_window) {
  int Delta = std::max(1, sys.graph.max_degree);
  double lo = 1.0 - 1.0 / (2.0 * Delta);
  for (const auto& row : sys.interaction) {
    for (double a : row) {
      if ((a < lo - 1e-12 || a > 1.0 + 1e-12) && !override_window) {
        throw std::runtime_error("interaction outside the weak window [1-1/(2*Delta), 1]");
      }
    }
  }
}

class WeakSpinScenario final : public Scenario {
 public:
  WeakSpinScenario(const SpinSystem& sys, bool literal, bool override_window)
      : sys_(&sys), literal_(literal) {
    check_weak_window(sys, override_window);
    field_sum_ = 0.0;
    for (double f : sys.field) field_sum_ += f;
  }

  int spin_count() const override { return sys_->q; }

  RevealPlan draw_plan(SpinOracle& inst, Vertex u, const PinView&, RngStream& rng) const override {
    RevealPlan plan;
    double p = 1.0 / (2.0 * inst.max_degree());
    for (Vertex v : inst.neighbors(u)) {
      if (rng.uniform() < p) plan.order.push_back(v);
    }
    if (!plan.order.empty()) plan.order.push_back(u);
    return plan;
  }

  std::vector<std::pair<RevealPlan, std::int64_t>> draw_plan_batch(
      SpinOracle& inst, Vertex u, const PinView&, std::int64_t N, const BinomialOracle& oracle,
      RngStream& rng) const override {
    // Dense enumeration over neighborhood subsets.
    auto nbrs = inst.neighbors(u);
    if (nbrs.size() > 20) throw std::runtime_error("weak-spin batch: neighborhood too large");
    double p = 1.0 / (2.0 * inst.max_degree());
    std::vector<std::pair<RevealPlan, std::int64_t>> out;
    std::int64_t remaining = N;
    double mass_left = 1.0;
    const std::uint32_t subsets = 1u << nbrs.size();
    for (std::uint32_t mask = 0; mask < subsets && remaining > 0; ++mask) {
      double prob = 1.0;
      for (std::size_t i = 0; i < nbrs.size(); ++i) {
        prob *= (mask >> i) & 1u ? p : 1.0 - p;
      }
      double cond = mass_left > 0.0 ? std::min(1.0, prob / mass_left) : 1.0;
      bool last = mask + 1 == subsets;
      std::int64_t c = last ? remaining : oracle.sample(remaining, cond, rng);
      mass_left -= prob;
      if (c > 0) {
        RevealPlan plan;
        for (std::size_t i = 0; i < nbrs.size(); ++i) {
          if ((mask >> i) & 1u) plan.order.push_back(nbrs[i]);
        }
        if (!plan.order.empty()) plan.order.push_back(u);
        out.emplace_back(std::move(plan), c);
        remaining -= c;
      }
    }
    return out;
  }

  std::vector<Spin> continuation(SpinOracle&, Vertex, Vertex, const PinView&) const override {
    std::vector<Spin> all(sys_->q);
    for (int c = 0; c < sys_->q; ++c) all[c] = c;
    return all;
  }

  std::vector<double> exit_pmf(SpinOracle& inst, Vertex u, const PinView& view,
                               const RevealPlan& plan,
                               const std::optional<EarlyExit>&) const override {
    const int q = sys_->q;
    std::vector<double> pmf(q, 0.0);
    if (plan.order.empty()) {
      for (int c = 0; c < q; ++c) pmf[c] = sys_->field[c] / field_sum_;
      return pmf;
    }
    double two_delta = 2.0 * inst.max_degree();
    Spin tau_u = *view.get(u);
    double reject_mass = 0.0;
    for (int c = 0; c < q; ++c) {
      double accept = 1.0;
      for (std::size_t i = 0; i + 1 < plan.order.size(); ++i) {
        Spin tv = *view.get(plan.order[i]);
        double fire = std::clamp(two_delta * (1.0 - sys_->interaction[c][tv]), 0.0, 1.0);
        // Acceptance composes per-neighbour rejections: accept iff none
        // fires. The literal variant uses the product of the fire terms as
        // the acceptance probability; kept for cross-validation only.
        accept *= literal_ ? fire : 1.0 - fire;
      }
      double propose = sys_->field[c] / field_sum_;
      pmf[c] += propose * accept;
      reject_mass += propose * (1.0 - accept);
    }
    pmf[tau_u] += reject_mass;
    return pmf;
  }

 private:
  const SpinSystem* sys_;
  bool literal_;
  double field_sum_;
};

}  // namespace

std::unique_ptr<Scenario> make_weak_spin_scenario(const SpinSystem& sys, bool literal_acceptance,
                                                  bool override_window) {
  return std::make_unique<WeakSpinScenario>(sys, literal_acceptance, override_window);
}

namespace {

// Standalone recursion with explicit per-neighbour rejection coins; same law
// as the scenario encoding, implemented independently.
Spin mms_spin_rec(SpinOracle& inst, const SpinSystem& sys, double field_sum, Vertex u,
                  PinView view, CallCtx& ctx) {
  ctx.enter();
  if (auto s = view.get(u)) return *s;
  double p = 1.0 / (2.0 * inst.max_degree());
  std::vector<Vertex> revealed;
  for (Vertex v : inst.neighbors(u)) {
    if (ctx.coin() < p) revealed.push_back(v);
  }
  std::vector<Vertex> order = revealed;
  if (!order.empty()) order.push_back(u);
  for (Vertex v : order) {
    Spin c = mms_spin_rec(inst, sys, field_sum, v, view, ctx);
    if (!view.get(v)) view = view.with(v, c);
  }
  // Re-propose from the field, rejecting per revealed neighbour.
  double r = ctx.coin() * field_sum;
  Spin proposal = 0;
  double acc = 0.0;
  for (int c = 0; c < sys.q; ++c) {
    acc += sys.field[c];
    if (r < acc) {
      proposal = c;
      break;
    }
  }
  bool accept = true;
  double two_delta = 2.0 * inst.max_degree();
  for (Vertex v : revealed) {
    double fire = std::clamp(two_delta * (1.0 - sys.interaction[proposal][*view.get(v)]), 0.0, 1.0);
    if (ctx.coin() < fire) accept = false;
  }
  if (order.empty() || accept) return proposal;
  return *view.get(u);
}

}  // namespace

Spin mms_spin(SpinOracle& inst, const SpinSystem& sys, Vertex u, const PinView& view,
              RngStream& rng, const SamplerOptions& opt, SamplerStats* stats) {
  check_weak_window(sys, opt.override_regime);
  double field_sum = 0.0;
  for (double f : sys.field) field_sum += f;
  CallCtx ctx{&rng, &opt, stats};
  return mms_spin_rec(inst, sys, field_sum, u, view, ctx);
}

// ---- polymer -----------------------------------------------------------------

namespace {

std::vector<Vertex> closed_neighborhood_u_first(SpinOracle& inst, Vertex u, const Polymer& poly) {
  std::vector<Vertex> closed;
  for (Vertex v : poly.vertices) {
    closed.push_back(v);
    for (Vertex w : inst.neighbors(v)) closed.push_back(w);
  }
  std::sort(closed.begin(), closed.end());
  closed.erase(std::unique(closed.begin(), closed.end()), closed.end());
  std::vector<Vertex> order{u};
  for (Vertex v : closed) {
    if (v != u) order.push_back(v);
  }
  return order;
}

class PolymerScenario final : public Scenario {
 public:
  PolymerScenario(const PolymerModel& model, std::shared_ptr<BinomialOracle> oracle)
      : model_(&model), oracle_(std::move(oracle)), memo_(model) {}

  int spin_count() const override { return model_->q; }

  RevealPlan draw_plan(SpinOracle& inst, Vertex u, const PinView& view,
                       RngStream& rng) const override {
    auto draw = sample_polymer_multinomial(*model_, u, 1, *oracle_, rng, nullptr, &memo_);
    if (draw.empty()) return ground_plan(u);
    return plan_for(inst, u, view, draw.begin()->first);
  }

  std::vector<std::pair<RevealPlan, std::int64_t>> draw_plan_batch(
      SpinOracle& inst, Vertex u, const PinView& view, std::int64_t N, const BinomialOracle&,
      RngStream& rng) const override {
    auto draws = sample_polymer_multinomial(*model_, u, N, *oracle_, rng, nullptr, &memo_);
    std::vector<std::pair<RevealPlan, std::int64_t>> out;
    std::int64_t assigned = 0;
    for (const auto& [poly, count] : draws) {
      out.emplace_back(plan_for(inst, u, view, poly), count);
      assigned += count;
    }
    if (assigned < N) out.emplace_back(ground_plan(u), N - assigned);
    return out;
  }

  std::vector<Spin> continuation(SpinOracle&, Vertex, Vertex v, const PinView&) const override {
    return {model_->ground[v]};
  }

 private:
  RevealPlan ground_plan(Vertex u) const {
    RevealPlan plan;
    plan.on_complete = model_->ground[u];
    plan.on_early = model_->ground[u];
    return plan;
  }

  RevealPlan plan_for(SpinOracle& inst, Vertex u, const PinView& view, const Polymer& poly) const {
    // Proposals touching the pinning are rejected outright.
    for (Vertex v : poly.vertices) {
      if (view.get(v)) return ground_plan(u);
    }
    RevealPlan plan;
    plan.on_early = model_->ground[u];
    plan.on_complete = *poly.spin_of(u);
    plan.order = closed_neighborhood_u_first(inst, u, poly);
    return plan;
  }

  const PolymerModel* model_;
  std::shared_ptr<BinomialOracle> oracle_;
  mutable PolymerEnumerator memo_;
};

Spin mms_polymer_rec(SpinOracle& inst, const PolymerModel& model, Vertex u, PinView view,
                     const BinomialOracle& oracle, PolymerEnumerator& memo, CallCtx& ctx) {
  ctx.enter();
  if (auto s = view.get(u)) return *s;
  auto draw = sample_polymer_multinomial(model, u, 1, oracle, *ctx.rng, nullptr, &memo);
  if (draw.empty()) return model.ground[u];
  const Polymer& poly = draw.begin()->first;
  for (Vertex v : poly.vertices) {
    if (view.get(v)) return model.ground[u];
  }
  for (Vertex v : closed_neighborhood_u_first(inst, u, poly)) {
    Spin c = mms_polymer_rec(inst, model, v, view, oracle, memo, ctx);
    if (c != model.ground[v]) return model.ground[u];
    if (!view.get(v)) view = view.with(v, model.ground[v]);
  }
  return *poly.spin_of(u);
}

}  // namespace

std::unique_ptr<Scenario> make_polymer_scenario(const PolymerModel& model,
                                                std::shared_ptr<BinomialOracle> oracle) {
  return std::make_unique<PolymerScenario>(model, std::move(oracle));
}

Spin mms_polymer(SpinOracle& inst, const PolymerModel& model, Vertex u, const PinView& view,
                 const BinomialOracle& oracle, RngStream& rng, const SamplerOptions& opt,
                 SamplerStats* stats, PolymerEnumerator* memo) {
  CallCtx ctx{&rng, &opt, stats};
  if (memo) return mms_polymer_rec(inst, model, u, view, oracle, *memo, ctx);
  PolymerEnumerator local(model);
  return mms_polymer_rec(inst, model, u, view, oracle, local, ctx);
}

// ---- hypergraph independent sets -----------------------------------------------

int ResolveContext::coin(std::int64_t t) {
  auto it = coins.find(t);
  if (it != coins.end()) return it->second;
  int bit = rng.uniform() < 0.5 ? 0 : 1;
  if (stats) ++stats->coins;
  coins.emplace(t, bit);
  return bit;
}

std::int64_t prev_update_time(std::int64_t t, Vertex v, int n) {
  std::int64_t diff = (t - v) % n;
  if (diff < 0) diff += n;
  return t - diff;
}

Spin hypergraph_resolve(ResolveContext& ctx, std::int64_t t) {
  ++ctx.frames;
  if (ctx.stats) ++ctx.stats->frames;
  if (ctx.frames > ctx.options.frame_budget) throw RecursionBudgetError();
  if (auto it = ctx.memo.find(t); it != ctx.memo.end()) return it->second;
  const Hypergraph& h = *ctx.hyper;
  Vertex v = static_cast<Vertex>(((t % h.n) + h.n) % h.n);
  if (ctx.coin(t) == 0) {
    ctx.memo.emplace(t, 0);
    return 0;
  }
  for (int ei : h.incident_edges[v]) {
    const auto& e = h.edges[ei];
    bool coins_all_one = true;
    for (Vertex u : e) {
      if (u == v) continue;
      if (ctx.coin(prev_update_time(t, u, h.n)) == 0) {
        coins_all_one = false;
        break;
      }
    }
    if (!coins_all_one) continue;
    bool forced = true;
    for (Vertex u : e) {
      if (u == v) continue;
      if (hypergraph_resolve(ctx, prev_update_time(t, u, h.n)) == 0) {
        forced = false;
        break;
      }
    }
    if (forced) {
      ctx.memo.emplace(t, 0);
      return 0;
    }
  }
  ctx.memo.emplace(t, 1);
  return 1;
}

bool hypergraph_in_regime(const Hypergraph& h) {
  double k = h.uniformity;
  return std::pow(2.0, k / 2.0) >= std::sqrt(8.0 * M_E) * k * k * std::max(1, h.max_degree);
}

Spin hypergraph_sample_vertex(const Hypergraph& h, Vertex v, RngStream rng,
                              const SamplerOptions& opt, SamplerStats* stats) {
  if (!opt.override_regime && !hypergraph_in_regime(h)) {
    throw std::runtime_error("hypergraph sampler regime: 2^(k/2) < sqrt(8e) k^2 Delta; pass override");
  }
  ResolveContext ctx;
  ctx.hyper = &h;
  ctx.rng = rng;
  ctx.options = opt;
  ctx.stats = stats;
  return hypergraph_resolve(ctx, static_cast<std::int64_t>(v) - h.n);
}

}  // namespace subquad
