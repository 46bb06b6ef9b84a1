#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <unordered_map>

#include "subquad/binomial.hpp"
#include "subquad/models.hpp"
#include "subquad/pinning.hpp"
#include "subquad/rng.hpp"

namespace subquad {

// Las Vegas samplers have unbounded worst case; every top-level call carries a
// frame cap with a distinct error so misuse is observable.
struct RecursionBudgetError : std::runtime_error {
  RecursionBudgetError() : std::runtime_error("sampler recursion budget exceeded") {}
};

struct SamplerOptions {
  std::int64_t frame_budget = 1'000'000;
  bool override_regime = false;
  // Test hook: shifts the oblivious-coin threshold of the hardcore sampler.
  double coin_bias = 0.0;
};

struct SamplerStats {
  std::int64_t frames = 0;   // recursive calls of the last top-level call
  std::int64_t coins = 0;    // uniform variates consumed
};

// ---- hardcore (Anand-Jerrum style) -----------------------------------------

// One perfect marginal draw at u for the hardcore model with fugacity lambda,
// conditioned on the oracle's pinning plus `unoccupied` pinned to 0. Requires
// lambda < 1/(Delta-1) unless overridden.
Spin aj_sample(SpinOracle& inst, double lambda, Vertex u, const PinList& unoccupied,
               RngStream& rng, const SamplerOptions& opt = {}, SamplerStats* stats = nullptr);

// Deterministic replay variant: uniforms come from the tape, and the sequence
// of (vertex, took-indecisive-branch) decisions is appended to `trace`.
struct AjDecision {
  Vertex vertex;
  bool indecisive;  // survived the oblivious coin
};
Spin aj_sample_traced(SpinOracle& inst, double lambda, Vertex u,
                      const std::function<double()>& tape, std::vector<AjDecision>& trace);

// ---- abstract scenario framework --------------------------------------------

// One drawn reveal plan: the ordered set S plus the exit behaviour recorded at
// draw time. A nonnegative on_complete / on_early short-circuits the exit to a
// point mass; otherwise the scenario's exit_pmf decides.
struct RevealPlan {
  std::vector<Vertex> order;
  Spin on_complete = -1;
  Spin on_early = -1;
};

struct EarlyExit {
  Vertex at;
  Spin revealed;
};

// The single extension point for perfect marginal samplers in the recursive
// reveal style: a reveal distribution nu, a continuation set, and exit
// samplers. All members must be pure given (instance, u, view, rng).
class Scenario {
 public:
  virtual ~Scenario() = default;
  virtual int spin_count() const = 0;

  virtual RevealPlan draw_plan(SpinOracle& inst, Vertex u, const PinView& view,
                               RngStream& rng) const = 0;

  // The plan histogram of N independent draws, for the aggregate sampler.
  virtual std::vector<std::pair<RevealPlan, std::int64_t>> draw_plan_batch(
      SpinOracle& inst, Vertex u, const PinView& view, std::int64_t N,
      const BinomialOracle& oracle, RngStream& rng) const = 0;

  // Spins of v that keep the reveal loop of u alive.
  virtual std::vector<Spin> continuation(SpinOracle& inst, Vertex u, Vertex v,
                                         const PinView& view) const = 0;

  // Exit distribution over spins when the plan's point-mass shortcuts do not
  // apply; `early` is set when a revealed spin left the continuation set.
  virtual std::vector<double> exit_pmf(SpinOracle& inst, Vertex u, const PinView& view,
                                       const RevealPlan& plan,
                                       const std::optional<EarlyExit>& early) const {
    (void)inst;
    (void)u;
    (void)view;
    (void)plan;
    (void)early;
    throw std::logic_error("scenario has no exit pmf");
  }
};

// Recursive abstract sampler over a scenario (single draw).
Spin ms_abstract(SpinOracle& inst, const Scenario& sc, Vertex u, const PinView& view,
                 RngStream& rng, const SamplerOptions& opt = {}, SamplerStats* stats = nullptr);

// ---- concrete scenarios ------------------------------------------------------

// Hardcore: S = free neighbors with probability lambda/(1+lambda); C = {0};
// completing a nonempty plan returns 1, everything else returns 0.
std::unique_ptr<Scenario> make_hardcore_scenario(double lambda);

// Weak-interaction q-spin systems: every neighbor enters S independently with
// probability 1/(2*Delta), u is revealed last when S is nonempty; the exit
// re-proposes from the field and rejects per revealed neighbour. The
// `literal_acceptance` flag switches to reading the acceptance product
// verbatim as an acceptance probability; it exists for cross-validation and
// is wrong on asymmetric instances.
std::unique_ptr<Scenario> make_weak_spin_scenario(const SpinSystem& sys,
                                                  bool literal_acceptance = false,
                                                  bool override_window = false);

// Polymer models: the reveal plan is a proposed polymer's closed neighbourhood
// (u first); continuation keeps ground spins; completion returns the
// polymer's spin at u.
std::unique_ptr<Scenario> make_polymer_scenario(const PolymerModel& model,
                                                std::shared_ptr<BinomialOracle> oracle);

// Standalone fast paths (same law as the scenario encodings; equivalence is
// tested).
Spin mms_spin(SpinOracle& inst, const SpinSystem& sys, Vertex u, const PinView& view,
              RngStream& rng, const SamplerOptions& opt = {}, SamplerStats* stats = nullptr);

Spin mms_polymer(SpinOracle& inst, const PolymerModel& model, Vertex u, const PinView& view,
                 const BinomialOracle& oracle, RngStream& rng, const SamplerOptions& opt = {},
                 SamplerStats* stats = nullptr, PolymerEnumerator* memo = nullptr);

// ---- hypergraph independent sets -------------------------------------------

// Lazily revealed fair coins indexed by update times <= 0 and the memo table
// of resolved spins. One context serves one stationary query chain; contexts
// are not shared across concurrent resolves.
struct ResolveContext {
  const Hypergraph* hyper = nullptr;
  RngStream rng{0};
  std::unordered_map<std::int64_t, int> coins;
  std::unordered_map<std::int64_t, Spin> memo;
  std::int64_t frames = 0;
  SamplerOptions options;
  SamplerStats* stats = nullptr;

  int coin(std::int64_t t);
};

// Spin X_t(v_t) of the stationary systematic-scan dynamics, t <= 0.
Spin hypergraph_resolve(ResolveContext& ctx, std::int64_t t);

// Stationary marginal draw for vertex v: enters the scan one full sweep in
// the past. Enforces 2^(k/2) >= sqrt(8e) k^2 Delta unless overridden.
Spin hypergraph_sample_vertex(const Hypergraph& h, Vertex v, RngStream rng,
                              const SamplerOptions& opt = {}, SamplerStats* stats = nullptr);

bool hypergraph_in_regime(const Hypergraph& h);

// Last update time t' <= t with t' == v (mod n).
std::int64_t prev_update_time(std::int64_t t, Vertex v, int n);

}  // namespace subquad
