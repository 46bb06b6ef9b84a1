#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>

#include "subquad/binomial.hpp"
#include "subquad/samplers.hpp"

namespace subquad {

struct LevelCapError : std::runtime_error {
  LevelCapError() : std::runtime_error("automaton level cap exceeded") {}
};

struct AggregateStats {
  std::int64_t recursive_calls = 0;
  std::int64_t binomial_draws = 0;
};

// Batched hardcore sampler: distributed identically to the sum of N
// independent aj_sample outcomes at u with `unoccupied` pinned to 0.
// Surviving mass is threaded through the neighbor recursion; the count
// returned plus the counts that exited early always total the call's N.
std::int64_t aggregate_aj(SpinOracle& inst, double lambda, Vertex u, const PinList& unoccupied,
                          std::int64_t N, const BinomialOracle& oracle, RngStream& rng,
                          const SamplerOptions& opt = {}, AggregateStats* stats = nullptr);

// Batched abstract sampler over a scenario: the per-spin histogram of N
// independent ms_abstract runs.
FrequencyVector aggregate_ms_abstract(SpinOracle& inst, const Scenario& sc, Vertex u,
                                      const PinView& view, std::int64_t N,
                                      const BinomialOracle& oracle, RngStream& rng,
                                      const SamplerOptions& opt = {},
                                      AggregateStats* stats = nullptr);

// ---- probabilistic automata ---------------------------------------------------

// Opaque automaton state: `key` is the canonical serialization used for
// aggregation and hashing; `payload` lets encoders avoid reparsing.
struct AutomatonState {
  std::string key;
  std::shared_ptr<const void> payload;
};

class Automaton {
 public:
  virtual ~Automaton() = default;
  virtual AutomatonState initial() const = 0;
  virtual bool is_absorbing(const AutomatonState& s) const = 0;
  // Label of an absorbing state (the sampler output it represents).
  virtual std::string absorb_label(const AutomatonState& s) const = 0;
  // Successor distribution of a non-absorbing state; probabilities sum to 1
  // and the support is bounded by width_bound().
  virtual std::vector<std::pair<AutomatonState, double>> transitions(
      const AutomatonState& s) const = 0;
  virtual int width_bound() const = 0;
  // Geometric tail parameters (C, alpha) when known for the instance.
  virtual std::optional<std::pair<double, double>> decay() const { return std::nullopt; }
};

struct BatchStats {
  std::vector<std::int64_t> level_occupancy;  // distinct states per level
  std::int64_t transitions = 0;
};

// Jointly simulates N independent runs by advancing sparse level maps; the
// output maps each absorbing label to the number of runs ending there.
// The level cap is 64*log_{D/alpha}(C*N) when decay parameters are known and
// 10^6 otherwise; exceeding it raises LevelCapError.
std::map<std::string, std::int64_t> automaton_batch(const Automaton& a, std::int64_t N,
                                                    const BinomialOracle& oracle, RngStream& rng,
                                                    BatchStats* stats = nullptr);

// One run, driven by the stream (for oracle comparisons) or by a fixed
// uniform tape (for trace replays). Returns the absorbing label; `keys`,
// when given, records the state keys along the path.
std::string automaton_run_single(const Automaton& a, RngStream& rng,
                                 std::vector<std::string>* keys = nullptr);
std::string automaton_run_single(const Automaton& a, const std::function<double()>& tape,
                                 std::vector<std::string>* keys = nullptr);

// Hardcore sampler as a call-stack automaton: states are stacks of
// ((vertex, pinning view), phase) frames; the only coin is the oblivious/
// indecisive split, so the width is 2. Single-run law equals aj_sample.
std::unique_ptr<Automaton> encode_aj_automaton(const Graph& g, double lambda, Vertex u,
                                               const Pinning& unoccupied = {});

// Hypergraph independent-set resolver as an automaton: state = resolve call
// stack plus revealed coins and memo entries; branching only on the first
// revelation of a coin (width 2). Single-run law equals the stationary
// resolver at v.
std::unique_ptr<Automaton> encode_hypergraph_automaton(const Hypergraph& h, Vertex v);

}  // namespace subquad
