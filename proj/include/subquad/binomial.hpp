#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "subquad/models.hpp"
#include "subquad/rng.hpp"

namespace subquad {

// Sampling oracle for binomial distributions up to a fixed capacity.
// Queries cost O(log n) expected: the count is split recursively at the
// median order statistic of the underlying uniforms (a Beta draw), with a
// direct Bernoulli-sum base case. Draws are exact at double-precision pmf
// granularity; Bernoulli-factory-grade exactness is out of scope.
class BinomialOracle {
 public:
  explicit BinomialOracle(std::int64_t capacity) : capacity_(capacity) {}

  std::int64_t capacity() const { return capacity_; }

  // X ~ Bin(n, p) for n <= capacity. Throws on n > capacity.
  std::int64_t sample(std::int64_t n, double p, RngStream& rng) const;

  // Running count of splits, useful in cost assertions.
  mutable std::int64_t split_count = 0;

 private:
  std::int64_t capacity_;
};

struct FrequencyVector {
  std::vector<std::int64_t> counts;

  std::int64_t total() const {
    std::int64_t t = 0;
    for (auto c : counts) t += c;
    return t;
  }
};

// M(N; probs) for a small dense support via q-1 chained binomial draws.
// probs must be nonnegative and sum to 1 within 1e-12.
FrequencyVector sample_multinomial_dense(std::int64_t N, const std::vector<double>& probs,
                                         const BinomialOracle& oracle, RngStream& rng);

// All polymers containing u of size <= k, paired with weights; used by the
// sparse multinomial and by reference samplers in tests.
std::vector<std::pair<Polymer, double>> enumerate_polymers(const PolymerModel& model, Vertex u,
                                                           int k);

// Memo for repeated polymer enumerations around the same vertices. Not
// shareable across concurrent tasks.
class PolymerEnumerator {
 public:
  explicit PolymerEnumerator(const PolymerModel& model) : model_(&model) {}

  const std::vector<std::pair<Polymer, double>>& at(Vertex u, int k);

 private:
  const PolymerModel* model_;
  std::map<std::pair<Vertex, int>, std::vector<std::pair<Polymer, double>>> cache_;
};

// Batched draw from the per-vertex polymer proposal distribution nu_u:
// each non-empty polymer containing u carries its own weight of mass, the
// rest of the mass returns the empty set. Counts for the empty set are
// implicit (N minus the mapped total). Works in two phases: geometric size
// cutoffs for all N trials at once, then per-cutoff enumeration of polymers
// up to that size with a reweighted multinomial.
struct PolymerDrawStats {
  int max_cutoff = 0;   // largest geometric cutoff seen
  int enum_calls = 0;   // polymer enumerations performed
};

std::map<Polymer, std::int64_t> sample_polymer_multinomial(const PolymerModel& model, Vertex u,
                                                           std::int64_t N,
                                                           const BinomialOracle& oracle,
                                                           RngStream& rng,
                                                           PolymerDrawStats* stats = nullptr,
                                                           PolymerEnumerator* memo = nullptr);

}  // namespace subquad
