#include "subquad/binomial.hpp"

#include <cmath>
#include <stdexcept>

namespace subquad {

namespace {

constexpr std::int64_t kDirectThreshold = 64;

}  // namespace

std::int64_t BinomialOracle::sample(std::int64_t n, double p, RngStream& rng) const {
  if (n < 0) throw std::invalid_argument("binomial needs n >= 0");
  if (n > capacity_) throw std::runtime_error("binomial oracle capacity exceeded");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("binomial needs p in [0,1]");

  std::int64_t acc = 0;
  while (n > kDirectThreshold) {
    ++split_count;
    // Median order statistic of n uniforms: U_(m) ~ Beta(m, n-m+1). Counting
    // the uniforms below p then conditions into one of the two halves.
    std::int64_t m = (n + 1) / 2;
    double v = rng.beta(static_cast<double>(m), static_cast<double>(n - m + 1));
    if (v <= 0.0 || v >= 1.0) continue;  // degenerate draw, retry
    if (p < v) {
      n = m - 1;
      p = p / v;
    } else {
      acc += m;
      n = n - m;
      p = (p - v) / (1.0 - v);
    }
    if (p < 0.0) p = 0.0;
    if (p > 1.0) p = 1.0;
  }
  for (std::int64_t i = 0; i < n; ++i) {
    if (rng.uniform() < p) ++acc;
  }
  return acc;
}

FrequencyVector sample_multinomial_dense(std::int64_t N, const std::vector<double>& probs,
                                         const BinomialOracle& oracle, RngStream& rng) {
  if (probs.empty()) throw std::invalid_argument("empty probability vector");
  if (probs.size() > 64) throw std::invalid_argument("dense multinomial support too large");
  double sum = 0.0;
  for (double p : probs) {
    if (p < 0.0) throw std::invalid_argument("negative probability");
    sum += p;
  }
  if (std::fabs(sum - 1.0) > 1e-12) throw std::invalid_argument("probabilities must sum to 1");

  FrequencyVector out;
  out.counts.assign(probs.size(), 0);
  std::int64_t remaining = N;
  double mass = 1.0;
  for (std::size_t i = 0; i + 1 < probs.size() && remaining > 0; ++i) {
    double cond = mass > 0.0 ? probs[i] / mass : 1.0;
    if (cond > 1.0) cond = 1.0;
    std::int64_t x = oracle.sample(remaining, cond, rng);
    out.counts[i] = x;
    remaining -= x;
    mass -= probs[i];
  }
  out.counts.back() += remaining;
  return out;
}

std::vector<std::pair<Polymer, double>> enumerate_polymers(const PolymerModel& model, Vertex u,
                                                           int k) {
  std::vector<std::pair<Polymer, double>> out;
  if (k < 1) return out;
  for (const auto& set : enumerate_connected_subgraphs(model.graph, u, k)) {
    std::vector<Spin> digits(set.size(), 0);
    for (;;) {
      Polymer p;
      p.vertices = set;
      p.spins.resize(set.size());
      for (std::size_t i = 0; i < set.size(); ++i) {
        Spin g = model.ground[set[i]];
        p.spins[i] = digits[i] >= g ? digits[i] + 1 : digits[i];
      }
      double w = model.weight(p);
      if (w > 0.0) out.emplace_back(std::move(p), w);
      std::size_t pos = 0;
      while (pos < digits.size() && digits[pos] == model.q - 2) digits[pos++] = 0;
      if (pos == digits.size()) break;
      ++digits[pos];
    }
  }
  return out;
}

const std::vector<std::pair<Polymer, double>>& PolymerEnumerator::at(Vertex u, int k) {
  auto key = std::make_pair(u, k);
  auto it = cache_.find(key);
  if (it != cache_.end()) return it->second;
  return cache_.emplace(key, enumerate_polymers(*model_, u, k)).first->second;
}

std::map<Polymer, std::int64_t> sample_polymer_multinomial(const PolymerModel& model, Vertex u,
                                                           std::int64_t N,
                                                           const BinomialOracle& oracle,
                                                           RngStream& rng,
                                                           PolymerDrawStats* stats,
                                                           PolymerEnumerator* memo) {
  double r = model.cutoff_rate();
  if (!(r > 0.0)) {
    throw std::runtime_error("polymer decay too weak: cutoff rate theta - 2 - log((q-1)Delta) <= 0");
  }
  std::map<Polymer, std::int64_t> out;
  if (N == 0) return out;

  // Phase 1: geometric size cutoffs for all trials, batched by chained
  // binomials. Cutoff value k means the trial may only propose polymers of
  // size <= k (k = 0 forces the empty proposal).
  const double succ = 1.0 - std::exp(-r);
  std::vector<std::int64_t> cutoff_counts;  // index k -> #trials with cutoff k
  std::int64_t remaining = N;
  while (remaining > 0) {
    std::int64_t x = oracle.sample(remaining, succ, rng);
    cutoff_counts.push_back(x);
    remaining -= x;
  }
  if (stats) stats->max_cutoff = static_cast<int>(cutoff_counts.size()) - 1;

  // Phase 2: per cutoff k, the conditional law reweights every polymer of
  // size <= k by exp(r*size); the remaining conditional mass is empty.
  std::vector<std::pair<Polymer, double>> scratch;
  for (std::size_t k = 1; k < cutoff_counts.size(); ++k) {
    std::int64_t trials = cutoff_counts[k];
    if (trials == 0) continue;
    if (stats) ++stats->enum_calls;
    const auto& polymers = memo ? memo->at(u, static_cast<int>(k))
                                : (scratch = enumerate_polymers(model, u, static_cast<int>(k)));
    std::int64_t left = trials;
    double mass_left = 1.0;
    double total_prob = 0.0;
    for (const auto& [poly, w] : polymers) {
      if (left == 0) break;
      double prob = w * std::exp(r * poly.size());
      total_prob += prob;
      if (total_prob > 1.0 + 1e-9) {
        throw std::runtime_error("polymer proposal mass exceeds 1; decay too weak for the cutoff");
      }
      double cond = mass_left > 0.0 ? prob / mass_left : 1.0;
      if (cond > 1.0) cond = 1.0;
      std::int64_t c = oracle.sample(left, cond, rng);
      if (c > 0) out[poly] += c;
      left -= c;
      mass_left -= prob;
      if (mass_left < 0.0) mass_left = 0.0;
    }
    // `left` trials fall to the empty set; implicit in the result.
  }
  return out;
}

}  // namespace subquad
