#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "subquad/models.hpp"
#include "subquad/rng.hpp"

namespace subquad {

struct RegimeError : std::runtime_error {
  explicit RegimeError(const std::string& what) : std::runtime_error(what) {}
};

enum class CountingMode { Saw, Aggregate };

std::string to_string(CountingMode m);

struct CountingOptions {
  bool override_regime = false;
  double calib_saw = 1.0;        // multiplier on the saw-mode budget
  double calib_aggregate = 16.0; // multiplier on the aggregate-mode budget
  int chain_reps = 13;           // estimator repetitions per coordinate
  double amplify_eta = 0.0;      // >0: median of 2*ceil(log(1/eta))+1 runs
  int threads = 1;
};

struct EstimateReport {
  double z_hat = 0.0;
  double log_z_hat = 0.0;
  double sigma_weight = 0.0;
  double chain_product = 0.0;
  std::vector<double> coordinate_marginals;
  std::int64_t budget = 0;
  int chain_reps = 0;
  std::string mode;
  std::int64_t sampler_calls = 0;
  double wall_seconds = 0.0;
  std::uint64_t seed = 0;
};

// Per-coordinate unbiased estimator of mu_i(sigma*_i | sigma*(<i)); the
// contract is Var/E^2 <= eps^2/n.
using CoordinateEstimator =
    std::function<double(int coordinate, const Pinning& prefix, RngStream& rng)>;

// Chain-rule product with k repetitions per coordinate: each coordinate's
// estimate is the mean of k independent estimator runs conditioned on the
// growing sigma* prefix, and the product over coordinates lands within
// e^{+-eps} of mu(sigma*) with probability >= 3/4.
double estimate_config_probability(const std::vector<Spin>& sigma_star,
                                   const CoordinateEstimator& estimator, int k, RngStream& rng,
                                   std::vector<double>* per_coordinate = nullptr);

// Sample budget per coordinate. Saw mode: ceil(calib * b^-4 * n log n / eps^2).
// Aggregate mode: ceil(calib * n / (eps^2 b^2)).
std::int64_t choose_sample_budget(double b, int n, double epsilon, CountingMode mode,
                                  double calib);

// Marginal lower bound b used by the budgets, per model kind.
double model_marginal_bound(const Model& m);

// End-to-end randomized approximation of Z: Z_hat = weight(sigma*) / M with
// sigma* the ground configuration. Saw mode serves two-spin models (hardcore
// through the recursive sampler; other parameters through the weak-interaction
// sampler when inside its window). Aggregate mode serves two-spin, polymer and
// hypergraph models through their batched samplers.
EstimateReport fpras(const Model& m, double epsilon, CountingMode mode, std::uint64_t seed,
                     const CountingOptions& opt = {});

// Regime gate used by fpras and the CLI; throws RegimeError when the model
// parameters fall outside the supported regime for the mode.
void check_regime(const Model& m, CountingMode mode);

}  // namespace subquad
