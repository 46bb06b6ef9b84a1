#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace subquad {

struct SuiteCheck {
  std::string name;
  bool pass = false;
  bool warn_only = false;  // scaling slopes report rather than gate
  std::string detail;
};

struct VerifyOptions {
  std::uint64_t seed = 20250809;
  // marginal oracle-equivalence suite
  std::int64_t marginal_draws = 100'000;
  double alpha = 1e-3;
  int corpus_max_n = 6;
  // batch fidelity suite
  std::int64_t batch_reps = 1'000;
  std::int64_t batch_size = 1'000;
  // coverage suite
  int coverage_trials = 400;
  double coverage_eps = 0.1;
  int coverage_min_pass = 280;
  // variance suite
  std::int64_t variance_seeds = 10'000;
  // scaling suite
  int slope_points_lo = 10;  // aggregate: N = 2^lo .. 2^hi
  int slope_points_hi = 20;
  int saw_n_lo = 8;  // saw: n = 2^lo .. 2^hi
  int saw_n_hi = 13;
  // fault injection hook for the marginal suite
  double coin_bias = 0.0;
};

std::vector<SuiteCheck> suite_marginals(const VerifyOptions& opt);
std::vector<SuiteCheck> suite_batch(const VerifyOptions& opt);
std::vector<SuiteCheck> suite_saw(const VerifyOptions& opt);
std::vector<SuiteCheck> suite_boundary(const VerifyOptions& opt);
std::vector<SuiteCheck> suite_coverage(const VerifyOptions& opt);
std::vector<SuiteCheck> suite_variance(const VerifyOptions& opt);
std::vector<SuiteCheck> suite_slopes(const VerifyOptions& opt);
std::vector<SuiteCheck> suite_determinism(const VerifyOptions& opt);

// All suites by name, in acceptance order.
std::vector<std::string> suite_names();
std::vector<SuiteCheck> run_suite(const std::string& name, const VerifyOptions& opt);

}  // namespace subquad
