#pragma once

#include <cstdint>
#include <vector>

namespace subquad {

// Compensated accumulator for long sums of nonnegative weights.
class KahanSum {
 public:
  void add(double x) {
    double y = x - carry_;
    double t = sum_ + y;
    carry_ = (t - sum_) - y;
    sum_ = t;
  }
  double value() const { return sum_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

// log(n choose k) via lgamma.
double log_choose(std::int64_t n, std::int64_t k);

// Exact binomial pmf P[Bin(n,p) = k], computed in log space.
double binomial_pmf(std::int64_t n, double p, std::int64_t k);

struct ChiSquareResult {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 1.0;
  bool pooled = false;  // small expected cells were merged
};

// One-sample goodness of fit against expected probabilities. Cells with
// expected count below `min_expected` are pooled into the neighbouring cell.
ChiSquareResult chi_square_gof(const std::vector<std::int64_t>& observed,
                               const std::vector<double>& expected_probs,
                               double min_expected = 5.0);

// Two-sample homogeneity test between two histograms over the same cells.
ChiSquareResult chi_square_two_sample(const std::vector<std::int64_t>& a,
                                      const std::vector<std::int64_t>& b,
                                      double min_expected = 5.0);

// Upper-tail probability of the chi-squared distribution with k dof.
double chi_square_tail(double statistic, int dof);

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
};

// Least-squares line through (x, y) pairs; used for log-log scaling fits.
SlopeFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

struct Moments {
  double mean = 0.0;
  double variance = 0.0;  // unbiased
  std::int64_t count = 0;
};

Moments sample_moments(const std::vector<double>& xs);

}  // namespace subquad
