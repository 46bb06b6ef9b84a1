#include "subquad/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace subquad {

double log_choose(std::int64_t n, std::int64_t k) {
  if (k < 0 || k > n) return -std::numeric_limits<double>::infinity();
  return std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) -
         std::lgamma(static_cast<double>(n - k) + 1.0);
}

double binomial_pmf(std::int64_t n, double p, std::int64_t k) {
  if (k < 0 || k > n) return 0.0;
  if (p <= 0.0) return k == 0 ? 1.0 : 0.0;
  if (p >= 1.0) return k == n ? 1.0 : 0.0;
  double lp = log_choose(n, k) + k * std::log(p) + (n - k) * std::log1p(-p);
  return std::exp(lp);
}

namespace {

// Regularized upper incomplete gamma Q(a, x), by series for x < a+1 and
// continued fraction otherwise.
double gamma_q(double a, double x) {
  if (x < 0.0 || a <= 0.0) throw std::invalid_argument("gamma_q domain");
  if (x == 0.0) return 1.0;
  const double lg = std::lgamma(a);
  if (x < a + 1.0) {
    // P(a,x) by series, return 1 - P.
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int i = 0; i < 500; ++i) {
      ap += 1.0;
      del *= x / ap;
      sum += del;
      if (std::fabs(del) < std::fabs(sum) * 1e-15) break;
    }
    double p = sum * std::exp(-x + a * std::log(x) - lg);
    return std::clamp(1.0 - p, 0.0, 1.0);
  }
  // Lentz continued fraction for Q.
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 500; ++i) {
    double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-15) break;
  }
  double q = std::exp(-x + a * std::log(x) - lg) * h;
  return std::clamp(q, 0.0, 1.0);
}

}  // namespace

double chi_square_tail(double statistic, int dof) {
  if (dof <= 0) return 1.0;
  if (statistic <= 0.0) return 1.0;
  return gamma_q(0.5 * dof, 0.5 * statistic);
}

ChiSquareResult chi_square_gof(const std::vector<std::int64_t>& observed,
                               const std::vector<double>& expected_probs,
                               double min_expected) {
  if (observed.size() != expected_probs.size()) {
    throw std::invalid_argument("cell count mismatch");
  }
  std::int64_t total = 0;
  for (auto o : observed) total += o;
  // Pool cells with small expectation; keep pooling order deterministic by
  // walking cells in expectation-descending order and merging the tail.
  std::vector<std::size_t> idx(observed.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return expected_probs[a] > expected_probs[b];
  });
  std::vector<double> exp_counts;
  std::vector<double> obs_counts;
  double pool_exp = 0.0, pool_obs = 0.0;
  bool pooled = false;
  for (std::size_t i : idx) {
    double e = expected_probs[i] * static_cast<double>(total);
    if (e >= min_expected) {
      exp_counts.push_back(e);
      obs_counts.push_back(static_cast<double>(observed[i]));
    } else {
      pooled = true;
      pool_exp += e;
      pool_obs += static_cast<double>(observed[i]);
    }
  }
  if (pool_exp > 0.0 || pool_obs > 0.0) {
    exp_counts.push_back(pool_exp);
    obs_counts.push_back(pool_obs);
  }
  ChiSquareResult r;
  r.pooled = pooled;
  if (exp_counts.size() < 2) {
    r.dof = 0;
    r.p_value = 1.0;
    return r;
  }
  double stat = 0.0;
  for (std::size_t i = 0; i < exp_counts.size(); ++i) {
    if (exp_counts[i] <= 0.0) {
      if (obs_counts[i] > 0.0) {
        // Mass observed where none is possible: certain rejection.
        r.statistic = std::numeric_limits<double>::infinity();
        r.dof = static_cast<int>(exp_counts.size()) - 1;
        r.p_value = 0.0;
        return r;
      }
      continue;
    }
    double d = obs_counts[i] - exp_counts[i];
    stat += d * d / exp_counts[i];
  }
  r.statistic = stat;
  r.dof = static_cast<int>(exp_counts.size()) - 1;
  r.p_value = chi_square_tail(stat, r.dof);
  return r;
}

ChiSquareResult chi_square_two_sample(const std::vector<std::int64_t>& a,
                                      const std::vector<std::int64_t>& b,
                                      double min_expected) {
  if (a.size() != b.size()) throw std::invalid_argument("cell count mismatch");
  std::int64_t ta = 0, tb = 0;
  for (auto x : a) ta += x;
  for (auto x : b) tb += x;
  if (ta == 0 || tb == 0) throw std::invalid_argument("empty sample");
  // Merge small cells (by combined count) into a tail pool.
  std::vector<std::size_t> idx(a.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) {
    return a[x] + b[x] > a[y] + b[y];
  });
  double grand = static_cast<double>(ta + tb);
  std::vector<double> ca, cb;
  double pa = 0, pb = 0;
  bool pooled = false;
  for (std::size_t i : idx) {
    double col = static_cast<double>(a[i] + b[i]);
    double min_row_exp = col * std::min(ta, tb) / grand;
    if (min_row_exp >= min_expected) {
      ca.push_back(static_cast<double>(a[i]));
      cb.push_back(static_cast<double>(b[i]));
    } else {
      pooled = true;
      pa += static_cast<double>(a[i]);
      pb += static_cast<double>(b[i]);
    }
  }
  if (pa > 0.0 || pb > 0.0) {
    ca.push_back(pa);
    cb.push_back(pb);
  }
  ChiSquareResult r;
  r.pooled = pooled;
  if (ca.size() < 2) {
    r.dof = 0;
    r.p_value = 1.0;
    return r;
  }
  double stat = 0.0;
  for (std::size_t i = 0; i < ca.size(); ++i) {
    double col = ca[i] + cb[i];
    if (col <= 0.0) continue;
    double ea = col * static_cast<double>(ta) / grand;
    double eb = col * static_cast<double>(tb) / grand;
    stat += (ca[i] - ea) * (ca[i] - ea) / ea;
    stat += (cb[i] - eb) * (cb[i] - eb) / eb;
  }
  r.statistic = stat;
  r.dof = static_cast<int>(ca.size()) - 1;
  r.p_value = chi_square_tail(stat, r.dof);
  return r;
}

SlopeFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("need >= 2 points");
  double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  double denom = n * sxx - sx * sx;
  SlopeFit f;
  f.slope = (n * sxy - sx * sy) / denom;
  f.intercept = (sy - f.slope * sx) / n;
  return f;
}

Moments sample_moments(const std::vector<double>& xs) {
  Moments m;
  m.count = static_cast<std::int64_t>(xs.size());
  if (xs.empty()) return m;
  KahanSum s;
  for (double x : xs) s.add(x);
  m.mean = s.value() / static_cast<double>(xs.size());
  if (xs.size() < 2) return m;
  KahanSum sq;
  for (double x : xs) sq.add((x - m.mean) * (x - m.mean));
  m.variance = sq.value() / static_cast<double>(xs.size() - 1);
  return m;
}

}  // namespace subquad
