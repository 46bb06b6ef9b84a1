#include "subquad/models.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "subquad/stats.hpp"

namespace subquad {

namespace {

constexpr std::int64_t kMaxBruteStates = std::int64_t(1) << 26;

void check_param_range(const TwoSpinParams& p) {
  auto in_range = [](double x) { return x >= 1e-6 && x <= 1e6; };
  if (!(p.beta == 0.0 || in_range(p.beta)) || !in_range(p.gamma) || !in_range(p.lambda)) {
    throw std::invalid_argument("two-spin parameters outside [1e-6, 1e6] (beta may be 0)");
  }
}

}  // namespace

SpinSystem SpinSystem::ising(Graph g, double beta) {
  SpinSystem s;
  s.graph = std::move(g);
  s.q = 2;
  s.interaction = {{beta, 1.0}, {1.0, beta}};
  s.field = {1.0, 1.0};
  return s;
}

bool Polymer::contains(Vertex v) const {
  return std::binary_search(vertices.begin(), vertices.end(), v);
}

std::optional<Spin> Polymer::spin_of(Vertex v) const {
  auto it = std::lower_bound(vertices.begin(), vertices.end(), v);
  if (it == vertices.end() || *it != v) return std::nullopt;
  return spins[static_cast<std::size_t>(it - vertices.begin())];
}

PolymerModel PolymerModel::geometric(Graph g, int q, double theta, double C) {
  PolymerModel m;
  m.graph = std::move(g);
  m.q = q;
  m.ground.assign(m.graph.n, 0);
  m.theta = theta;
  m.sampling_constant = C;
  m.weight = [theta](const Polymer& p) { return std::exp(-theta * p.size()); };
  return m;
}

double PolymerModel::required_theta() const {
  double qd = static_cast<double>(q - 1) * std::max(1, graph.max_degree);
  return sampling_constant * (1.0 + std::log(qd));
}

double PolymerModel::cutoff_rate() const {
  double qd = static_cast<double>(q - 1) * std::max(1, graph.max_degree);
  return theta - 2.0 - std::log(qd);
}

bool verify_polymer_condition(const PolymerModel& m, int k_max, std::string* witness) {
  if (m.theta < m.required_theta()) {
    if (witness) {
      *witness = "theta " + std::to_string(m.theta) + " below required " +
                 std::to_string(m.required_theta());
    }
    return false;
  }
  for (Vertex u = 0; u < m.graph.n; ++u) {
    for (const auto& set : enumerate_connected_subgraphs(m.graph, u, k_max)) {
      // Only check sets whose minimum is u, so each polymer is visited once.
      if (set.front() != u) continue;
      std::vector<Spin> spins(set.size(), 0);
      // Odometer over non-ground assignments.
      for (;;) {
        Polymer p;
        p.vertices = set;
        p.spins.resize(set.size());
        for (std::size_t i = 0; i < set.size(); ++i) {
          Spin g = m.ground[set[i]];
          Spin s = spins[i] >= g ? spins[i] + 1 : spins[i];
          p.spins[i] = s;
        }
        double w = m.weight(p);
        if (w < 0.0) {
          if (witness) *witness = "negative polymer weight";
          return false;
        }
        if (w > std::exp(-m.theta * p.size()) * (1.0 + 1e-9)) {
          if (witness) {
            *witness = "weight " + std::to_string(w) + " exceeds exp(-theta*size) at size " +
                       std::to_string(p.size());
          }
          return false;
        }
        std::size_t pos = 0;
        while (pos < spins.size() && spins[pos] == m.q - 2) spins[pos++] = 0;
        if (pos == spins.size()) break;
        ++spins[pos];
      }
    }
  }
  return true;
}

int model_vertex_count(const Model& m) {
  return std::visit(
      [](const auto& mm) -> int {
        using T = std::decay_t<decltype(mm)>;
        if constexpr (std::is_same_v<T, HypergraphModel>) {
          return mm.hyper.n;
        } else {
          return mm.graph.n;
        }
      },
      m);
}

int model_spin_count(const Model& m) {
  return std::visit(
      [](const auto& mm) -> int {
        using T = std::decay_t<decltype(mm)>;
        if constexpr (std::is_same_v<T, SpinSystem> || std::is_same_v<T, PolymerModel>) {
          return mm.q;
        } else {
          return 2;
        }
      },
      m);
}

std::vector<Spin> model_ground_configuration(const Model& m) {
  int n = model_vertex_count(m);
  std::vector<Spin> sigma(n, 0);
  if (const auto* pm = std::get_if<PolymerModel>(&m)) sigma = pm->ground;
  return sigma;
}

double two_spin_weight(const Graph& g, const TwoSpinParams& p, const std::vector<Spin>& sigma) {
  if (static_cast<int>(sigma.size()) != g.n) throw std::invalid_argument("configuration size");
  int m1 = 0, m0 = 0, n1 = 0;
  for (Vertex v = 0; v < g.n; ++v) {
    if (sigma[v] == 1) ++n1;
    for (Vertex w : g.neighbors(v)) {
      if (w <= v) continue;
      if (sigma[v] == 1 && sigma[w] == 1) ++m1;
      if (sigma[v] == 0 && sigma[w] == 0) ++m0;
    }
  }
  double w = std::pow(p.lambda, n1) * std::pow(p.gamma, m0);
  if (m1 > 0) w *= std::pow(p.beta, m1);
  return w;
}

double spin_system_weight(const SpinSystem& s, const std::vector<Spin>& sigma) {
  double w = 1.0;
  for (Vertex v = 0; v < s.graph.n; ++v) {
    w *= s.field[sigma[v]];
    for (Vertex u : s.graph.neighbors(v)) {
      if (u > v) w *= s.interaction[sigma[v]][sigma[u]];
    }
  }
  return w;
}

double polymer_weight(const PolymerModel& m, const std::vector<Spin>& sigma) {
  // Weight = product over connected non-ground components, each a polymer.
  const Graph& g = m.graph;
  std::vector<char> visited(g.n, 0);
  double w = 1.0;
  for (Vertex v = 0; v < g.n; ++v) {
    if (visited[v] || sigma[v] == m.ground[v]) continue;
    std::vector<Vertex> comp{v};
    visited[v] = 1;
    for (std::size_t i = 0; i < comp.size(); ++i) {
      for (Vertex u : g.neighbors(comp[i])) {
        if (!visited[u] && sigma[u] != m.ground[u]) {
          visited[u] = 1;
          comp.push_back(u);
        }
      }
    }
    std::sort(comp.begin(), comp.end());
    Polymer p;
    p.vertices = comp;
    p.spins.reserve(comp.size());
    for (Vertex u : comp) p.spins.push_back(sigma[u]);
    w *= m.weight(p);
    if (w == 0.0) return 0.0;
  }
  return w;
}

bool hypergraph_independent(const Hypergraph& h, const std::vector<Spin>& sigma) {
  for (const auto& e : h.edges) {
    bool all = true;
    for (Vertex v : e) {
      if (sigma[v] == 0) {
        all = false;
        break;
      }
    }
    if (all) return false;
  }
  return true;
}

double model_weight(const Model& m, const std::vector<Spin>& sigma) {
  return std::visit(
      [&](const auto& mm) -> double {
        using T = std::decay_t<decltype(mm)>;
        if constexpr (std::is_same_v<T, TwoSpinModel>) {
          return two_spin_weight(mm.graph, mm.params, sigma);
        } else if constexpr (std::is_same_v<T, SpinSystem>) {
          return spin_system_weight(mm, sigma);
        } else if constexpr (std::is_same_v<T, PolymerModel>) {
          return polymer_weight(mm, sigma);
        } else {
          return hypergraph_independent(mm.hyper, sigma) ? 1.0 : 0.0;
        }
      },
      m);
}

namespace {

// Enumerate all completions of the pinning, accumulating weights.
double enumerate_weights(const Model& m, const Pinning& pin) {
  if (const auto* ts = std::get_if<TwoSpinModel>(&m)) check_param_range(ts->params);
  int n = model_vertex_count(m);
  int q = model_spin_count(m);
  std::vector<Vertex> free;
  std::vector<Spin> sigma(n, 0);
  for (Vertex v = 0; v < n; ++v) {
    if (auto s = pin.get(v)) {
      if (*s < 0 || *s >= q) throw std::invalid_argument("pinned spin out of range");
      sigma[v] = *s;
    } else {
      free.push_back(v);
    }
  }
  double states = std::pow(static_cast<double>(q), static_cast<double>(free.size()));
  if (states > static_cast<double>(kMaxBruteStates)) {
    throw std::runtime_error("brute-force guard: more than 2^26 states");
  }
  KahanSum z;
  std::vector<Spin> digits(free.size(), 0);
  for (;;) {
    z.add(model_weight(m, sigma));
    std::size_t pos = 0;
    while (pos < digits.size() && digits[pos] == q - 1) {
      digits[pos] = 0;
      sigma[free[pos]] = 0;
      ++pos;
    }
    if (pos == digits.size()) break;
    ++digits[pos];
    sigma[free[pos]] = digits[pos];
  }
  return z.value();
}

}  // namespace

double brute_force_partition(const Model& m, const Pinning& pin) {
  return enumerate_weights(m, pin);
}

double brute_force_marginal(const Model& m, Vertex v, Spin c, const Pinning& pin) {
  if (auto s = pin.get(v)) return *s == c ? 1.0 : 0.0;
  double denom = brute_force_partition(m, pin);
  if (denom <= 0.0) throw std::runtime_error("infeasible pinning (zero partition function)");
  Pinning ext = pin;
  ext.set(v, c);
  return brute_force_partition(m, ext) / denom;
}

double hardcore_critical_lambda(int Delta) {
  if (Delta < 3) throw std::invalid_argument("critical fugacity needs Delta >= 3");
  double d = Delta;
  return std::pow(d - 1.0, d - 1.0) / std::pow(d - 2.0, d);
}

namespace {

double tree_map_f(const TwoSpinParams& p, int d, double x) {
  return p.lambda * std::pow((p.beta * x + 1.0) / (x + p.gamma), d);
}

}  // namespace

UniquenessReport uniqueness_gap(const TwoSpinParams& p, int Delta, double tol) {
  if (Delta < 2) throw std::invalid_argument("Delta must be >= 2");
  if (!(p.beta * p.gamma < 1.0)) {
    throw std::invalid_argument("uniqueness gap requires beta*gamma < 1");
  }
  if (!(p.gamma > 0.0 && p.lambda > 0.0 && p.beta >= 0.0)) {
    throw std::invalid_argument("invalid two-spin parameters");
  }
  UniquenessReport rep;
  double worst = 0.0;
  for (int d = 1; d < Delta; ++d) {
    double lo = 0.0;
    double hi = std::max(p.lambda, p.lambda * std::pow(p.gamma, -d)) + 1.0;
    // F_d is strictly decreasing, so F_d(x) - x has a single sign change.
    int iters = 0;
    while (hi - lo > tol) {
      if (++iters > 500) throw std::runtime_error("fixed-point bisection did not converge");
      double mid = 0.5 * (lo + hi);
      if (tree_map_f(p, d, mid) > mid) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    double x = 0.5 * (lo + hi);
    double deriv = d * influence_h(p, x);
    rep.fixed_points.push_back(x);
    rep.derivative_mags.push_back(deriv);
    worst = std::max(worst, deriv);
  }
  rep.delta = 1.0 - worst;
  rep.is_unique = worst < 1.0;
  return rep;
}

MarginalRatio tree_recursion_step(const TwoSpinParams& p, const std::vector<MarginalRatio>& children) {
  double num = p.lambda;
  double den = 1.0;
  for (const auto& c : children) {
    if (!c.valid()) throw std::runtime_error("invalid (0,0) marginal ratio from child");
    num *= p.beta * c.p1 + c.p0;
    den *= c.p1 + p.gamma * c.p0;
    double m = std::max(num, den);
    if (m > 0.0) {
      num /= m;
      den /= m;
    }
  }
  return {num, den};
}

double influence_h(const TwoSpinParams& p, double x) {
  if (x < 0.0) throw std::invalid_argument("influence function needs x >= 0");
  return (1.0 - p.beta * p.gamma) * x / ((p.beta * x + 1.0) * (x + p.gamma));
}

double marginal_lower_bound(const TwoSpinParams& p, int Delta) {
  double r_hi = p.lambda * std::pow(p.gamma, -Delta);
  double f_lo = (p.beta * r_hi + 1.0) / (r_hi + p.gamma);
  if (p.beta > 0.0) f_lo = std::min(f_lo, p.beta);
  double r_lo = p.lambda * std::pow(f_lo, Delta);
  double b = std::min(r_lo / (1.0 + r_lo), 1.0 / (1.0 + r_hi));
  return b;
}

double marginal_lower_bound(const SpinSystem& s) {
  double a_min = 1.0;
  for (const auto& row : s.interaction) {
    for (double a : row) a_min = std::min(a_min, a);
  }
  double f_min = *std::min_element(s.field.begin(), s.field.end());
  double f_sum = 0.0;
  for (double f : s.field) f_sum += f;
  return f_min * std::pow(a_min, s.graph.max_degree) / f_sum;
}

double polymer_ground_lower_bound(const PolymerModel& m) {
  // Total proposal mass through a vertex: sum over sizes k of the polymer
  // count bound (e*Delta)^(k-1) (q-1)^k times the declared decay exp(-theta k).
  double Delta = std::max(1, m.graph.max_degree);
  double mass = 0.0;
  double term;
  for (int k = 1; k <= 200; ++k) {
    term = std::pow(M_E * Delta, k - 1) * std::pow(m.q - 1.0, k) * std::exp(-m.theta * k);
    mass += term;
    if (term < 1e-18) break;
  }
  if (mass >= 1.0) throw std::runtime_error("polymer decay too weak for a marginal bound");
  return 1.0 - mass;
}

}  // namespace subquad
