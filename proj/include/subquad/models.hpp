#pragma once

#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "subquad/graph.hpp"

namespace subquad {

// Parameters of a two-spin system with interaction matrix [[gamma,1],[1,beta]]
// and uniform external field lambda on spin 1. Hardcore is (0,1); Ising is
// beta == gamma. Anti-ferromagnetic means beta*gamma < 1.
struct TwoSpinParams {
  double beta = 0.0;
  double gamma = 1.0;
  double lambda = 1.0;

  bool antiferro() const { return beta * gamma < 1.0; }
  bool is_hardcore() const { return beta == 0.0 && gamma == 1.0; }

  static TwoSpinParams hardcore(double lambda) { return {0.0, 1.0, lambda}; }
  static TwoSpinParams ising(double b, double lambda = 1.0) { return {b, b, lambda}; }
};

struct TwoSpinModel {
  Graph graph;
  TwoSpinParams params;
};

// Soft-constraint q-spin system: symmetric interaction matrix A and a uniform
// field vector over spins. Weight of sigma = prod_edges A(su,sv) * prod_v field[sv].
struct SpinSystem {
  Graph graph;
  int q = 2;
  std::vector<std::vector<double>> interaction;  // q x q
  std::vector<double> field;                     // length q

  static SpinSystem ising(Graph g, double beta);
};

// Polymer: connected vertex set with a non-ground assignment. Configurations
// of the model are exactly the spin configurations whose non-ground connected
// components form the polymer family; the weight of a configuration is the
// product of the component weights.
struct Polymer {
  std::vector<Vertex> vertices;  // sorted ascending
  std::vector<Spin> spins;       // aligned with vertices

  int size() const { return static_cast<int>(vertices.size()); }
  bool contains(Vertex v) const;
  std::optional<Spin> spin_of(Vertex v) const;
  auto operator<=>(const Polymer&) const = default;
};

struct PolymerModel {
  Graph graph;
  int q = 2;
  std::vector<Spin> ground;  // per-vertex ground spin
  double theta = 0.0;        // declared decay: weight(g) <= exp(-theta*|g|)
  double sampling_constant = 10.0;  // the C of the sampling condition
  std::function<double(const Polymer&)> weight;

  // w(gamma) = exp(-theta * |gamma|) for every polymer.
  static PolymerModel geometric(Graph g, int q, double theta, double C = 10.0);

  // theta required by the sampling condition for this (q, Delta, C).
  double required_theta() const;
  // Decay rate driving the geometric size cutoff of the batched sampler.
  double cutoff_rate() const;  // theta - 2 - log((q-1)*Delta)
};

// Spot-check the sampling condition on all polymers up to size k_max around
// every vertex. Returns false (with a witness message) on the first violation.
bool verify_polymer_condition(const PolymerModel& m, int k_max, std::string* witness = nullptr);

struct HypergraphModel {
  Hypergraph hyper;
};

using Model = std::variant<TwoSpinModel, SpinSystem, PolymerModel, HypergraphModel>;

int model_vertex_count(const Model& m);
int model_spin_count(const Model& m);
// The configuration of maximal marginal lower bound used as the chain-rule
// reference: all-zero for two-spin and hypergraph, all-ground for polymer.
std::vector<Spin> model_ground_configuration(const Model& m);
// Weight of a full configuration under the model (unnormalized).
double model_weight(const Model& m, const std::vector<Spin>& sigma);

// ---- exact oracles (desk scale) -------------------------------------------

// beta^{m1} * gamma^{m0} * lambda^{n1} for a full two-spin configuration.
double two_spin_weight(const Graph& g, const TwoSpinParams& p, const std::vector<Spin>& sigma);

double spin_system_weight(const SpinSystem& s, const std::vector<Spin>& sigma);
double polymer_weight(const PolymerModel& m, const std::vector<Spin>& sigma);
bool hypergraph_independent(const Hypergraph& h, const std::vector<Spin>& sigma);

// Exact sum of weights over all configurations consistent with the pinning.
// Guarded to at most 2^26 enumerated states; Kahan-compensated.
double brute_force_partition(const Model& m, const Pinning& pin = {});

// mu_v(c | pinning) as a ratio of restricted partition functions. Throws on an
// infeasible pinning (zero denominator).
double brute_force_marginal(const Model& m, Vertex v, Spin c, const Pinning& pin = {});

// ---- uniqueness -------------------------------------------------------------

struct UniquenessReport {
  std::vector<double> fixed_points;     // hat-x_d for d = 1..Delta-1
  std::vector<double> derivative_mags;  // |F'_d| at the fixed point
  double delta = 0.0;                   // 1 - max_d |F'_d|; a gap iff > 0
  bool is_unique = false;               // max_d |F'_d| < 1
};

// Fixed points of F_d(x) = lambda*((beta x + 1)/(x + gamma))^d for d < Delta,
// found by bisection (F_d is strictly decreasing when beta*gamma < 1).
// Requires anti-ferromagnetic parameters.
UniquenessReport uniqueness_gap(const TwoSpinParams& p, int Delta, double tol = 1e-12);

// Critical hardcore fugacity (Delta-1)^(Delta-1) / (Delta-2)^Delta.
double hardcore_critical_lambda(int Delta);

// ---- tree recursion ---------------------------------------------------------

// Marginal ratio R = mu_v(1)/mu_v(0) carried projectively as (p1, p0) so that
// pinned spins are the exact points (1,0) and (0,1) and deep recursions cannot
// overflow: each step renormalizes to max-component 1.
struct MarginalRatio {
  double p1 = 0.0;
  double p0 = 0.0;

  static MarginalRatio pinned(Spin s) { return s == 1 ? MarginalRatio{1, 0} : MarginalRatio{0, 1}; }
  static MarginalRatio free_leaf(const TwoSpinParams& p) { return {p.lambda, 1.0}; }

  bool valid() const { return p1 > 0.0 || p0 > 0.0; }
  double prob_one() const { return p1 / (p1 + p0); }
  double ratio() const { return p1 / p0; }  // may be inf
};

// R = lambda * prod (beta R_i + 1)/(R_i + gamma), evaluated projectively.
// Throws if a child is the invalid (0,0) pair.
MarginalRatio tree_recursion_step(const TwoSpinParams& p, const std::vector<MarginalRatio>& children);

// h(x) = (1 - beta*gamma) x / ((beta x + 1)(x + gamma)); |F'_d(x)| = d*h(x).
double influence_h(const TwoSpinParams& p, double x);

// Conservative two-level bound on nonzero conditional marginals of a two-spin
// system on graphs of maximum degree Delta: child ratios lie in
// [lambda*beta^Delta, lambda*gamma^-Delta], so a free vertex's ratio lies in
// [lambda*f_lo^Delta, lambda*gamma^-Delta] with f_lo the worst factor over
// that child range.
double marginal_lower_bound(const TwoSpinParams& p, int Delta);

double marginal_lower_bound(const SpinSystem& s);

// Lower bound on the ground-spin marginal of a polymer model: one minus the
// total proposal mass through any vertex, bounded via the declared decay.
double polymer_ground_lower_bound(const PolymerModel& m);

}  // namespace subquad
