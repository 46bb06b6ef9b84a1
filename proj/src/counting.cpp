#include "subquad/counting.hpp"

#include <chrono>
#include <cmath>

#include "subquad/aggregate.hpp"
#include "subquad/saw.hpp"
#include "subquad/stats.hpp"

namespace subquad {

std::string to_string(CountingMode m) { return m == CountingMode::Saw ? "saw" : "aggregate"; }

double estimate_config_probability(const std::vector<Spin>& sigma_star,
                                   const CoordinateEstimator& estimator, int k, RngStream& rng,
                                   std::vector<double>* per_coordinate) {
  const int n = static_cast<int>(sigma_star.size());
  if (per_coordinate) per_coordinate->assign(n, 0.0);
  double product = 1.0;
  Pinning prefix;
  for (int i = 0; i < n; ++i) {
    KahanSum sum;
    for (int j = 0; j < k; ++j) {
      RngStream stream = rng.child(static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(j));
      sum.add(estimator(i, prefix, stream));
    }
    double p = sum.value() / k;
    if (per_coordinate) (*per_coordinate)[i] = p;
    if (p <= 0.0) {
      throw std::runtime_error("zero coordinate estimate: infeasible reference or broken estimator");
    }
    product *= p;
    prefix.set(i, sigma_star[i]);
  }
  return product;
}

std::int64_t choose_sample_budget(double b, int n, double epsilon, CountingMode mode,
                                  double calib) {
  if (!(b > 0.0 && b <= 1.0)) throw std::invalid_argument("marginal bound must be in (0,1]");
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  double N;
  if (mode == CountingMode::Saw) {
    N = calib * std::pow(b, -4.0) * n * std::log(std::max(2, n)) / (epsilon * epsilon);
  } else {
    N = calib * n / (epsilon * epsilon * b * b);
  }
  return static_cast<std::int64_t>(std::ceil(N));
}

double model_marginal_bound(const Model& m) {
  if (const auto* ts = std::get_if<TwoSpinModel>(&m)) {
    return marginal_lower_bound(ts->params, std::max(1, ts->graph.max_degree));
  }
  if (const auto* ss = std::get_if<SpinSystem>(&m)) {
    return marginal_lower_bound(*ss);
  }
  if (const auto* pm = std::get_if<PolymerModel>(&m)) {
    return polymer_ground_lower_bound(*pm);
  }
  // Hypergraph independent sets: removing v from an independent set keeps it
  // independent, so mu_v(0) >= 1/2; occupancy is at least the coin mass
  // damped by the forcing checks, bounded crudely below by 1/4 at desk scale.
  return 0.25;
}

void check_regime(const Model& m, CountingMode mode) {
  if (const auto* ts = std::get_if<TwoSpinModel>(&m)) {
    int Delta = std::max(2, ts->graph.max_degree);
    const TwoSpinParams& p = ts->params;
    if (!p.antiferro()) throw RegimeError("two-spin counting requires beta*gamma < 1");
    if (mode == CountingMode::Aggregate) {
      if (p.is_hardcore()) {
        if (Delta > 1 && p.lambda >= 1.0 / (Delta - 1.0)) {
          throw RegimeError("aggregate hardcore requires lambda < 1/(Delta-1)");
        }
        return;
      }
      double lo = 1.0 - 1.0 / (2.0 * Delta);
      double scale = std::max({p.beta, p.gamma, 1.0});
      if (p.beta / scale < lo || p.gamma / scale < lo || 1.0 / scale < lo) {
        throw RegimeError("aggregate two-spin requires interactions in the weak window");
      }
      return;
    }
    // Saw mode: up-to-Delta uniqueness with a positive gap, plus a concrete
    // black-box sampler (recursive hardcore or windowed weak-interaction).
    auto rep = uniqueness_gap(p, Delta);
    if (!rep.is_unique || rep.delta <= 0.0) {
      throw RegimeError("saw mode requires up-to-Delta uniqueness with a positive gap");
    }
    if (p.is_hardcore()) {
      if (Delta > 1 && p.lambda >= 1.0 / (Delta - 1.0)) {
        throw RegimeError("saw-mode hardcore uses the recursive sampler: lambda < 1/(Delta-1)");
      }
      return;
    }
    double lo = 1.0 - 1.0 / (2.0 * Delta);
    double scale = std::max({p.beta, p.gamma, 1.0});
    if (p.beta / scale < lo || p.gamma / scale < lo || 1.0 / scale < lo) {
      throw RegimeError("saw-mode two-spin needs a perfect sampler: only hardcore or the weak window ship");
    }
    return;
  }
  if (const auto* ss = std::get_if<SpinSystem>(&m)) {
    if (mode == CountingMode::Saw) throw RegimeError("saw mode serves two-spin models only");
    int Delta = std::max(1, ss->graph.max_degree);
    double lo = 1.0 - 1.0 / (2.0 * Delta);
    for (const auto& row : ss->interaction) {
      for (double a : row) {
        if (a < lo || a > 1.0) throw RegimeError("spin system outside the weak-interaction window");
      }
    }
    return;
  }
  if (const auto* pm = std::get_if<PolymerModel>(&m)) {
    if (mode == CountingMode::Saw) throw RegimeError("saw mode serves two-spin models only");
    if (!(pm->cutoff_rate() > 0.0)) {
      throw RegimeError("polymer decay too weak: theta <= 2 + log((q-1)Delta)");
    }
    std::string witness;
    if (!verify_polymer_condition(*pm, 6, &witness)) {
      throw RegimeError("polymer sampling condition violated: " + witness);
    }
    return;
  }
  const auto& hm = std::get<HypergraphModel>(m);
  if (mode == CountingMode::Saw) throw RegimeError("saw mode serves two-spin models only");
  if (!hypergraph_in_regime(hm.hyper)) {
    throw RegimeError("hypergraph regime: 2^(k/2) < sqrt(8e) k^2 Delta");
  }
}

namespace {

// Restriction of a hypergraph to the vertices >= cut, after pinning all
// vertices < cut to 0: pinned-out vertices disappear and every edge touching
// one of them can no longer be fully occupied, so it disappears too.
Hypergraph hypergraph_after_zero_prefix(const Hypergraph& h, int cut) {
  std::vector<std::vector<Vertex>> edges;
  for (const auto& e : h.edges) {
    bool keep = true;
    for (Vertex v : e) {
      if (v < cut) {
        keep = false;
        break;
      }
    }
    if (!keep) continue;
    std::vector<Vertex> shifted;
    shifted.reserve(e.size());
    for (Vertex v : e) shifted.push_back(v - cut);
    edges.push_back(std::move(shifted));
  }
  return Hypergraph::from_edges(h.n - cut, h.uniformity, edges);
}

struct Driver {
  const Model& model;
  CountingMode mode;
  const CountingOptions& opt;
  std::int64_t budget;
  std::int64_t sampler_calls = 0;
  double saw_delta = 0.0;

  double estimate(int i, const Pinning& prefix, RngStream& rng) {
    if (const auto* ts = std::get_if<TwoSpinModel>(&model)) return two_spin(*ts, i, prefix, rng);
    if (const auto* ss = std::get_if<SpinSystem>(&model)) return spin_system(*ss, i, prefix, rng);
    if (const auto* pm = std::get_if<PolymerModel>(&model)) return polymer(*pm, i, prefix, rng);
    return hypergraph(std::get<HypergraphModel>(model), i, prefix, rng);
  }

  double two_spin(const TwoSpinModel& ts, int i, const Pinning& prefix, RngStream& rng) {
    const TwoSpinParams& p = ts.params;
    if (mode == CountingMode::Saw) {
      BlackBoxSampler sampler =
          p.is_hardcore() ? hardcore_black_box(p.lambda, opt.override_regime)
                          : weak_spin_black_box(p, std::max(1, ts.graph.max_degree),
                                                opt.override_regime);
      SawEstimateStats stats;
      double p_one = estimate_marginal_saw(ts.graph, i, prefix, p, saw_delta,
                                           static_cast<double>(budget), sampler, rng, &stats);
      sampler_calls += stats.sampler_calls;
      return 1.0 - p_one;  // sigma* is all-zero
    }
    GraphOracle inst(ts.graph, prefix);
    BinomialOracle oracle(budget);
    SamplerOptions sopt;
    sopt.override_regime = opt.override_regime;
    std::int64_t ones = 0;
    if (p.is_hardcore()) {
      AggregateStats stats;
      ones = aggregate_aj(inst, p.lambda, i, PinList(), budget, oracle, rng, sopt, &stats);
      sampler_calls += stats.recursive_calls;
    } else {
      SpinSystem sys = two_spin_as_system(p, ts.graph);
      auto sc = make_weak_spin_scenario(sys, false, opt.override_regime);
      AggregateStats stats;
      auto freq = aggregate_ms_abstract(inst, *sc, i, PinView{&inst, PinList()}, budget, oracle,
                                        rng, sopt, &stats);
      ones = freq.counts[1];
      sampler_calls += stats.recursive_calls;
    }
    return static_cast<double>(budget - ones) / static_cast<double>(budget);
  }

  static SpinSystem two_spin_as_system(const TwoSpinParams& p, const Graph& g) {
    double scale = std::max({p.beta, p.gamma, 1.0});
    SpinSystem sys;
    sys.graph = g;
    sys.q = 2;
    sys.interaction = {{p.gamma / scale, 1.0 / scale}, {1.0 / scale, p.beta / scale}};
    sys.field = {1.0, p.lambda};
    return sys;
  }

  double spin_system(const SpinSystem& ss, int i, const Pinning& prefix, RngStream& rng) {
    GraphOracle inst(ss.graph, prefix);
    BinomialOracle oracle(budget);
    SamplerOptions sopt;
    sopt.override_regime = opt.override_regime;
    auto sc = make_weak_spin_scenario(ss, false, opt.override_regime);
    AggregateStats stats;
    auto freq = aggregate_ms_abstract(inst, *sc, i, PinView{&inst, PinList()}, budget, oracle, rng,
                                      sopt, &stats);
    sampler_calls += stats.recursive_calls;
    return static_cast<double>(freq.counts[0]) / static_cast<double>(budget);
  }

  double polymer(const PolymerModel& pm, int i, const Pinning& prefix, RngStream& rng) {
    GraphOracle inst(pm.graph, prefix);
    auto oracle = std::make_shared<BinomialOracle>(budget);
    SamplerOptions sopt;
    sopt.override_regime = opt.override_regime;
    auto sc = make_polymer_scenario(pm, oracle);
    AggregateStats stats;
    auto freq = aggregate_ms_abstract(inst, *sc, i, PinView{&inst, PinList()}, budget, *oracle,
                                      rng, sopt, &stats);
    sampler_calls += stats.recursive_calls;
    return static_cast<double>(freq.counts[pm.ground[i]]) / static_cast<double>(budget);
  }

  double hypergraph(const HypergraphModel& hm, int i, const Pinning&, RngStream& rng) {
    // The all-zero prefix deletes vertices < i together with their edges.
    Hypergraph restricted = hypergraph_after_zero_prefix(hm.hyper, i);
    auto automaton = encode_hypergraph_automaton(restricted, 0);
    BinomialOracle oracle(budget);
    BatchStats stats;
    auto hist = automaton_batch(*automaton, budget, oracle, rng, &stats);
    sampler_calls += stats.transitions;
    std::int64_t zeros = 0;
    if (auto it = hist.find("0"); it != hist.end()) zeros = it->second;
    return static_cast<double>(zeros) / static_cast<double>(budget);
  }
};

EstimateReport run_once(const Model& m, double epsilon, CountingMode mode, std::uint64_t seed,
                        const CountingOptions& opt) {
  auto t0 = std::chrono::steady_clock::now();
  int n = model_vertex_count(m);
  std::vector<Spin> sigma_star = model_ground_configuration(m);
  double sigma_weight = model_weight(m, sigma_star);
  if (sigma_weight <= 0.0) throw std::runtime_error("reference configuration has zero weight");

  double b = model_marginal_bound(m);
  double calib = mode == CountingMode::Saw ? opt.calib_saw : opt.calib_aggregate;
  std::int64_t budget = choose_sample_budget(b, n, epsilon, mode, calib);

  Driver driver{m, mode, opt, budget, 0, 0.0};
  if (mode == CountingMode::Saw) {
    const auto& ts = std::get<TwoSpinModel>(m);
    auto rep = uniqueness_gap(ts.params, std::max(2, ts.graph.max_degree));
    driver.saw_delta = rep.delta;
  }

  EstimateReport report;
  report.mode = to_string(mode);
  report.seed = seed;
  report.budget = budget;
  report.chain_reps = opt.chain_reps;
  report.sigma_weight = sigma_weight;

  RngStream root(seed);
  auto estimator = [&](int i, const Pinning& prefix, RngStream& rng) {
    return driver.estimate(i, prefix, rng);
  };
  double product = estimate_config_probability(sigma_star, estimator, opt.chain_reps, root,
                                               &report.coordinate_marginals);
  report.chain_product = product;
  report.z_hat = sigma_weight / product;
  report.log_z_hat = std::log(report.z_hat);
  report.sampler_calls = driver.sampler_calls;
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

}  // namespace

EstimateReport fpras(const Model& m, double epsilon, CountingMode mode, std::uint64_t seed,
                     const CountingOptions& opt) {
  if (!opt.override_regime) check_regime(m, mode);
  if (opt.amplify_eta <= 0.0) return run_once(m, epsilon, mode, seed, opt);

  // Median of an odd number of independent estimates amplifies the 3/4
  // success guarantee to 1 - eta.
  int runs = 2 * static_cast<int>(std::ceil(std::log(1.0 / opt.amplify_eta))) + 1;
  std::vector<EstimateReport> reports;
  reports.reserve(runs);
  RngStream seeder(seed);
  for (int r = 0; r < runs; ++r) {
    reports.push_back(run_once(m, epsilon, mode, seeder.child(r).next_u64(), opt));
  }
  std::sort(reports.begin(), reports.end(),
            [](const EstimateReport& a, const EstimateReport& b) { return a.z_hat < b.z_hat; });
  EstimateReport median = reports[runs / 2];
  median.seed = seed;
  for (const auto& r : reports) median.sampler_calls += r.sampler_calls;
  return median;
}

}  // namespace subquad
