#include "subquad/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "subquad/aggregate.hpp"
#include "subquad/counting.hpp"
#include "subquad/saw.hpp"
#include "subquad/stats.hpp"

namespace subquad {

namespace {

double median(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  return xs[xs.size() / 2];
}

}  // namespace

BenchResult run_bench(const BenchOptions& opt) {
  BenchResult result;
  RngStream master(opt.seed);

  // Aggregate hardcore recursion counts over N.
  {
    RngStream graph_rng = master.child(1);
    Graph g = random_regular_graph(opt.agg_graph_n, opt.delta_regular, graph_rng);
    GraphOracle inst(g);
    std::vector<double> log_n, log_calls;
    for (int e = opt.agg_lo; e <= opt.agg_hi; ++e) {
      std::int64_t N = std::int64_t(1) << e;
      BinomialOracle oracle(N);
      std::vector<double> calls, walls;
      for (int r = 0; r < opt.repeat; ++r) {
        AggregateStats stats;
        RngStream rng = master.child(2, static_cast<std::uint64_t>(e) * 64 + r);
        auto t0 = std::chrono::steady_clock::now();
        aggregate_aj(inst, opt.lambda, 0, PinList(), N, oracle, rng, {}, &stats);
        walls.push_back(
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
        calls.push_back(static_cast<double>(stats.recursive_calls));
      }
      BenchRow row;
      row.series = "aggregate-aj";
      row.x = N;
      row.calls = median(calls);
      row.wall_seconds = median(walls);
      result.rows.push_back(row);
      log_n.push_back(std::log(static_cast<double>(N)));
      log_calls.push_back(std::log(std::max(1.0, row.calls)));
    }
    result.aggregate_slope = fit_line(log_n, log_calls).slope;
    double c = 1.0 / ((opt.lambda / (1.0 + opt.lambda)) * opt.delta_regular);
    result.aggregate_bound =
        1.0 - std::log(c) / (std::log(static_cast<double>(opt.delta_regular)) + std::log(c)) +
        0.05;
  }

  // Saw-mode counting work over n (sampled coordinates, scaled up).
  {
    TwoSpinParams params = TwoSpinParams::hardcore(opt.saw_lambda);
    auto rep = uniqueness_gap(params, opt.delta_regular);
    double b = marginal_lower_bound(params, opt.delta_regular);
    double x = boundary_exponent(opt.delta_regular, rep.delta);
    auto sampler = hardcore_black_box(params.lambda);
    std::vector<double> log_n, log_total;
    for (int e = opt.saw_lo; e <= opt.saw_hi; ++e) {
      int n = 1 << e;
      RngStream graph_rng = master.child(3, e);
      Graph g = random_regular_graph(n, opt.delta_regular, graph_rng);
      std::int64_t N = choose_sample_budget(b, n, 1.0, CountingMode::Saw, 1.0);
      std::vector<double> totals, walls;
      for (int r = 0; r < opt.repeat; ++r) {
        double calls = 0.0;
        auto t0 = std::chrono::steady_clock::now();
        for (int s = 0; s < opt.sample_coords; ++s) {
          std::uint64_t label = (static_cast<std::uint64_t>(e) * 64 + r) * 64 + s;
          Vertex v = static_cast<Vertex>(
              master.child(4, label).below(static_cast<std::uint64_t>(n)));
          Pinning tau;
          SawEstimateStats stats;
          RngStream rng = master.child(5, label);
          estimate_marginal_saw(g, v, tau, params, rep.delta, static_cast<double>(N), sampler,
                                rng, &stats);
          calls += static_cast<double>(stats.sampler_calls);
        }
        walls.push_back(
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
        totals.push_back(calls / opt.sample_coords * n * 13.0);
      }
      BenchRow row;
      row.series = "saw-counting";
      row.x = n;
      row.calls = median(totals);
      row.wall_seconds = median(walls);
      result.rows.push_back(row);
      log_n.push_back(std::log(static_cast<double>(n)));
      log_total.push_back(std::log(std::max(1.0, row.calls)));
    }
    result.saw_slope = fit_line(log_n, log_total).slope;
    result.saw_bound = 2.0 - x + 0.1;
  }

  return result;
}

std::string bench_csv(const BenchResult& r) {
  std::ostringstream out;
  out << "series,x,calls,wall_seconds\n";
  for (const auto& row : r.rows) {
    out << row.series << "," << row.x << "," << row.calls << "," << row.wall_seconds << "\n";
  }
  return out.str();
}

}  // namespace subquad
