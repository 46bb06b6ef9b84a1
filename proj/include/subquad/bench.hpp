#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace subquad {

struct BenchRow {
  std::string series;
  std::int64_t x = 0;       // N for sampler batches, n for counting
  double calls = 0.0;       // median over repeats
  double wall_seconds = 0.0;
};

struct BenchResult {
  std::vector<BenchRow> rows;
  double aggregate_slope = 0.0;
  double aggregate_bound = 0.0;
  double saw_slope = 0.0;
  double saw_bound = 0.0;
};

struct BenchOptions {
  std::uint64_t seed = 1;
  int repeat = 3;
  // aggregate series: N = 2^lo .. 2^hi on a random Delta-regular graph
  int agg_lo = 10;
  int agg_hi = 20;
  int agg_graph_n = 2048;
  double lambda = 0.2;  // lambda/(1+lambda) = 1/(2*Delta) at Delta=3
  // saw series: n = 2^lo .. 2^hi
  int saw_lo = 8;
  int saw_hi = 13;
  double saw_lambda = 0.25;
  int delta_regular = 3;
  int sample_coords = 16;
};

BenchResult run_bench(const BenchOptions& opt);

std::string bench_csv(const BenchResult& r);

}  // namespace subquad
