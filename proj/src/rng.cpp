#include "subquad/rng.hpp"

#include <cmath>

namespace subquad {

double RngStream::normal() {
  // Marsaglia polar method; keeps only one variate so the draw count per
  // call stays a deterministic function of the stream state.
  for (;;) {
    double u = 2.0 * uniform() - 1.0;
    double v = 2.0 * uniform() - 1.0;
    double s = u * u + v * v;
    if (s > 0.0 && s < 1.0) {
      return u * std::sqrt(-2.0 * std::log(s) / s);
    }
  }
}

double RngStream::gamma(double shape) {
  if (shape < 1.0) {
    // Boost to shape+1 and correct with a uniform power.
    double g = gamma(shape + 1.0);
    double u = uniform();
    while (u <= 0.0) u = uniform();
    return g * std::pow(u, 1.0 / shape);
  }
  double d = shape - 1.0 / 3.0;
  double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x = normal();
    double t = 1.0 + c * x;
    if (t <= 0.0) continue;
    double v = t * t * t;
    double u = uniform();
    if (u < 1.0 - 0.0331 * (x * x) * (x * x)) return d * v;
    if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) {
      return d * v;
    }
  }
}

double RngStream::beta(double a, double b) {
  double x = gamma(a);
  double y = gamma(b);
  double s = x + y;
  if (s <= 0.0) return 0.5;
  return x / s;
}

}  // namespace subquad
