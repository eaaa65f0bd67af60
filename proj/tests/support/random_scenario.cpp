#include "random_scenario.hpp"

#include <algorithm>
#include <random>
#include <string>

namespace tlmp::testing {

namespace {

CostCurve random_cost(std::mt19937_64& rng, double capacity, bool mixed) {
  std::uniform_real_distribution<double> c(10.0, 60.0);
  const int kind = mixed ? std::uniform_int_distribution<int>(0, 2)(rng) : 0;
  if (kind == 1) {
    return CostCurve::quadratic(std::uniform_real_distribution<double>(0.001, 0.05)(rng), c(rng));
  }
  if (kind == 2) {
    std::vector<Breakpoint> seg{{0.0, c(rng)}};
    const int extra = std::uniform_int_distribution<int>(1, 2)(rng);
    for (int k = 0; k < extra; ++k) {
      const double start = seg.back().start_mw + std::uniform_real_distribution<double>(0.1, 0.4)(rng) * capacity;
      seg.push_back({std::min(start, 0.95 * capacity),
                     seg.back().slope + std::uniform_real_distribution<double>(1.0, 15.0)(rng)});
    }
    return CostCurve::piecewise(seg);
  }
  return CostCurve::linear(c(rng));
}

}  // namespace

Scenario random_scenario(std::uint64_t seed, const RandomScenarioOptions& opts) {
  std::mt19937_64 rng(seed);
  const int N = std::uniform_int_distribution<int>(1, opts.max_units)(rng);
  const int T = std::uniform_int_distribution<int>(1, opts.max_horizon)(rng);
  Scenario s;
  s.name = "random_" + std::to_string(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < N; ++i) {
    Generator g;
    g.id = "G" + std::to_string(i + 1);
    g.capacity = 50.0 + 250.0 * u(rng);
    g.ramp_up = (0.05 + 0.95 * u(rng)) * g.capacity;
    g.ramp_down = (0.05 + 0.95 * u(rng)) * g.capacity;
    g.initial = g.capacity * u(rng);
    if (opts.shutdown_reachable) g.initial = std::min(g.initial, g.ramp_down);
    g.bid_cost = {random_cost(rng, g.capacity, opts.mixed_costs)};
    s.generators.push_back(std::move(g));
  }
  std::vector<double> g(N);
  for (int i = 0; i < N; ++i) g[i] = s.generators[i].initial;
  for (int t = 0; t < T; ++t) {
    double d = 0.0;
    for (int i = 0; i < N; ++i) {
      const Generator& gen = s.generators[i];
      const double lo = std::max(0.0, g[i] - gen.ramp_down);
      const double hi = std::min(gen.capacity, g[i] + gen.ramp_up);
      // Stay a little inside the ramp band so the instance is not knife-edge.
      g[i] = lo + (hi - lo) * (0.05 + 0.9 * u(rng));
      d += g[i];
    }
    s.demand.push_back(d);
  }
  s.window = T;
  return s;
}

}  // namespace tlmp::testing
