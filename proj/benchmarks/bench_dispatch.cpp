#include <benchmark/benchmark.h>

#include "tlmp/dispatch.hpp"
#include "tlmp/fixtures.hpp"
#include "tlmp/harness.hpp"
#include "tlmp/pricing.hpp"
#include "tlmp/settlement.hpp"

namespace {

using namespace tlmp;

void BM_SolveEd_Ex1(benchmark::State& state) {
  const Scenario s = fixtures::ex1();
  const EdProblem p = make_ed_problem(s, s.demand, s.initial_output());
  for (auto _ : state) benchmark::DoNotOptimize(solve_ed(p));
}
BENCHMARK(BM_SolveEd_Ex1);

// Full-horizon FIX-MC solve with a growing horizon.
void BM_SolveEd_McHorizon(benchmark::State& state) {
  Scenario s = scale_ramps(fixtures::mc(0.0), 3.0);
  s.demand.resize(state.range(0));
  const EdProblem p = make_ed_problem(s, s.demand, s.initial_output());
  for (auto _ : state) benchmark::DoNotOptimize(solve_ed(p));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_SolveEd_McHorizon)->Arg(4)->Arg(8)->Arg(16)->Arg(24)->Complexity();

void BM_RollingEd_Mc(benchmark::State& state) {
  const Scenario s = fixtures::mc(0.04, 1);
  for (auto _ : state) benchmark::DoNotOptimize(rolling_ed(s));
}
BENCHMARK(BM_RollingEd_Mc);

void BM_Uplifts_RollingTlmp(benchmark::State& state) {
  const Scenario s = fixtures::mc(0.04, 1);
  const RollingTrace tr = rolling_ed(s);
  const PriceSchedule p = rolling_prices(tr, Scheme::kRollingTlmp);
  for (auto _ : state) benchmark::DoNotOptimize(uplifts(p, tr.realized, s));
}
BENCHMARK(BM_Uplifts_RollingTlmp);

void BM_MonteCarloCell(benchmark::State& state) {
  McConfig cfg;
  cfg.base = fixtures::mc();
  cfg.base_name = "fix_mc";
  cfg.multipliers = {{"C", 1.0}};
  cfg.sigmas = {0.04};
  cfg.realizations = 20;
  cfg.base_seed = 1;
  for (auto _ : state) benchmark::DoNotOptimize(run_monte_carlo(cfg, 1));
}
BENCHMARK(BM_MonteCarloCell)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
