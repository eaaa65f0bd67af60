#include "tlmp/dispatch.hpp"

#include <algorithm>

namespace tlmp {

RollingInfeasible::RollingInfeasible(int window_start, const InfeasibleError& cause)
    : InfeasibleError(cause.interval() >= 0 ? window_start + cause.interval() : window_start,
                      "window starting at interval " + std::to_string(window_start + 1) +
                          ": " + cause.bound()),
      window_start_(window_start) {}

DispatchSolution one_shot_ed(const Scenario& s, std::span<const double> demand,
                             std::span<const double> initial, const DispatchOptions& opts) {
  if (static_cast<int>(initial.size()) != s.size()) {
    throw InputError("initial output vector must have one entry per generator");
  }
  EdProblem p = make_ed_problem(s, demand, initial, 0);
  p.regularization = opts.regularization;
  DispatchSolution sol;
  sol.kkt = solve_ed(p);
  sol.start = 0;
  sol.forecast.assign(demand.begin(), demand.end());
  sol.initial.assign(initial.begin(), initial.end());
  return sol;
}

DispatchSolution one_shot_ed(const Scenario& s, const DispatchOptions& opts) {
  const auto g0 = s.initial_output();
  return one_shot_ed(s, s.demand, g0, opts);
}

RollingTrace rolling_ed(const Scenario& s, const DispatchOptions& opts) {
  ForecastRng rng(s.forecast.seed);
  return rolling_ed(s, rng, opts);
}

RollingTrace rolling_ed(const Scenario& s, ForecastRng& rng, const DispatchOptions& opts) {
  const int N = s.size();
  const int T = s.horizon();
  RollingTrace trace;
  trace.realized = Eigen::MatrixXd::Zero(N, T);
  trace.ramp_up_binding.setConstant(N, T, false);
  trace.ramp_down_binding.setConstant(N, T, false);
  trace.regularization = opts.regularization;
  std::vector<double> state = s.initial_output();
  for (int t = 0; t < T; ++t) {
    const std::vector<double> forecast = generate_forecast(s, t, rng);
    EdProblem p = make_ed_problem(s, forecast, state, t);
    p.regularization = opts.regularization;
    DispatchSolution win;
    try {
      win.kkt = solve_ed(p);
    } catch (const RollingInfeasible&) {
      throw;
    } catch (const InfeasibleError& e) {
      throw RollingInfeasible(t, e);
    }
    win.start = t;
    win.forecast = forecast;
    win.initial = state;
    for (int i = 0; i < N; ++i) {
      const double g = win.kkt.dispatch(i, 0);
      const double step = g - state[i];
      const auto& gen = s.generators[i];
      trace.realized(i, t) = g;
      trace.ramp_up_binding(i, t) = step >= gen.ramp_up - kBindingTolerance;
      trace.ramp_down_binding(i, t) = -step >= gen.ramp_down - kBindingTolerance;
      state[i] = g;
    }
    trace.windows.push_back(std::move(win));
  }
  return trace;
}

}  // namespace tlmp
