#include "tlmp/pricing.hpp"

#include <cmath>

namespace tlmp {

const char* scheme_name(Scheme s) {
  switch (s) {
    case Scheme::kLmp:
      return "LMP";
    case Scheme::kTlmp:
      return "TLMP";
    case Scheme::kRollingLmp:
      return "R-LMP";
    case Scheme::kRollingTlmp:
      return "R-TLMP";
  }
  return "?";
}

bool is_uniform(Scheme s) { return s == Scheme::kLmp || s == Scheme::kRollingLmp; }

namespace {

const Eigen::VectorXd& lambda_of(const DispatchSolution& sol) {
  if (!sol.kkt.lambda) throw InputError("solution carries no demand-balance multipliers");
  return *sol.kkt.lambda;
}

}  // namespace

PriceSchedule lmp(const DispatchSolution& sol) {
  const Eigen::VectorXd& lambda = lambda_of(sol);
  const auto N = sol.kkt.dispatch.rows();
  PriceSchedule ps;
  ps.scheme = Scheme::kLmp;
  ps.demand_price = lambda;
  ps.generator_price = lambda.transpose().replicate(N, 1);
  ps.ramp_premium = Eigen::MatrixXd::Zero(N, lambda.size());
  return ps;
}

PriceSchedule tlmp(const DispatchSolution& sol) {
  const Eigen::VectorXd& lambda = lambda_of(sol);
  const KktSolution& k = sol.kkt;
  const auto N = static_cast<int>(k.dispatch.rows());
  const auto W = static_cast<int>(lambda.size());
  PriceSchedule ps;
  ps.scheme = Scheme::kTlmp;
  ps.demand_price = lambda;
  ps.ramp_premium.resize(N, W);
  ps.generator_price.resize(N, W);
  for (int i = 0; i < N; ++i) {
    for (int t = 0; t < W; ++t) {
      // Transition t+1 leaves interval t; transition t enters it.
      const double premium = k.delta_mu(i, t + 1) - k.delta_mu(i, t);
      ps.ramp_premium(i, t) = premium;
      ps.generator_price(i, t) = lambda(t) + premium;
    }
  }
  ps.mu_up = k.mu_up;
  ps.mu_dn = k.mu_dn;
  return ps;
}

PriceSchedule rolling_prices(const RollingTrace& trace, Scheme scheme) {
  if (scheme != Scheme::kRollingLmp && scheme != Scheme::kRollingTlmp) {
    throw InputError("rolling prices need the R-LMP or R-TLMP scheme");
  }
  const int T = trace.horizon();
  const auto N = trace.realized.rows();
  PriceSchedule ps;
  ps.scheme = scheme;
  ps.demand_price.resize(T);
  ps.generator_price.resize(N, T);
  ps.ramp_premium.resize(N, T);
  for (int t = 0; t < T; ++t) {
    const PriceSchedule w =
        scheme == Scheme::kRollingLmp ? lmp(trace.windows[t]) : tlmp(trace.windows[t]);
    ps.demand_price(t) = w.demand_price(0);
    ps.generator_price.col(t) = w.generator_price.col(0);
    ps.ramp_premium.col(t) = w.ramp_premium.col(0);
  }
  return ps;
}

PerturbationPrice tlmp_by_perturbation(const Scenario& s, const DispatchSolution& sol, int i,
                                       int t, double h) {
  const auto& G = sol.kkt.dispatch;
  if (i < 0 || i >= G.rows() || t < 0 || t >= G.cols()) {
    throw InputError("perturbation cell outside the solution");
  }
  const double g = G(i, t);
  const double cap = s.generators.at(i).capacity;
  if (!(h > 0.0) || g - h < 0.0 || g + h > cap) {
    throw InputError("perturbed output must stay within [0, capacity]");
  }
  EdProblem base = make_ed_problem(s, sol.forecast, sol.initial, sol.start);
  auto partial_cost = [&](double value) -> std::optional<double> {
    EdProblem p = base;
    p.pins.push_back({i, t, value});
    try {
      return solve_ed(p).objective;
    } catch (const InfeasibleError&) {
      return std::nullopt;
    }
  };
  const auto mid = partial_cost(g);
  const auto up = partial_cost(g + h);
  const auto down = partial_cost(g - h);
  if (!mid || (!up && !down)) {
    throw InfeasibleError(t, "pinned dispatch infeasible on both sides of the solution");
  }
  PerturbationPrice out;
  if (up) out.forward = -(*up - *mid) / h;
  if (down) out.backward = -(*mid - *down) / h;
  if (up && down) {
    out.central = -(*up - *down) / (2.0 * h);
    // Curvature makes the one-sided quotients differ by O(h); a kink keeps
    // the gap when h is halved.
    const double gap = std::abs(*out.forward - *out.backward);
    if (gap > 1e-6 * (1.0 + std::abs(out.central))) {
      const auto up2 = partial_cost(g + h / 2);
      const auto down2 = partial_cost(g - h / 2);
      out.degenerate = !up2 || !down2 || std::abs(*up2 + *down2 - 2.0 * *mid) / (h / 2) > 0.75 * gap;
    }
  } else {
    out.central = up ? *out.forward : *out.backward;
    out.degenerate = true;
  }
  return out;
}

}  // namespace tlmp
