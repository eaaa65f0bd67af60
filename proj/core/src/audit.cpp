#include "tlmp/audit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace tlmp {

namespace {

constexpr double kMwTolerance = 1e-6;

bool interior(double g, double cap) { return g > kMwTolerance && g < cap - kMwTolerance; }

// max over [lo, hi] of price*g - cost(g); the objective is concave, so the
// optimum sits at an end, a breakpoint, or the quadratic's stationary point.
double best_single_interval_profit(const CostCurve& c, double price, double lo, double hi) {
  std::vector<double> cand = {lo, hi};
  if (c.kind() == CostKind::kQuadratic && c.quadratic_coef() > 0.0) {
    cand.push_back(std::clamp((price - c.linear_coef()) / (2.0 * c.quadratic_coef()), lo, hi));
  }
  if (c.kind() == CostKind::kPiecewiseLinear) {
    for (const auto& bp : c.segments()) {
      if (bp.start_mw > lo && bp.start_mw < hi) cand.push_back(bp.start_mw);
    }
  }
  double best = -std::numeric_limits<double>::infinity();
  for (double g : cand) best = std::max(best, price * g - c.cost(g));
  return best;
}

PriceSchedule prices_for(const Scenario& s, Scheme scheme, Eigen::MatrixXd& G) {
  if (scheme == Scheme::kRollingLmp || scheme == Scheme::kRollingTlmp) {
    const RollingTrace trace = rolling_ed(s);
    G = trace.realized;
    return rolling_prices(trace, scheme);
  }
  const DispatchSolution sol = one_shot_ed(s);
  G = sol.kkt.dispatch;
  return scheme == Scheme::kLmp ? lmp(sol) : tlmp(sol);
}

Scenario with_bid(const Scenario& s, int subject, double bid) {
  Scenario out = s;
  Generator& g = out.generators[subject];
  std::vector<CostCurve> truth = g.true_cost.empty() ? g.bid_cost : g.true_cost;
  g.true_cost = truth;
  g.bid_cost.clear();
  for (const auto& c : truth) g.bid_cost.push_back(c.shifted(bid - c.linear_coef()));
  return out;
}

}  // namespace

EquilibriumReport check_general_equilibrium(const Eigen::MatrixXd& G, const PriceSchedule& prices,
                                            const Scenario& s, double tol) {
  const int T = s.horizon();
  if (G.rows() != s.size() || G.cols() != T) {
    throw InputError("dispatch must cover every generator over the full horizon");
  }
  EquilibriumReport rep;
  rep.tolerance = tol;
  rep.clearing_residual.resize(T);
  for (int t = 0; t < T; ++t) rep.clearing_residual(t) = std::abs(G.col(t).sum() - s.demand[t]);

  const SettlementReport settle = uplifts(prices, G, s);
  rep.profit_gap.resize(s.size());
  for (int i = 0; i < s.size(); ++i) rep.profit_gap(i) = settle.generators[i].loc;

  rep.general = (rep.profit_gap.array() <= tol).all() &&
                (rep.clearing_residual.array() <= kMwTolerance).all();
  return rep;
}

std::vector<double> check_partial_equilibrium(std::span<const double> g_t,
                                              std::span<const double> g_prev,
                                              std::span<const double> price_row,
                                              const Scenario& s, int t) {
  const auto N = static_cast<size_t>(s.size());
  if (g_t.size() != N || g_prev.size() != N || price_row.size() != N) {
    throw InputError("partial equilibrium inputs need one entry per generator");
  }
  std::vector<double> gaps(N);
  for (size_t i = 0; i < N; ++i) {
    const Generator& gen = s.generators[i];
    const CostCurve& c = gen.bid(t);
    const double lo = std::clamp(g_prev[i] - gen.ramp_down, 0.0, gen.capacity);
    const double hi = std::clamp(g_prev[i] + gen.ramp_up, 0.0, gen.capacity);
    const double realized = price_row[i] * g_t[i] - c.cost(g_t[i]);
    gaps[i] = best_single_interval_profit(c, price_row[i], lo, hi) - realized;
  }
  return gaps;
}

EquilibriumReport check_strong_equilibrium(const Eigen::MatrixXd& G, const PriceSchedule& prices,
                                           const Scenario& s, double tol) {
  EquilibriumReport rep = check_general_equilibrium(G, prices, s, tol);
  const int N = s.size();
  const int T = s.horizon();
  rep.partial_gap.resize(N, T);
  std::vector<double> prev = s.initial_output();
  for (int t = 0; t < T; ++t) {
    std::vector<double> g(N), price(N);
    for (int i = 0; i < N; ++i) {
      g[i] = G(i, t);
      price[i] = prices.generator_price(i, t);
    }
    const auto gaps = check_partial_equilibrium(g, prev, price, s, t);
    bool fails = false;
    for (int i = 0; i < N; ++i) {
      rep.partial_gap(i, t) = gaps[i];
      fails = fails || gaps[i] > tol;
    }
    if (fails) rep.partial_failures.push_back(t);
    prev = g;
  }
  rep.strong = rep.general && rep.partial_failures.empty();
  return rep;
}

ConditionReport thm2_conditions(const DispatchSolution& sol, const Scenario& s) {
  const KktSolution& k = sol.kkt;
  const int N = static_cast<int>(k.dispatch.rows());
  const int W = static_cast<int>(k.dispatch.cols());
  if (N != s.size() || static_cast<int>(sol.initial.size()) != N) {
    throw InputError("solution does not match the scenario");
  }
  ConditionReport rep;
  for (int i = 0; i < N; ++i) {
    const Generator& gen = s.generators[i];
    auto step = [&](int t) {
      return k.dispatch(i, t) - (t == 0 ? sol.initial[i] : k.dispatch(i, t - 1));
    };
    auto up_binding = [&](int t) { return step(t) >= gen.ramp_up - kMwTolerance; };
    auto dn_binding = [&](int t) { return -step(t) >= gen.ramp_down - kMwTolerance; };
    for (int t = 0; t < W; ++t) {
      Thm2Cell cell;
      cell.unit = i;
      cell.interval = t;
      cell.marginal = interior(k.dispatch(i, t), gen.capacity);
      cell.preceding_slack = !up_binding(t) && !dn_binding(t);
      if (t + 1 < W) {
        cell.succeeding_binding =
            (up_binding(t + 1) && k.mu_up(i, t + 1) >= kPositiveMultiplier) ||
            (dn_binding(t + 1) && k.mu_dn(i, t + 1) >= kPositiveMultiplier);
      }
      rep.satisfied_anywhere = rep.satisfied_anywhere || cell.satisfied();
      rep.cells.push_back(cell);
    }
  }
  return rep;
}

ConditionReport thm3_conditions(const RollingTrace& trace, const Scenario& s) {
  const int N = s.size();
  const int T = trace.horizon();
  if (trace.realized.rows() != N) throw InputError("trace does not match the scenario");
  ConditionReport rep;
  for (int t = 0; t < T; ++t) {
    Thm3Interval best;
    best.interval = t;
    best.two_generators = N >= 2;
    int best_score = -1;
    for (int i = 0; i < N; ++i) {
      for (int j = i + 1; j < N; ++j) {
        Thm3Interval cand = best;
        cand.first = i;
        cand.second = j;
        const Generator& a = s.generators[i];
        const Generator& b = s.generators[j];
        const double ga = trace.realized(i, t);
        const double gb = trace.realized(j, t);
        cand.distinct_costs = std::abs(marginal_cost(a.bid(t), ga, a.capacity) -
                                       marginal_cost(b.bid(t), gb, b.capacity)) > 1e-6;
        cand.both_marginal = interior(ga, a.capacity) && interior(gb, b.capacity);
        cand.ramps_slack = !trace.ramp_up_binding(i, t) && !trace.ramp_down_binding(i, t) &&
                           !trace.ramp_up_binding(j, t) && !trace.ramp_down_binding(j, t);
        const int score = int(cand.distinct_costs) + int(cand.both_marginal) +
                          int(cand.ramps_slack);
        if (score > best_score) {
          best_score = score;
          best = cand;
        }
      }
    }
    rep.satisfied_anywhere = rep.satisfied_anywhere || best.satisfied();
    rep.intervals.push_back(best);
  }
  return rep;
}

BidExperiment truthful_bidding_experiment(const Scenario& s, int subject,
                                          std::span<const double> grid, BidMode mode,
                                          Scheme scheme) {
  if (subject < 0 || subject >= s.size()) throw InputError("bidding subject not in scenario");
  if (grid.empty()) throw InputError("bid grid is empty");
  const Generator& gen = s.generators[subject];
  const auto& truth = gen.true_cost.empty() ? gen.bid_cost : gen.true_cost;
  for (const auto& c : truth) {
    if (c.kind() != CostKind::kLinear || c.linear_coef() != truth.front().linear_coef()) {
      throw InputError("bidding experiments need a constant linear true cost");
    }
  }
  const int T = s.horizon();
  BidExperiment exp;
  exp.subject = subject;
  exp.mode = mode;
  exp.scheme = scheme;
  exp.truthful_bid = truth.front().linear_coef();

  Eigen::VectorXd frozen;
  if (mode == BidMode::kPriceTaker) {
    Eigen::MatrixXd G;
    const PriceSchedule p = prices_for(with_bid(s, subject, exp.truthful_bid), scheme, G);
    frozen = p.generator_price.row(subject).transpose();
  }

  for (double bid : grid) {
    const Scenario sb = with_bid(s, subject, bid);
    const Generator& g = sb.generators[subject];
    Eigen::MatrixXd G;
    const PriceSchedule p = prices_for(sb, scheme, G);
    BidPoint pt;
    pt.bid = bid;
    pt.dispatch = G.row(subject).transpose();
    if (mode == BidMode::kPriceTaker) {
      pt.price = frozen;
      std::vector<double> pi(frozen.data(), frozen.data() + T);
      std::vector<CostCurve> bid_row, true_row;
      for (int t = 0; t < T; ++t) {
        bid_row.push_back(g.bid(t));
        true_row.push_back(g.truth(t));
      }
      std::vector<double> out(pt.dispatch.data(), pt.dispatch.data() + T);
      pt.true_profit = generator_surplus(pi, out, true_row);
      const double bid_surplus = generator_surplus(pi, out, bid_row);
      pt.loc = solve_self_schedule(g, bid_row, pi).profit - bid_surplus;
    } else {
      pt.price = p.generator_price.row(subject).transpose();
      const SettlementReport rep = uplifts(p, G, sb);
      pt.true_profit = rep.generators[subject].true_surplus;
      pt.loc = rep.generators[subject].loc;
    }
    pt.profit_with_uplift = pt.true_profit + pt.loc;
    exp.points.push_back(std::move(pt));
  }

  auto score = [&](const BidPoint& p) {
    return mode == BidMode::kPriceTaker ? p.true_profit : p.profit_with_uplift;
  };
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& p : exp.points) best = std::max(best, score(p));
  double best_dist = std::numeric_limits<double>::infinity();
  for (const auto& p : exp.points) {
    const double dist = std::abs(p.bid - exp.truthful_bid);
    if (score(p) >= best - kMoneyTolerance && dist < best_dist) {
      best_dist = dist;
      exp.argmax_bid = p.bid;
    }
  }
  return exp;
}

FrequencyResult price_taker_frequency(const Scenario& s, int subject, double delta,
                                      int realizations, std::uint64_t seed) {
  if (subject < 0 || subject >= s.size()) throw InputError("subject not in scenario");
  if (realizations < 1) throw InputError("need at least one realization");
  const Generator& gen = s.generators[subject];
  const double c = gen.bid(0).linear_coef();
  const Scenario low = with_bid(s, subject, c - delta);
  const Scenario high = with_bid(s, subject, c + delta);
  FrequencyResult out;
  for (int k = 0; k < realizations; ++k) {
    ForecastRng r1(seed + static_cast<std::uint64_t>(k));
    ForecastRng r2(seed + static_cast<std::uint64_t>(k));
    Eigen::VectorXd a, b;
    try {
      a = rolling_prices(rolling_ed(low, r1), Scheme::kRollingTlmp).generator_price.row(subject);
      b = rolling_prices(rolling_ed(high, r2), Scheme::kRollingTlmp).generator_price.row(subject);
    } catch (const InfeasibleError&) {
      ++out.infeasible;
      continue;
    }
    for (Eigen::Index t = 0; t < a.size(); ++t) {
      ++out.pairs;
      if (std::abs(a(t) - b(t)) <= 1e-6) ++out.unchanged;
    }
  }
  out.fraction = out.pairs > 0 ? static_cast<double>(out.unchanged) / out.pairs : 0.0;
  return out;
}

int add_price_taker_unit(Scenario& s) {
  Generator g;
  g.id = "PT";
  g.bid_cost = {CostCurve::linear(35.0)};
  g.capacity = 1.0;
  g.ramp_up = 0.5;
  g.ramp_down = 0.5;
  g.initial = 0.0;
  s.generators.push_back(std::move(g));
  return s.size() - 1;
}

}  // namespace tlmp
