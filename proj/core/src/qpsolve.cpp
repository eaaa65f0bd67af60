#include "tlmp/qpsolve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "active_set.hpp"

namespace tlmp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Output within this many MW (relative to 1 + capacity) of a piecewise
// breakpoint or of capacity counts as sitting on it.
constexpr double kBreakpointSnap = 1e-9;

// Subdifferential of the cell cost at g, with the right end pinned to the
// left derivative at capacity.
std::pair<double, double> subgradient_range(const CostCurve& c, double g, double capacity) {
  const double snap =
      c.kind() == CostKind::kPiecewiseLinear ? kBreakpointSnap * (1.0 + capacity) : 0.0;
  const double left = c.marginal_left(g - snap);
  const double right =
      g >= capacity - snap ? c.marginal_left(std::min(g, capacity)) : c.marginal_right(g + snap);
  return {std::min(left, right), right};
}

struct Layout {
  int units = 0;
  int window = 0;
  int num_vars = 0;
  std::vector<std::vector<int>> ramp_row;  // [unit][k], -1 when absent
  std::vector<int> demand_row;
  std::vector<std::vector<bool>> pinned;

  int g(int i, int k) const { return i * window + k; }
};

detail::QpModel build_model(const EdProblem& p, Layout& lay, Eigen::VectorXd& x0) {
  const int N = p.size();
  const int W = p.window();
  lay.units = N;
  lay.window = W;
  lay.pinned.assign(N, std::vector<bool>(W, false));
  std::vector<std::vector<double>> pin_value(N, std::vector<double>(W, 0.0));
  for (const auto& pin : p.pins) {
    lay.pinned[pin.unit][pin.interval] = true;
    pin_value[pin.unit][pin.interval] = pin.value;
  }

  // Segment variables for piecewise-linear cells.
  struct SegVar {
    int unit, interval;
    double width, slope;
  };
  std::vector<SegVar> segs;
  std::vector<std::vector<std::pair<int, int>>> seg_range(N, std::vector<std::pair<int, int>>(W));
  for (int i = 0; i < N; ++i) {
    for (int k = 0; k < W; ++k) {
      const auto& c = p.units[i].cost[k];
      const int first = static_cast<int>(segs.size());
      if (!lay.pinned[i][k] && c.kind() == CostKind::kPiecewiseLinear) {
        const auto& bp = c.segments();
        const double cap = p.units[i].capacity;
        for (size_t s = 0; s < bp.size() && bp[s].start_mw < cap; ++s) {
          const double end = s + 1 < bp.size() ? std::min(bp[s + 1].start_mw, cap) : cap;
          segs.push_back({i, k, end - bp[s].start_mw, bp[s].slope});
        }
      }
      seg_range[i][k] = {first, static_cast<int>(segs.size())};
    }
  }
  const int ng = N * W;
  const int n = ng + static_cast<int>(segs.size());
  lay.num_vars = n;

  detail::QpModel m;
  m.H = Eigen::MatrixXd::Zero(n, n);
  m.c = Eigen::VectorXd::Zero(n);
  m.lb = Eigen::VectorXd::Zero(n);
  m.ub = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < N; ++i) {
    const auto& u = p.units[i];
    for (int k = 0; k < W; ++k) {
      const int v = lay.g(i, k);
      if (lay.pinned[i][k]) {
        m.lb(v) = m.ub(v) = pin_value[i][k];
        continue;
      }
      m.ub(v) = u.capacity;
      const auto& c = u.cost[k];
      if (c.kind() == CostKind::kLinear) {
        m.c(v) += c.linear_coef();
      } else if (c.kind() == CostKind::kQuadratic) {
        m.c(v) += c.linear_coef();
        m.H(v, v) += 2.0 * c.quadratic_coef();
      }
      if (!u.price.empty()) m.c(v) -= u.price[k];
      m.H(v, v) += 2.0 * p.regularization;
    }
  }
  for (size_t s = 0; s < segs.size(); ++s) {
    const int v = ng + static_cast<int>(s);
    m.ub(v) = segs[s].width;
    m.c(v) = segs[s].slope;
  }

  // Rows: demand balance, ramps, segment links.
  int rows = p.demand ? W : 0;
  lay.ramp_row.assign(N, std::vector<int>(W, -1));
  for (int i = 0; i < N; ++i) {
    for (int k = 0; k < W; ++k) {
      if (k == 0 && !p.units[i].initial_ramp) continue;
      lay.ramp_row[i][k] = rows++;
    }
  }
  int link_rows = 0;
  for (int i = 0; i < N; ++i) {
    for (int k = 0; k < W; ++k) {
      if (seg_range[i][k].second > seg_range[i][k].first) ++link_rows;
    }
  }
  m.A = Eigen::MatrixXd::Zero(rows + link_rows, n);
  m.lo = Eigen::VectorXd::Zero(rows + link_rows);
  m.hi = Eigen::VectorXd::Zero(rows + link_rows);
  lay.demand_row.assign(W, -1);
  if (p.demand) {
    for (int k = 0; k < W; ++k) {
      lay.demand_row[k] = k;
      for (int i = 0; i < N; ++i) m.A(k, lay.g(i, k)) = 1.0;
      m.lo(k) = m.hi(k) = (*p.demand)[k];
    }
  }
  for (int i = 0; i < N; ++i) {
    const auto& u = p.units[i];
    for (int k = 0; k < W; ++k) {
      const int r = lay.ramp_row[i][k];
      if (r < 0) continue;
      m.A(r, lay.g(i, k)) = 1.0;
      if (k == 0) {
        m.lo(r) = u.initial - u.ramp_down;
        m.hi(r) = u.initial + u.ramp_up;
      } else {
        m.A(r, lay.g(i, k - 1)) = -1.0;
        m.lo(r) = -u.ramp_down;
        m.hi(r) = u.ramp_up;
      }
    }
  }
  int r = rows;
  for (int i = 0; i < N; ++i) {
    for (int k = 0; k < W; ++k) {
      const auto [first, last] = seg_range[i][k];
      if (last == first) continue;
      m.A(r, lay.g(i, k)) = 1.0;
      for (int s = first; s < last; ++s) m.A(r, ng + s) = -1.0;
      ++r;
    }
  }

  // Start from holding every unit at its initial output.
  x0 = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < N; ++i) {
    for (int k = 0; k < W; ++k) {
      const int v = lay.g(i, k);
      x0(v) = lay.pinned[i][k] ? pin_value[i][k]
                               : std::clamp(p.units[i].initial, 0.0, p.units[i].capacity);
      double left = x0(v);
      for (int s = seg_range[i][k].first; s < seg_range[i][k].second; ++s) {
        const double take = std::min(left, segs[s].width);
        x0(ng + s) = take;
        left -= take;
      }
    }
  }
  return m;
}

bool has_flat_cells(const detail::QpModel& m, const Layout& lay) {
  for (int v = 0; v < lay.units * lay.window; ++v) {
    if (m.lb(v) < m.ub(v) && m.H(v, v) == 0.0) return true;
  }
  return false;
}

// Linear costs leave whole faces of optimal dispatches. Among them, pick the
// one with the least squared ramping (initial transition included): hold
// curved cells at x, cap the linear cost at its optimum, and minimize
// sum (g_k - g_(k-1))^2, which is strictly convex in g.
detail::QpModel least_ramping_model(const EdProblem& p, const detail::QpModel& m,
                                    const Layout& lay, const Eigen::VectorXd& x) {
  const int n = m.num_vars();
  detail::QpModel t = m;
  t.H = Eigen::MatrixXd::Zero(n, n);
  t.c = Eigen::VectorXd::Zero(n);
  for (int v = 0; v < n; ++v) {
    if (m.H(v, v) > 0.0) t.lb(v) = t.ub(v) = x(v);
  }
  for (int i = 0; i < lay.units; ++i) {
    for (int k = 0; k < lay.window; ++k) {
      const int v = lay.g(i, k);
      if (k == 0) {
        if (!p.units[i].initial_ramp) continue;
        t.H(v, v) += 2.0;
        t.c(v) -= 2.0 * p.units[i].initial;
      } else {
        const int u = lay.g(i, k - 1);
        t.H(v, v) += 2.0;
        t.H(u, u) += 2.0;
        t.H(u, v) -= 2.0;
        t.H(v, u) -= 2.0;
      }
    }
  }
  const int rows = m.num_rows();
  t.A.conservativeResize(rows + 1, n);
  t.A.row(rows) = m.c.transpose();
  t.lo.conservativeResize(rows + 1);
  t.hi.conservativeResize(rows + 1);
  const double best = m.c.dot(x);
  t.lo(rows) = -kInf;
  t.hi(rows) = best + 1e-9 * (1.0 + std::abs(best));
  return t;
}

// First interval whose demand lies outside the aggregate reachable range.
InfeasibleError certify_infeasible(const EdProblem& p, const Eigen::VectorXd& row_violation,
                                   const Layout& lay) {
  const int N = p.size();
  const int W = p.window();
  std::vector<double> lo(N), hi(N);
  for (int i = 0; i < N; ++i) {
    const auto& u = p.units[i];
    lo[i] = u.initial_ramp ? u.initial - u.ramp_down : -kInf;
    hi[i] = u.initial_ramp ? u.initial + u.ramp_up : kInf;
  }
  if (p.demand) {
    for (int k = 0; k < W; ++k) {
      double sum_lo = 0.0, sum_hi = 0.0;
      for (int i = 0; i < N; ++i) {
        const auto& u = p.units[i];
        if (k > 0) {
          lo[i] -= u.ramp_down;
          hi[i] += u.ramp_up;
        }
        lo[i] = std::clamp(lo[i], 0.0, u.capacity);
        hi[i] = std::clamp(hi[i], 0.0, u.capacity);
        for (const auto& pin : p.pins) {
          if (pin.unit == i && pin.interval == k) lo[i] = hi[i] = pin.value;
        }
        sum_lo += lo[i];
        sum_hi += hi[i];
      }
      const double d = (*p.demand)[k];
      std::ostringstream msg;
      if (d > sum_hi + 1e-9) {
        msg << "demand " << d << " MW exceeds maximum reachable output " << sum_hi << " MW";
        return InfeasibleError(k, msg.str());
      }
      if (d < sum_lo - 1e-9) {
        msg << "demand " << d << " MW below minimum reachable output " << sum_lo << " MW";
        return InfeasibleError(k, msg.str());
      }
    }
  }
  // Ramp coupling across intervals: report the first violated row.
  for (int k = 0; k < W; ++k) {
    if (lay.demand_row[k] >= 0 && std::abs(row_violation(lay.demand_row[k])) > 1e-9) {
      return InfeasibleError(k, "demand balance unreachable under ramp coupling");
    }
    for (int i = 0; i < N; ++i) {
      const int r = lay.ramp_row[i][k];
      if (r >= 0 && std::abs(row_violation(r)) > 1e-9) {
        return InfeasibleError(k, "ramp limit of unit " + std::to_string(i + 1) +
                                      " cannot be met");
      }
    }
  }
  return InfeasibleError(-1, "no feasible dispatch");
}

}  // namespace

int EdProblem::window() const {
  if (demand) return static_cast<int>(demand->size());
  return units.empty() ? 0 : static_cast<int>(units.front().cost.size());
}

void EdProblem::validate() const {
  const int W = window();
  if (units.empty()) throw InputError("dispatch problem has no units");
  if (W == 0) throw InputError("dispatch problem has an empty window");
  for (const auto& u : units) {
    if (static_cast<int>(u.cost.size()) != W) {
      throw InputError("unit cost rows must match the window length");
    }
    if (!u.price.empty() && static_cast<int>(u.price.size()) != W) {
      throw InputError("unit price rows must match the window length");
    }
    if (!(u.capacity > 0.0) || u.ramp_up < 0.0 || u.ramp_down < 0.0) {
      throw InputError("unit bounds must satisfy capacity > 0 and ramps >= 0");
    }
  }
  for (const auto& pin : pins) {
    if (pin.unit < 0 || pin.unit >= size() || pin.interval < 0 || pin.interval >= W) {
      throw InputError("pin refers to a cell outside the problem");
    }
  }
  if (regularization < 0.0) throw InputError("regularization must be >= 0");
}

double KktSolution::delta_mu(int i, int k) const {
  if (k >= mu_up.cols()) return 0.0;
  return mu_up(i, k) - mu_dn(i, k);
}

double Residuals::max() const {
  return std::max({stationarity_inf, primal_inf, dual_inf, complementarity_inf});
}

InfeasibleError::InfeasibleError(int interval, std::string bound)
    : std::runtime_error(interval >= 0 ? "infeasible at interval " +
                                             std::to_string(interval + 1) + ": " + bound
                                       : "infeasible: " + bound),
      interval_(interval),
      bound_(std::move(bound)) {}

double residual_scale(const EdProblem& p) {
  double s = 0.0;
  for (const auto& u : p.units) {
    for (const auto& c : u.cost) s = std::max(s, c.scale());
    for (double pr : u.price) s = std::max(s, std::abs(pr));
  }
  return 1.0 + s;
}

KktSolution solve_ed(const EdProblem& p) {
  p.validate();
  const int N = p.size();
  const int W = p.window();
  Layout lay;
  Eigen::VectorXd x0;
  const detail::QpModel model = build_model(p, lay, x0);

  double rhs_scale = 1.0;
  for (const auto& u : p.units) rhs_scale = std::max(rhs_scale, u.capacity);
  if (p.demand) {
    for (double d : *p.demand) rhs_scale = std::max(rhs_scale, std::abs(d));
  }
  const double feas_tol = 1e-10 * rhs_scale;

  const detail::Phase1Result start = detail::find_feasible_point(model, x0, feas_tol);
  if (!start.ok) throw SolverError("feasibility phase did not converge", Residuals{});
  if (start.total_violation > 1e-7 * rhs_scale) {
    throw certify_infeasible(p, start.row_violation, lay);
  }
  auto checked = [](detail::QpResult r) {
    if (r.status == detail::QpStatus::kUnbounded) {
      throw SolverError("dispatch problem is unbounded", Residuals{});
    }
    if (r.status == detail::QpStatus::kIterationLimit) {
      throw SolverError("active-set iteration limit reached", Residuals{});
    }
    return r;
  };
  detail::QpResult res = checked(detail::solve_active_set(model, start.x, feas_tol));
  if (p.demand && has_flat_cells(model, lay)) {
    const detail::QpModel tie = least_ramping_model(p, model, lay, res.x);
    const detail::QpResult moved = checked(detail::solve_active_set(tie, res.x, feas_tol));
    res = checked(detail::solve_active_set(model, moved.x, feas_tol));
  }

  KktSolution sol;
  sol.iterations = res.iterations;
  sol.dispatch.resize(N, W);
  for (int i = 0; i < N; ++i) {
    for (int k = 0; k < W; ++k) sol.dispatch(i, k) = res.x(lay.g(i, k));
  }
  if (p.demand) {
    Eigen::VectorXd lambda(W);
    for (int k = 0; k < W; ++k) lambda(k) = res.y(lay.demand_row[k]);
    sol.lambda = lambda;
  }
  sol.mu_up = Eigen::MatrixXd::Zero(N, W);
  sol.mu_dn = Eigen::MatrixXd::Zero(N, W);
  for (int i = 0; i < N; ++i) {
    for (int k = 0; k < W; ++k) {
      const int r = lay.ramp_row[i][k];
      if (r < 0) continue;
      const double y = res.y(r);
      if (y > 0.0) sol.mu_dn(i, k) = y;
      if (y < 0.0) sol.mu_up(i, k) = -y;
    }
  }

  // Box multipliers follow from stationarity once lambda and mu are known.
  sol.rho_up = Eigen::MatrixXd::Zero(N, W);
  sol.rho_dn = Eigen::MatrixXd::Zero(N, W);
  sol.objective = 0.0;
  for (int i = 0; i < N; ++i) {
    const auto& u = p.units[i];
    for (int k = 0; k < W; ++k) {
      if (lay.pinned[i][k]) continue;
      const double g = sol.dispatch(i, k);
      sol.objective += u.cost[k].cost(g) + p.regularization * g * g;
      if (!u.price.empty()) sol.objective -= u.price[k] * g;
      double target = (sol.lambda ? (*sol.lambda)(k) : 0.0) +
                      (u.price.empty() ? 0.0 : u.price[k]) -
                      (sol.delta_mu(i, k) - sol.delta_mu(i, k + 1)) -
                      2.0 * p.regularization * g;
      const auto [lo, hi] = subgradient_range(u.cost[k], g, u.capacity);
      const double phi = std::clamp(target, lo, hi);
      const double drho = target - phi;
      if (drho > 0.0) sol.rho_up(i, k) = drho;
      if (drho < 0.0) sol.rho_dn(i, k) = -drho;
    }
  }

  const Residuals resid = kkt_residuals(p, sol);
  sol.kkt_residual_inf = resid.max();
  const double scale = residual_scale(p);
  if (resid.stationarity_inf > kKktTolerance * scale ||
      resid.dual_inf > kKktTolerance * scale ||
      resid.primal_inf > kKktTolerance * rhs_scale ||
      resid.complementarity_inf > kKktTolerance * scale * rhs_scale) {
    std::ostringstream msg;
    msg << "KKT certification failed (stationarity " << resid.stationarity_inf << ", primal "
        << resid.primal_inf << ", dual " << resid.dual_inf << ", complementarity "
        << resid.complementarity_inf << ")";
    throw SolverError(msg.str(), resid);
  }
  return sol;
}

Residuals kkt_residuals(const EdProblem& p, const KktSolution& s) {
  const int N = p.size();
  const int W = p.window();
  if (s.dispatch.rows() != N || s.dispatch.cols() != W || s.mu_up.rows() != N ||
      s.mu_up.cols() != W || s.mu_dn.rows() != N || s.mu_dn.cols() != W ||
      s.rho_up.rows() != N || s.rho_up.cols() != W || s.rho_dn.rows() != N ||
      s.rho_dn.cols() != W || (p.demand && (!s.lambda || s.lambda->size() != W))) {
    throw InputError("solution shape does not match the problem");
  }
  std::vector<std::vector<bool>> pinned(N, std::vector<bool>(W, false));
  std::vector<std::vector<double>> pin_value(N, std::vector<double>(W, 0.0));
  for (const auto& pin : p.pins) {
    pinned[pin.unit][pin.interval] = true;
    pin_value[pin.unit][pin.interval] = pin.value;
  }

  Residuals r;
  auto bump = [](double& slot, double v) { slot = std::max(slot, std::abs(v)); };
  if (p.demand) {
    for (int k = 0; k < W; ++k) bump(r.primal_inf, s.dispatch.col(k).sum() - (*p.demand)[k]);
  }
  for (int i = 0; i < N; ++i) {
    const auto& u = p.units[i];
    for (int k = 0; k < W; ++k) {
      const double g = s.dispatch(i, k);
      const double mu_up = s.mu_up(i, k), mu_dn = s.mu_dn(i, k);
      const double rho_up = s.rho_up(i, k), rho_dn = s.rho_dn(i, k);
      bump(r.dual_inf, std::min({0.0, mu_up, mu_dn, rho_up, rho_dn}));

      if (pinned[i][k]) {
        bump(r.primal_inf, g - pin_value[i][k]);
      } else {
        bump(r.primal_inf, std::max(0.0, -g));
        bump(r.primal_inf, std::max(0.0, g - u.capacity));
        bump(r.complementarity_inf, rho_up * (u.capacity - g));
        bump(r.complementarity_inf, rho_dn * g);
        bump(r.complementarity_inf, rho_up * rho_dn);
        const double target =
            (s.lambda ? (*s.lambda)(k) : 0.0) + (u.price.empty() ? 0.0 : u.price[k]) -
            (s.delta_mu(i, k) - s.delta_mu(i, k + 1)) - (rho_up - rho_dn) -
            2.0 * p.regularization * g;
        const auto [lo, hi] = subgradient_range(u.cost[k], g, u.capacity);
        bump(r.stationarity_inf, target - std::clamp(target, lo, hi));
      }

      const bool has_row = k > 0 || u.initial_ramp;
      if (has_row) {
        const double prev = k == 0 ? u.initial : s.dispatch(i, k - 1);
        const double step = g - prev;
        bump(r.primal_inf, std::max(0.0, step - u.ramp_up));
        bump(r.primal_inf, std::max(0.0, -step - u.ramp_down));
        bump(r.complementarity_inf, mu_up * (u.ramp_up - step));
        bump(r.complementarity_inf, mu_dn * (step + u.ramp_down));
        bump(r.complementarity_inf, mu_up * mu_dn);
      } else {
        bump(r.complementarity_inf, mu_up);
        bump(r.complementarity_inf, mu_dn);
      }
    }
  }
  return r;
}

EdProblem make_ed_problem(const Scenario& s, std::span<const double> demand,
                          std::span<const double> initial, int start) {
  const int W = static_cast<int>(demand.size());
  EdProblem p;
  p.demand = std::vector<double>(demand.begin(), demand.end());
  for (int i = 0; i < s.size(); ++i) {
    const auto& g = s.generators[i];
    UnitWindow u;
    for (int k = 0; k < W; ++k) u.cost.push_back(g.bid(start + k));
    u.capacity = g.capacity;
    u.ramp_up = g.ramp_up;
    u.ramp_down = g.ramp_down;
    u.initial = initial[i];
    p.units.push_back(std::move(u));
  }
  return p;
}

SelfSchedule solve_self_schedule(const Generator& gen, std::span<const CostCurve> costs,
                                 std::span<const double> prices, bool include_initial_ramp) {
  if (costs.size() != prices.size()) {
    throw InputError("self-schedule cost and price rows differ in length");
  }
  EdProblem p;
  UnitWindow u;
  u.cost.assign(costs.begin(), costs.end());
  u.price.assign(prices.begin(), prices.end());
  u.capacity = gen.capacity;
  u.ramp_up = gen.ramp_up;
  u.ramp_down = gen.ramp_down;
  u.initial = gen.initial;
  u.initial_ramp = include_initial_ramp;
  p.units.push_back(std::move(u));
  SelfSchedule out;
  out.kkt = solve_ed(p);
  out.output = out.kkt.dispatch.row(0).transpose();
  out.profit = -out.kkt.objective;
  return out;
}

SelfSchedule solve_self_schedule(const Generator& gen, std::span<const double> prices,
                                 bool include_initial_ramp) {
  std::vector<CostCurve> costs;
  for (size_t t = 0; t < prices.size(); ++t) costs.push_back(gen.bid(static_cast<int>(t)));
  return solve_self_schedule(gen, costs, prices, include_initial_ramp);
}

OracleResult brute_force_oracle(const EdProblem& p, double grid_mw) {
  p.validate();
  const int N = p.size();
  const int W = p.window();
  if (N > 3 || W > 3 || grid_mw < 0.5) {
    throw InputError("brute-force oracle limited to N <= 3, W <= 3, grid >= 0.5 MW");
  }
  const double tol = 1e-9;
  std::vector<std::vector<std::optional<double>>> pin(N, std::vector<std::optional<double>>(W));
  for (const auto& pn : p.pins) pin[pn.unit][pn.interval] = pn.value;

  // Candidate output levels of one unit in one interval.
  auto levels = [&](int i, int k) {
    std::vector<double> out;
    if (pin[i][k]) {
      out.push_back(*pin[i][k]);
      return out;
    }
    const double cap = p.units[i].capacity;
    const int steps = static_cast<int>(std::floor(cap / grid_mw + 1e-9));
    for (int s = 0; s <= steps; ++s) out.push_back(s * grid_mw);
    if (cap - steps * grid_mw > tol) out.push_back(cap);
    return out;
  };
  auto cell_cost = [&](int i, int k, double g) {
    if (pin[i][k]) return 0.0;
    const auto& u = p.units[i];
    double v = u.cost[k].cost(g) + p.regularization * g * g;
    if (!u.price.empty()) v -= u.price[k] * g;
    return v;
  };

  using State = std::vector<double>;
  std::vector<std::vector<State>> states(W);
  std::vector<std::vector<double>> stage_cost(W);
  for (int k = 0; k < W; ++k) {
    const int free_units = p.demand ? N - 1 : N;
    std::vector<std::vector<double>> lv;
    for (int i = 0; i < free_units; ++i) lv.push_back(levels(i, k));
    std::vector<size_t> idx(free_units, 0);
    while (true) {
      State st(N, 0.0);
      double sum = 0.0;
      for (int i = 0; i < free_units; ++i) {
        st[i] = lv[i][idx[i]];
        sum += st[i];
      }
      bool ok = true;
      if (p.demand) {
        const double last = (*p.demand)[k] - sum;
        const int i = N - 1;
        if (pin[i][k]) {
          ok = std::abs(last - *pin[i][k]) <= tol;
        } else {
          ok = last >= -tol && last <= p.units[i].capacity + tol;
        }
        st[i] = std::clamp(last, 0.0, p.units[i].capacity);
      }
      if (ok) {
        double c = 0.0;
        for (int i = 0; i < N; ++i) c += cell_cost(i, k, st[i]);
        states[k].push_back(st);
        stage_cost[k].push_back(c);
      }
      int pos = 0;
      while (pos < free_units && ++idx[pos] == lv[pos].size()) idx[pos++] = 0;
      if (pos == free_units) break;
    }
  }

  auto ramp_ok = [&](const State& prev, const State& next) {
    for (int i = 0; i < N; ++i) {
      const double step = next[i] - prev[i];
      if (step > p.units[i].ramp_up + tol || -step > p.units[i].ramp_down + tol) return false;
    }
    return true;
  };
  State g0(N);
  for (int i = 0; i < N; ++i) g0[i] = p.units[i].initial;

  std::vector<std::vector<double>> best(W);
  std::vector<std::vector<int>> parent(W);
  for (int k = 0; k < W; ++k) {
    best[k].assign(states[k].size(), kInf);
    parent[k].assign(states[k].size(), -1);
    for (size_t s = 0; s < states[k].size(); ++s) {
      if (k == 0) {
        bool ok = true;
        for (int i = 0; i < N && ok; ++i) {
          if (!p.units[i].initial_ramp) continue;
          const double step = states[0][s][i] - g0[i];
          ok = step <= p.units[i].ramp_up + tol && -step <= p.units[i].ramp_down + tol;
        }
        if (ok) best[0][s] = stage_cost[0][s];
        continue;
      }
      for (size_t q = 0; q < states[k - 1].size(); ++q) {
        if (!std::isfinite(best[k - 1][q])) continue;
        const double cand = best[k - 1][q] + stage_cost[k][s];
        if (cand < best[k][s] && ramp_ok(states[k - 1][q], states[k][s])) {
          best[k][s] = cand;
          parent[k][s] = static_cast<int>(q);
        }
      }
    }
  }
  int arg = -1;
  double value = kInf;
  for (size_t s = 0; s < best[W - 1].size(); ++s) {
    if (best[W - 1][s] < value) {
      value = best[W - 1][s];
      arg = static_cast<int>(s);
    }
  }
  if (arg < 0) throw InfeasibleError(-1, "no feasible grid dispatch");
  OracleResult out;
  out.objective = value;
  out.dispatch.resize(N, W);
  for (int k = W - 1; k >= 0; --k) {
    for (int i = 0; i < N; ++i) out.dispatch(i, k) = states[k][arg][i];
    arg = parent[k][arg];
  }
  return out;
}

}  // namespace tlmp
