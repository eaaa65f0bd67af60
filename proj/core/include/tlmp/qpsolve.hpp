#pragma once

// Multi-interval economic dispatch as a dense convex QP, solved by a primal
// active-set method that returns a KKT-certified primal-dual pair.
//
// Multiplier conventions follow the Lagrangian
//   L = sum_i f_i(g_i) + lambda'(d - G'1)
//       + sum_i [mu_up_i'(A g_i - r_up) - mu_dn_i'(A g_i + r_dn)]
//       + sum_i [rho_up_i'(g_i - cap) - rho_dn_i' g_i]
// where row k of A g_i is g_ik - g_i(k-1) and g_i(-1) is the initial output.
// Column k of mu_up / mu_dn therefore belongs to the transition *into*
// interval k; column 0 is the transition from the initial condition.

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tlmp/model.hpp"

namespace tlmp {

// One generator's data over a W-interval window.
struct UnitWindow {
  std::vector<CostCurve> cost;  // size W
  // Revenue price per interval: the objective gains -price[k] * g_k.
  // Empty for dispatch problems.
  std::vector<double> price;
  double capacity = 0.0;
  double ramp_up = 0.0;
  double ramp_down = 0.0;
  double initial = 0.0;
  bool initial_ramp = true;
};

// Fixes g[unit][interval] = value and drops that cell's cost.
struct Pin {
  int unit = 0;
  int interval = 0;
  double value = 0.0;
};

struct EdProblem {
  std::vector<UnitWindow> units;
  std::optional<std::vector<double>> demand;
  std::vector<Pin> pins;
  // Adds regularization * sum g^2 to the objective.
  double regularization = 0.0;

  int size() const { return static_cast<int>(units.size()); }
  int window() const;
  // Throws InputError on inconsistent shapes or bounds.
  void validate() const;
};

struct KktSolution {
  Eigen::MatrixXd dispatch;             // N x W, MW
  std::optional<Eigen::VectorXd> lambda;  // W, $/MWh; absent without demand
  Eigen::MatrixXd mu_up, mu_dn;         // N x W, $/MWh
  Eigen::MatrixXd rho_up, rho_dn;       // N x W, $/MWh
  double objective = 0.0;               // $
  double kkt_residual_inf = 0.0;
  int iterations = 0;

  // mu_up - mu_dn for unit i at transition k (0 for k == W).
  double delta_mu(int i, int k) const;
};

struct Residuals {
  double stationarity_inf = 0.0;
  double primal_inf = 0.0;
  double dual_inf = 0.0;
  double complementarity_inf = 0.0;

  double max() const;
};

// Certified infeasibility. `interval` is 0-based; -1 when not attributable.
class InfeasibleError : public std::runtime_error {
 public:
  InfeasibleError(int interval, std::string bound);
  int interval() const { return interval_; }
  const std::string& bound() const { return bound_; }

 private:
  int interval_;
  std::string bound_;
};

class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, Residuals residuals)
      : std::runtime_error(what), residuals_(residuals) {}
  const Residuals& residuals() const { return residuals_; }

 private:
  Residuals residuals_;
};

// Normalized KKT tolerance.
inline constexpr double kKktTolerance = 1e-6;

KktSolution solve_ed(const EdProblem& p);

// Recomputes every residual from the problem data alone.
Residuals kkt_residuals(const EdProblem& p, const KktSolution& s);

// Scale used to normalize residuals: 1 + largest cost/price coefficient.
double residual_scale(const EdProblem& p);

struct SelfSchedule {
  Eigen::VectorXd output;  // MW per interval
  double profit = 0.0;     // $; >= 0 when zero output is reachable from the initial output
  KktSolution kkt;
};

// Profit-maximizing output path for `gen` at fixed per-interval prices,
// priced with the generator's bid cost.
SelfSchedule solve_self_schedule(const Generator& gen, std::span<const double> prices,
                                 bool include_initial_ramp = true);
// Same with an explicit cost row (e.g. true cost).
SelfSchedule solve_self_schedule(const Generator& gen, std::span<const CostCurve> costs,
                                 std::span<const double> prices,
                                 bool include_initial_ramp = true);

// Builds the ED window problem for intervals [start, start + demand.size()).
EdProblem make_ed_problem(const Scenario& s, std::span<const double> demand,
                          std::span<const double> initial, int start = 0);

struct OracleResult {
  double objective = 0.0;
  Eigen::MatrixXd dispatch;
};

// Exhaustive search over a grid of dispatches (dynamic programming across
// intervals). The last unit absorbs the demand balance. Limited to N <= 3,
// W <= 3, grid_mw >= 0.5.
OracleResult brute_force_oracle(const EdProblem& p, double grid_mw);

}  // namespace tlmp
