#pragma once

// Price formation from dispatch solutions: uniform LMP and per-generator
// TLMP (energy price plus a ramping premium), one-shot and rolling.

#include <optional>
#include <string>

#include <Eigen/Dense>

#include "tlmp/dispatch.hpp"
#include "tlmp/model.hpp"

namespace tlmp {

enum class Scheme { kLmp, kTlmp, kRollingLmp, kRollingTlmp };

const char* scheme_name(Scheme s);  // "LMP", "TLMP", "R-LMP", "R-TLMP"
bool is_uniform(Scheme s);

struct PriceSchedule {
  Scheme scheme = Scheme::kLmp;
  Eigen::VectorXd demand_price;     // T, $/MWh
  Eigen::MatrixXd generator_price;  // N x T, $/MWh
  Eigen::MatrixXd ramp_premium;     // N x T, $/MWh (zero for uniform schemes)
  // Ramp multipliers of the source solve (one-shot schemes only); used for
  // the ramping-charge identity.
  std::optional<Eigen::MatrixXd> mu_up, mu_dn;

  int horizon() const { return static_cast<int>(demand_price.size()); }
  int size() const { return static_cast<int>(generator_price.rows()); }
};

PriceSchedule lmp(const DispatchSolution& sol);
PriceSchedule tlmp(const DispatchSolution& sol);

// Interval-t prices taken from the first column of window t.
PriceSchedule rolling_prices(const RollingTrace& trace, Scheme scheme);

// Finite-difference view of the partial cost F_{-it} with g_it pinned at
// g*_it +/- h. Prices are the negated difference quotients.
struct PerturbationPrice {
  double central = 0.0;
  std::optional<double> forward;   // from pinning at g* + h
  std::optional<double> backward;  // from pinning at g* - h
  // One side infeasible, or the partial cost has a kink at g*: the
  // one-sided quotients differ by more than 1e-6 and the gap does not
  // shrink with h.
  bool degenerate = false;
};

// Throws InputError when g_it is not interior by at least h, and
// InfeasibleError when neither pinned problem is feasible.
PerturbationPrice tlmp_by_perturbation(const Scenario& s, const DispatchSolution& sol, int i,
                                       int t, double h = 0.01);

}  // namespace tlmp
