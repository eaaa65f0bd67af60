#pragma once

// Equilibrium checks (general, partial, strong), the hypothesis checkers
// for the two uniform-price impossibility results, and bidding experiments.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tlmp/dispatch.hpp"
#include "tlmp/model.hpp"
#include "tlmp/pricing.hpp"
#include "tlmp/settlement.hpp"

namespace tlmp {

inline constexpr double kMoneyTolerance = 0.01;     // $
inline constexpr double kPositiveMultiplier = 1e-6;  // $/MWh

struct EquilibriumReport {
  Eigen::VectorXd clearing_residual;  // T, MW
  Eigen::VectorXd profit_gap;         // N, $ (Q_i - surplus_i)
  // N x T single-interval gaps; empty unless the partial check ran.
  Eigen::MatrixXd partial_gap;
  double tolerance = kMoneyTolerance;
  bool general = false;
  std::optional<bool> strong;
  // Intervals (0-based) where some generator's partial gap exceeds the
  // tolerance.
  std::vector<int> partial_failures;
};

// Individual rationality over the horizon via the self-schedule optimum.
EquilibriumReport check_general_equilibrium(const Eigen::MatrixXd& G, const PriceSchedule& prices,
                                            const Scenario& s, double tol = kMoneyTolerance);

// Single-interval profit maximization per generator over its ramp-limited
// range around g_prev. Returns optimum - realized profit per generator.
std::vector<double> check_partial_equilibrium(std::span<const double> g_t,
                                              std::span<const double> g_prev,
                                              std::span<const double> price_row,
                                              const Scenario& s, int t);

EquilibriumReport check_strong_equilibrium(const Eigen::MatrixXd& G, const PriceSchedule& prices,
                                           const Scenario& s, double tol = kMoneyTolerance);

struct Thm2Cell {
  int unit = 0;
  int interval = 0;
  bool marginal = false;
  bool preceding_slack = false;
  bool succeeding_binding = false;  // with the binding side's multiplier > 0
  bool satisfied() const { return marginal && preceding_slack && succeeding_binding; }
};

struct Thm3Interval {
  int interval = 0;
  bool two_generators = false;
  // Best pair found (most hypotheses met); -1 without a pair.
  int first = -1;
  int second = -1;
  bool distinct_costs = false;
  bool both_marginal = false;
  bool ramps_slack = false;
  bool satisfied() const {
    return two_generators && distinct_costs && both_marginal && ramps_slack;
  }
};

struct ConditionReport {
  std::vector<Thm2Cell> cells;          // uniform-strong-price hypotheses
  std::vector<Thm3Interval> intervals;  // uniform-zero-LOC hypotheses
  bool satisfied_anywhere = false;
};

// `sol` is a one-shot (or single window) solution of scenario s.
ConditionReport thm2_conditions(const DispatchSolution& sol, const Scenario& s);
ConditionReport thm3_conditions(const RollingTrace& trace, const Scenario& s);

enum class BidMode { kPriceTaker, kFullRecompute };

struct BidPoint {
  double bid = 0.0;  // linear marginal-cost coefficient offered
  Eigen::VectorXd dispatch;  // subject's realized output, T
  Eigen::VectorXd price;     // subject's price row, T
  double true_profit = 0.0;
  double loc = 0.0;
  double profit_with_uplift = 0.0;
};

struct BidExperiment {
  int subject = 0;
  BidMode mode = BidMode::kPriceTaker;
  Scheme scheme = Scheme::kRollingTlmp;
  double truthful_bid = 0.0;
  std::vector<BidPoint> points;
  // Highest true profit (price-taker) or profit including uplift
  // (full-recompute); ties within $0.01 go to the bid nearest the truth.
  double argmax_bid = 0.0;
};

// Each grid value is the subject's offered linear coefficient, applied as an
// additive offset to its true cost curve. The subject's true cost must be
// linear. Rolling schemes re-run the rolling engine with the scenario seed.
BidExperiment truthful_bidding_experiment(const Scenario& s, int subject,
                                          std::span<const double> grid, BidMode mode,
                                          Scheme scheme = Scheme::kRollingTlmp);

struct FrequencyResult {
  double fraction = 0.0;
  int pairs = 0;       // (realization, interval) pairs compared
  int unchanged = 0;
  int infeasible = 0;  // realizations skipped
};

// Fraction of (realization, interval) pairs where the subject's R-TLMP is
// unchanged (within 1e-6) between bids c - delta and c + delta. Realization
// k draws forecasts with seed + k.
FrequencyResult price_taker_frequency(const Scenario& s, int subject, double delta,
                                      int realizations, std::uint64_t seed);

// Appends a 1 MW unit (cost 35, ramp 0.5, starting at 0) to s and returns
// its index.
int add_price_taker_unit(Scenario& s);

}  // namespace tlmp
