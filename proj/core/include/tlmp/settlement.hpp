#pragma once

// Money flows: generator surplus, self-schedule profit Q, lost-opportunity
// and make-whole uplifts, and the operator's merchandising surplus.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tlmp/model.hpp"
#include "tlmp/pricing.hpp"

namespace tlmp {

// sum_t (price_t * g_t - cost_t(g_t)). `cost` holds one curve or one per
// interval.
double generator_surplus(std::span<const double> prices, std::span<const double> dispatch,
                         std::span<const CostCurve> cost);
// Row i of the schedule and of G, priced with generator i's bid cost.
double generator_surplus(const PriceSchedule& prices, const Eigen::MatrixXd& G,
                         const Scenario& s, int i);

struct GeneratorSettlement {
  std::string id;
  double energy_payment = 0.0;
  double bid_cost = 0.0;
  double true_cost = 0.0;
  double bid_surplus = 0.0;
  double true_surplus = 0.0;
  double q = 0.0;    // best self-scheduled profit at the same prices (bid cost)
  double loc = 0.0;  // q - bid_surplus
  double mw = 0.0;   // max(0, -bid_surplus)
  // True-cost surplus plus the LOC uplift.
  double profit_with_uplift = 0.0;
};

struct MerchandisingSurplus {
  double demand_revenue = 0.0;
  double generator_payments = 0.0;
  double value = 0.0;  // demand_revenue - generator_payments
  // sum of mu_up * (upper ramp bound) + mu_dn * (lower ramp bound magnitude),
  // with the first transition's bounds shifted by the initial output.
  // Present only when the prices carry their source duals.
  std::optional<double> ramping_charge;
};

struct SettlementReport {
  Scheme scheme = Scheme::kLmp;
  std::vector<GeneratorSettlement> generators;
  MerchandisingSurplus operator_account;

  double total_loc() const;
  double total_mw() const;
};

struct SettlementOptions {
  // Whether Q's self-schedule keeps the transition from the initial output.
  bool include_initial_ramp = true;
};

// G spans the full horizon of s (one-shot dispatch or a realized rolling
// trace). Demand revenue uses the scenario's actual demand.
SettlementReport uplifts(const PriceSchedule& prices, const Eigen::MatrixXd& G,
                         const Scenario& s, const SettlementOptions& opts = {});

MerchandisingSurplus merchandising_surplus(const PriceSchedule& prices, const Eigen::MatrixXd& G,
                                           std::span<const double> demand, const Scenario& s);

}  // namespace tlmp
