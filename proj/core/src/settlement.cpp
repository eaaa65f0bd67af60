#include "tlmp/settlement.hpp"

#include <algorithm>

namespace tlmp {

namespace {

void check_shape(const PriceSchedule& prices, const Eigen::MatrixXd& G, const Scenario& s) {
  if (G.rows() != s.size() || G.cols() != s.horizon()) {
    throw InputError("dispatch must cover every generator over the full horizon");
  }
  if (prices.size() != s.size() || prices.horizon() != s.horizon()) {
    throw InputError("price schedule must cover every generator over the full horizon");
  }
}

std::vector<double> row_of(const Eigen::MatrixXd& m, int i) {
  std::vector<double> out(m.cols());
  for (Eigen::Index t = 0; t < m.cols(); ++t) out[t] = m(i, t);
  return out;
}

std::vector<CostCurve> bid_row(const Generator& g, int T) {
  std::vector<CostCurve> out;
  for (int t = 0; t < T; ++t) out.push_back(g.bid(t));
  return out;
}

std::vector<CostCurve> true_row(const Generator& g, int T) {
  std::vector<CostCurve> out;
  for (int t = 0; t < T; ++t) out.push_back(g.truth(t));
  return out;
}

double total_cost(std::span<const double> dispatch, std::span<const CostCurve> cost) {
  double sum = 0.0;
  for (size_t t = 0; t < dispatch.size(); ++t) {
    sum += (cost.size() == 1 ? cost[0] : cost[t]).cost(dispatch[t]);
  }
  return sum;
}

}  // namespace

double generator_surplus(std::span<const double> prices, std::span<const double> dispatch,
                         std::span<const CostCurve> cost) {
  if (prices.size() != dispatch.size() ||
      (cost.size() != 1 && cost.size() != dispatch.size())) {
    throw InputError("price, dispatch and cost rows differ in length");
  }
  double revenue = 0.0;
  for (size_t t = 0; t < prices.size(); ++t) revenue += prices[t] * dispatch[t];
  return revenue - total_cost(dispatch, cost);
}

double generator_surplus(const PriceSchedule& prices, const Eigen::MatrixXd& G,
                         const Scenario& s, int i) {
  check_shape(prices, G, s);
  const auto pi = row_of(prices.generator_price, i);
  const auto g = row_of(G, i);
  const auto cost = bid_row(s.generators.at(i), s.horizon());
  return generator_surplus(pi, g, cost);
}

double SettlementReport::total_loc() const {
  double sum = 0.0;
  for (const auto& g : generators) sum += g.loc;
  return sum;
}

double SettlementReport::total_mw() const {
  double sum = 0.0;
  for (const auto& g : generators) sum += g.mw;
  return sum;
}

SettlementReport uplifts(const PriceSchedule& prices, const Eigen::MatrixXd& G,
                         const Scenario& s, const SettlementOptions& opts) {
  check_shape(prices, G, s);
  const int T = s.horizon();
  SettlementReport rep;
  rep.scheme = prices.scheme;
  for (int i = 0; i < s.size(); ++i) {
    const Generator& gen = s.generators[i];
    const auto pi = row_of(prices.generator_price, i);
    const auto g = row_of(G, i);
    const auto bid = bid_row(gen, T);
    const auto truth = true_row(gen, T);

    GeneratorSettlement gs;
    gs.id = gen.id;
    for (int t = 0; t < T; ++t) gs.energy_payment += pi[t] * g[t];
    gs.bid_cost = total_cost(g, bid);
    gs.true_cost = total_cost(g, truth);
    gs.bid_surplus = gs.energy_payment - gs.bid_cost;
    gs.true_surplus = gs.energy_payment - gs.true_cost;
    gs.q = solve_self_schedule(gen, bid, pi, opts.include_initial_ramp).profit;
    gs.loc = gs.q - gs.bid_surplus;
    gs.mw = std::max(0.0, -gs.bid_surplus);
    gs.profit_with_uplift = gs.true_surplus + gs.loc;
    rep.generators.push_back(std::move(gs));
  }
  rep.operator_account = merchandising_surplus(prices, G, s.demand, s);
  return rep;
}

MerchandisingSurplus merchandising_surplus(const PriceSchedule& prices, const Eigen::MatrixXd& G,
                                           std::span<const double> demand, const Scenario& s) {
  const int T = prices.horizon();
  if (static_cast<int>(demand.size()) != T || G.cols() != T ||
      G.rows() != prices.size()) {
    throw InputError("merchandising surplus inputs differ in shape");
  }
  MerchandisingSurplus ms;
  for (int t = 0; t < T; ++t) {
    ms.demand_revenue += prices.demand_price(t) * demand[t];
    for (Eigen::Index i = 0; i < G.rows(); ++i) {
      ms.generator_payments += prices.generator_price(i, t) * G(i, t);
    }
  }
  ms.value = ms.demand_revenue - ms.generator_payments;

  if (prices.mu_up && prices.mu_dn) {
    const auto& up = *prices.mu_up;
    const auto& dn = *prices.mu_dn;
    if (up.rows() != s.size() || up.cols() != T) {
      throw InputError("ramp multipliers do not match the scenario");
    }
    double charge = 0.0;
    for (int i = 0; i < s.size(); ++i) {
      const Generator& gen = s.generators[i];
      for (int t = 0; t < T; ++t) {
        const double shift = t == 0 ? gen.initial : 0.0;
        charge += up(i, t) * (gen.ramp_up + shift) + dn(i, t) * (gen.ramp_down - shift);
      }
    }
    ms.ramping_charge = charge;
  }
  return ms;
}

}  // namespace tlmp
