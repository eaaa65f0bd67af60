#include <gtest/gtest.h>

#include "random_scenario.hpp"
#include "tlmp/dispatch.hpp"
#include "tlmp/fixtures.hpp"
#include "tlmp/settlement.hpp"

namespace tlmp {
namespace {

void expect_loc_ge_mw(const SettlementReport& r) {
  for (const auto& g : r.generators) {
    EXPECT_GE(g.mw, 0.0) << g.id;
    EXPECT_GE(g.loc, g.mw - 0.01) << g.id;
    EXPECT_GE(g.q, -1e-9) << g.id;
  }
}

TEST(Surplus, SpanForm) {
  const std::vector<double> price = {25, 35, 30};
  const std::vector<double> g = {40, 90, 60};
  const std::vector<CostCurve> c = {CostCurve::linear(30)};
  EXPECT_NEAR(generator_surplus(price, g, c), -200 + 450 + 0, 1e-9);
  EXPECT_THROW(generator_surplus(price, std::vector<double>{1, 2}, c), InputError);
}

TEST(Uplifts, ExampleOneLmp) {
  const Scenario s = fixtures::ex1();
  const DispatchSolution sol = one_shot_ed(s);
  const SettlementReport r = uplifts(lmp(sol), sol.kkt.dispatch, s);
  const GeneratorSettlement& g2 = r.generators[1];
  EXPECT_NEAR(g2.bid_surplus, 250, 0.01);
  EXPECT_NEAR(g2.q, 250, 0.01);
  EXPECT_NEAR(g2.loc, 0, 0.01);
  EXPECT_NEAR(g2.mw, 0, 0.01);
  EXPECT_NEAR(r.total_loc(), 0, 0.03);
  expect_loc_ge_mw(r);
}

TEST(Uplifts, ExampleOneTrueRampLeavesNoProfit) {
  const Scenario s = fixtures::ex1(true);
  const DispatchSolution sol = one_shot_ed(s);
  const SettlementReport r = uplifts(lmp(sol), sol.kkt.dispatch, s);
  EXPECT_NEAR(r.generators[1].bid_surplus, 0, 0.01);
}

TEST(Uplifts, ExampleTwoRollingLmpNeedsUplift) {
  const Scenario s = fixtures::ex2();
  const RollingTrace tr = rolling_ed(s);
  const SettlementReport rl = uplifts(rolling_prices(tr, Scheme::kRollingLmp), tr.realized, s);
  EXPECT_NEAR(rl.generators[1].loc, 250, 0.01);
  EXPECT_NEAR(rl.generators[1].mw, 250, 0.01);
  expect_loc_ge_mw(rl);
  const SettlementReport rt = uplifts(rolling_prices(tr, Scheme::kRollingTlmp), tr.realized, s);
  for (const auto& g : rt.generators) {
    EXPECT_NEAR(g.loc, 0, 0.01) << g.id;
    EXPECT_NEAR(g.mw, 0, 0.01) << g.id;
  }
}

TEST(Uplifts, TrueCostSurplusSeparatesFromBid) {
  const Scenario s = fixtures::apxl(29);
  const RollingTrace tr = rolling_ed(s);
  const SettlementReport r = uplifts(rolling_prices(tr, Scheme::kRollingLmp), tr.realized, s);
  const GeneratorSettlement& g3 = r.generators[2];
  EXPECT_NEAR(g3.bid_surplus - g3.true_surplus, -(g3.bid_cost - g3.true_cost), 1e-9);
  EXPECT_NEAR(g3.profit_with_uplift, g3.true_surplus + g3.loc, 1e-9);
}

TEST(Merchandising, TlmpSurplusEqualsRampingCharge) {
  for (const auto& n : {"fix_ramp", "fix_ex1", "fix_triv"}) {
    const Scenario s = fixtures::by_name(n);
    const DispatchSolution sol = one_shot_ed(s);
    const SettlementReport r = uplifts(tlmp(sol), sol.kkt.dispatch, s);
    ASSERT_TRUE(r.operator_account.ramping_charge.has_value());
    EXPECT_GE(r.operator_account.value, -0.01) << n;
    EXPECT_NEAR(r.operator_account.value, *r.operator_account.ramping_charge, 0.01) << n;
  }
  const Scenario ex1 = fixtures::ex1();
  const DispatchSolution sol = one_shot_ed(ex1);
  EXPECT_NEAR(uplifts(tlmp(sol), sol.kkt.dispatch, ex1).operator_account.value, 250, 0.01);
}

TEST(Merchandising, RandomScenariosSatisfyIdentity) {
  for (std::uint64_t seed = 500; seed < 530; ++seed) {
    const Scenario s = testing::random_scenario(seed);
    const DispatchSolution sol = one_shot_ed(s);
    const SettlementReport r = uplifts(tlmp(sol), sol.kkt.dispatch, s);
    EXPECT_GE(r.operator_account.value, -0.01) << "seed " << seed;
    EXPECT_NEAR(r.operator_account.value, *r.operator_account.ramping_charge, 0.01)
        << "seed " << seed;
  }
}

TEST(Uplifts, OneShotLmpHasZeroLocOnRandomScenarios) {
  for (std::uint64_t seed = 600; seed < 640; ++seed) {
    const Scenario s = testing::random_scenario(seed);
    const DispatchSolution sol = one_shot_ed(s);
    for (const PriceSchedule& p : {lmp(sol), tlmp(sol)}) {
      const SettlementReport r = uplifts(p, sol.kkt.dispatch, s);
      expect_loc_ge_mw(r);
      for (const auto& g : r.generators) EXPECT_NEAR(g.loc, 0, 0.01) << "seed " << seed;
    }
  }
}

TEST(Uplifts, UnreachableShutdownCanMakeQNegative) {
  // Without the reachability cap a unit may be forced to run at a loss, so
  // Q < 0 and LOC >= MW no longer follows. Every such case must have a unit
  // that cannot ramp to zero in the first interval.
  testing::RandomScenarioOptions o;
  o.shutdown_reachable = false;
  int negative = 0;
  for (std::uint64_t seed = 600; seed < 640; ++seed) {
    const Scenario s = testing::random_scenario(seed, o);
    const DispatchSolution sol = one_shot_ed(s);
    const SettlementReport r = uplifts(lmp(sol), sol.kkt.dispatch, s);
    for (int i = 0; i < s.size(); ++i) {
      const GeneratorSettlement& g = r.generators[i];
      if (g.q >= -1e-9) {
        EXPECT_GE(g.loc, g.mw - 0.01) << "seed " << seed;
        continue;
      }
      ++negative;
      EXPECT_GT(s.generators[i].initial, s.generators[i].ramp_down) << "seed " << seed;
    }
  }
  EXPECT_GT(negative, 0);
}

TEST(Uplifts, ExcludingInitialRampRaisesQ) {
  const Scenario s = fixtures::ramp();
  const DispatchSolution sol = one_shot_ed(s);
  SettlementOptions o;
  o.include_initial_ramp = false;
  const SettlementReport with = uplifts(lmp(sol), sol.kkt.dispatch, s);
  const SettlementReport without = uplifts(lmp(sol), sol.kkt.dispatch, s, o);
  for (int i = 0; i < s.size(); ++i) {
    EXPECT_GE(without.generators[i].q, with.generators[i].q - 1e-9);
  }
}

TEST(Uplifts, ShapeMismatchIsRejected) {
  const Scenario s = fixtures::ex1();
  const DispatchSolution sol = one_shot_ed(s);
  EXPECT_THROW(uplifts(lmp(sol), sol.kkt.dispatch.leftCols(2), s), InputError);
}

}  // namespace
}  // namespace tlmp
