#include <gtest/gtest.h>

#include "random_scenario.hpp"
#include "tlmp/audit.hpp"
#include "tlmp/fixtures.hpp"

namespace tlmp {
namespace {

bool all_loc_zero(const PriceSchedule& p, const Eigen::MatrixXd& G, const Scenario& s) {
  for (const auto& g : uplifts(p, G, s).generators) {
    if (g.loc > kMoneyTolerance) return false;
  }
  return true;
}

TEST(Equilibrium, ExampleOneLmpIsGeneralButNotStrong) {
  const Scenario s = fixtures::ex1();
  const DispatchSolution sol = one_shot_ed(s);
  const EquilibriumReport r = check_strong_equilibrium(sol.kkt.dispatch, lmp(sol), s);
  EXPECT_TRUE(r.general);
  ASSERT_TRUE(r.strong.has_value());
  EXPECT_FALSE(*r.strong);
  EXPECT_NEAR(r.partial_gap(1, 0), 200, 0.01);
  ASSERT_FALSE(r.partial_failures.empty());
  EXPECT_EQ(r.partial_failures.front(), 0);
}

TEST(Equilibrium, ExampleOneTlmpIsStrong) {
  const Scenario s = fixtures::ex1();
  const DispatchSolution sol = one_shot_ed(s);
  const EquilibriumReport r = check_strong_equilibrium(sol.kkt.dispatch, tlmp(sol), s);
  EXPECT_TRUE(*r.strong);
  EXPECT_LE(r.partial_gap.maxCoeff(), 0.01);
}

TEST(Equilibrium, ExampleTwoRollingSchemes) {
  const Scenario s = fixtures::ex2();
  const RollingTrace tr = rolling_ed(s);
  const EquilibriumReport rl =
      check_strong_equilibrium(tr.realized, rolling_prices(tr, Scheme::kRollingLmp), s);
  EXPECT_FALSE(rl.general);
  EXPECT_NEAR(rl.profit_gap(1), 250, 0.01);
  const EquilibriumReport rt =
      check_strong_equilibrium(tr.realized, rolling_prices(tr, Scheme::kRollingTlmp), s);
  EXPECT_TRUE(*rt.strong);
}

TEST(Equilibrium, UnclearedDispatchIsNotAnEquilibrium) {
  const Scenario s = fixtures::triv();
  const DispatchSolution sol = one_shot_ed(s);
  Eigen::MatrixXd G = sol.kkt.dispatch;
  G(0, 1) += 1.0;
  EXPECT_FALSE(check_general_equilibrium(G, lmp(sol), s).general);
}

TEST(Equilibrium, VerdictMatchesZeroLocOnRandomScenarios) {
  for (std::uint64_t seed = 700; seed < 730; ++seed) {
    Scenario s = testing::random_scenario(seed);
    const DispatchSolution sol = one_shot_ed(s);
    for (const PriceSchedule& p : {lmp(sol), tlmp(sol)}) {
      EXPECT_EQ(check_general_equilibrium(sol.kkt.dispatch, p, s).general,
                all_loc_zero(p, sol.kkt.dispatch, s))
          << "seed " << seed;
      EXPECT_TRUE(check_general_equilibrium(sol.kkt.dispatch, p, s).general) << "seed " << seed;
    }
    EXPECT_TRUE(*check_strong_equilibrium(sol.kkt.dispatch, tlmp(sol), s).strong)
        << "seed " << seed;
  }
}

TEST(Partial, SingleIntervalBestResponse) {
  const Scenario s = fixtures::ex1();
  const std::vector<double> g = {380, 40, 0}, prev = {380, 40, 0}, price = {25, 25, 25};
  const auto gaps = check_partial_equilibrium(g, prev, price, s, 0);
  EXPECT_NEAR(gaps[1], 200, 1e-9);  // best is to drop to 0
  EXPECT_NEAR(gaps[0], 0, 1e-9);
  EXPECT_NEAR(gaps[2], 0, 1e-9);
}

TEST(Conditions, Thm2HoldsAtFirstIntervalOfExampleOneAndRamp) {
  for (const auto& n : {"fix_ex1", "fix_ramp"}) {
    const Scenario s = fixtures::by_name(n);
    const DispatchSolution sol = one_shot_ed(s);
    const ConditionReport r = thm2_conditions(sol, s);
    EXPECT_TRUE(r.satisfied_anywhere) << n;
    bool found = false;
    for (const auto& c : r.cells) found = found || (c.unit == 1 && c.interval == 0 && c.satisfied());
    EXPECT_TRUE(found) << n;
    // Consequence: uniform prices fail the single-interval check there.
    const EquilibriumReport e = check_strong_equilibrium(sol.kkt.dispatch, lmp(sol), s);
    EXPECT_FALSE(e.partial_failures.empty()) << n;
  }
}

TEST(Conditions, Thm2FailsWithoutBindingRamps) {
  const Scenario s = fixtures::triv();
  EXPECT_FALSE(thm2_conditions(one_shot_ed(s), s).satisfied_anywhere);
}

TEST(Conditions, Thm3HoldsAtFirstIntervalOfExampleTwo) {
  const Scenario s = fixtures::ex2();
  const ConditionReport r = thm3_conditions(rolling_ed(s), s);
  ASSERT_FALSE(r.intervals.empty());
  EXPECT_EQ(r.intervals.front().interval, 0);
  EXPECT_TRUE(r.intervals.front().satisfied());
  EXPECT_TRUE(r.satisfied_anywhere);
}

TEST(Conditions, Thm3NeedsTwoGenerators) {
  const Scenario s = fixtures::triv();
  const ConditionReport r = thm3_conditions(rolling_ed(s), s);
  EXPECT_FALSE(r.satisfied_anywhere);
  for (const auto& iv : r.intervals) EXPECT_FALSE(iv.two_generators);
}

TEST(Bids, PriceTakerTruthIsOptimalUnderRollingTlmp) {
  const Scenario s = fixtures::apxl();
  const std::vector<double> grid = {26, 27, 28, 29, 30, 31, 32};
  const BidExperiment e = truthful_bidding_experiment(s, 2, grid, BidMode::kPriceTaker);
  EXPECT_DOUBLE_EQ(e.truthful_bid, 28);
  EXPECT_DOUBLE_EQ(e.argmax_bid, 28);
  ASSERT_EQ(e.points.size(), grid.size());
  for (const auto& p : e.points) EXPECT_LE(p.true_profit, e.points[2].true_profit + 0.01);
}

TEST(Bids, FullRecomputeRollingLmpRewardsOverbidding) {
  const Scenario s = fixtures::apxl();
  const std::vector<double> grid = {28, 29};
  const BidExperiment e =
      truthful_bidding_experiment(s, 2, grid, BidMode::kFullRecompute, Scheme::kRollingLmp);
  EXPECT_NEAR(e.points[0].loc, 5, 0.01);
  EXPECT_NEAR(e.points[1].loc, 15, 0.01);
  EXPECT_NEAR(e.points[0].true_profit, 25, 0.01);
  EXPECT_NEAR(e.points[1].true_profit, 25, 0.01);
  EXPECT_DOUBLE_EQ(e.argmax_bid, 29);
}

TEST(Bids, HighBidIsNotDispatched) {
  const Scenario s = fixtures::apxl();
  const std::vector<double> grid = {31};
  const BidExperiment e = truthful_bidding_experiment(s, 2, grid, BidMode::kFullRecompute);
  EXPECT_NEAR(e.points[0].dispatch.cwiseAbs().maxCoeff(), 0, 1e-6);
}

TEST(Bids, NonlinearTrueCostIsRejected) {
  Scenario s = fixtures::ex1();
  s.generators[2].bid_cost = {CostCurve::quadratic(0.1, 30)};
  const std::vector<double> grid = {30};
  EXPECT_THROW(truthful_bidding_experiment(s, 2, grid, BidMode::kPriceTaker), InputError);
}

TEST(Frequency, DeterministicAndBounded) {
  Scenario s = fixtures::mc(0.04, 1);
  const int pt = add_price_taker_unit(s);
  EXPECT_EQ(s.generators[pt].id, "PT");
  const FrequencyResult a = price_taker_frequency(s, pt, 0.01, 5, 9);
  const FrequencyResult b = price_taker_frequency(s, pt, 0.01, 5, 9);
  EXPECT_EQ(a.unchanged, b.unchanged);
  EXPECT_EQ(a.pairs, b.pairs);
  EXPECT_GE(a.fraction, 0.0);
  EXPECT_LE(a.fraction, 1.0);
  EXPECT_EQ(a.pairs, (5 - a.infeasible) * s.horizon());
}

}  // namespace
}  // namespace tlmp
