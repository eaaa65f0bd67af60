#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "tlmp/fixtures.hpp"
#include "tlmp/model.hpp"

namespace tlmp {
namespace {

bool has_code(const ValidationReport& r, const std::string& code) {
  for (const auto& v : r.violations) {
    if (v.code == code) return true;
  }
  return false;
}

TEST(CostCurve, LinearQuadraticPiecewiseValues) {
  EXPECT_DOUBLE_EQ(CostCurve::linear(25).cost(10), 250.0);
  EXPECT_DOUBLE_EQ(CostCurve::quadratic(0.5, 10).cost(4), 48.0);
  const CostCurve pw = CostCurve::piecewise({{0, 10}, {50, 20}});
  EXPECT_DOUBLE_EQ(pw.cost(30), 300.0);
  EXPECT_DOUBLE_EQ(pw.cost(80), 500.0 + 600.0);
  EXPECT_DOUBLE_EQ(pw.marginal_left(50), 10.0);
  EXPECT_DOUBLE_EQ(pw.marginal_right(50), 20.0);
}

TEST(CostCurve, MarginalCostIsNondecreasing) {
  const std::vector<CostCurve> curves = {CostCurve::linear(30), CostCurve::quadratic(0.02, 15),
                                         CostCurve::piecewise({{0, 5}, {20, 9}, {60, 40}})};
  for (const auto& c : curves) {
    double prev = -1e300;
    for (double g = 0; g <= 100.0; g += 0.5) {
      const double m = marginal_cost(c, g, 100.0);
      EXPECT_GE(m, prev - 1e-12);
      prev = m;
    }
  }
}

TEST(CostCurve, CheckedEvaluationRejectsOutOfDomain) {
  const CostCurve c = CostCurve::linear(10);
  EXPECT_THROW(cost_eval(c, -0.1, 100), DomainError);
  EXPECT_THROW(cost_eval(c, 100.1, 100), DomainError);
  EXPECT_THROW(marginal_cost(c, 101, 100), DomainError);
  EXPECT_DOUBLE_EQ(marginal_cost(CostCurve::piecewise({{0, 1}, {40, 3}}), 100, 100), 3.0);
}

TEST(CostCurve, PiecewiseRejectsNonconvexSegments) {
  EXPECT_THROW(CostCurve::piecewise({{0, 20}, {50, 10}}), InputError);
  EXPECT_THROW(CostCurve::piecewise({{5, 20}}), InputError);
  EXPECT_THROW(CostCurve::piecewise({}), InputError);
}

TEST(CostCurve, ShiftRaisesEveryMarginal) {
  const CostCurve pw = CostCurve::piecewise({{0, 10}, {50, 20}}).shifted(2);
  EXPECT_DOUBLE_EQ(pw.marginal_right(10), 12.0);
  EXPECT_DOUBLE_EQ(pw.marginal_right(60), 22.0);
  EXPECT_DOUBLE_EQ(CostCurve::quadratic(1, 3).shifted(-1).linear_coef(), 2.0);
}

TEST(Validation, FixturesAreValid) {
  for (const auto& n : fixtures::names()) {
    EXPECT_TRUE(validate_scenario(fixtures::by_name(n)).ok()) << n;
  }
}

TEST(Validation, ReportsEachProblem) {
  Scenario s = fixtures::ex1();
  s.generators[0].capacity = 0;
  s.generators[1].ramp_up = -1;
  s.generators[2].initial = 500;
  s.demand[1] = -5;
  s.window = 7;
  const ValidationReport r = validate_scenario(s);
  EXPECT_TRUE(has_code(r, "bad-capacity"));
  EXPECT_TRUE(has_code(r, "bad-ramp"));
  EXPECT_TRUE(has_code(r, "bad-initial"));
  EXPECT_TRUE(has_code(r, "negative-demand"));
  EXPECT_TRUE(has_code(r, "bad-window"));
  EXPECT_FALSE(r.summary().empty());
}

TEST(Validation, FirstIntervalReachability) {
  Scenario s = fixtures::triv();
  s.demand[0] = 160;  // 50 + ramp 100 caps at 100 anyway
  EXPECT_TRUE(has_code(validate_scenario(s), "demand-unreachable"));
}

TEST(Validation, ForecastTableMustMatchActualOnBindingInterval) {
  Scenario s = fixtures::ex2();
  s.forecast.table[1][0] = 551;
  EXPECT_TRUE(has_code(validate_scenario(s), "bad-forecast"));
}

TEST(Forecast, BindingIntervalIsExactForEveryKind) {
  for (const auto& n : {"fix_ex1", "fix_ex2", "fix_mc"}) {
    const Scenario s = fixtures::by_name(n);
    ForecastRng rng(s.forecast.seed);
    for (int t = 0; t < s.horizon(); ++t) {
      const auto f = generate_forecast(s, t, rng);
      ASSERT_EQ(static_cast<int>(f.size()), std::min(s.window, s.horizon() - t));
      EXPECT_EQ(f.front(), s.demand[t]) << n << " t=" << t;
    }
  }
}

TEST(Forecast, SameSeedIsBitIdentical) {
  const Scenario s = fixtures::mc(0.06, 42);
  ForecastRng a(42), b(42);
  for (int t = 0; t < s.horizon(); ++t) {
    EXPECT_EQ(generate_forecast(s, t, a), generate_forecast(s, t, b));
  }
}

TEST(Forecast, ZeroSigmaIsExact) {
  const Scenario s = fixtures::mc(0.0, 3);
  ForecastRng rng(3);
  for (int t = 0; t < s.horizon(); ++t) {
    const auto f = generate_forecast(s, t, rng);
    for (size_t k = 0; k < f.size(); ++k) EXPECT_EQ(f[k], s.demand[t + k]);
  }
}

TEST(Forecast, TableRowsAreReturnedAsIssued) {
  const Scenario s = fixtures::ex2();
  ForecastRng rng(0);
  EXPECT_EQ(generate_forecast(s, 0, rng), (std::vector<double>{420, 600}));
  EXPECT_EQ(generate_forecast(s, 2, rng), (std::vector<double>{540}));
}

TEST(Json, RoundTripsEveryFixture) {
  for (const auto& n : fixtures::names()) {
    const Scenario s = fixtures::by_name(n);
    const Scenario back = parse_scenario(scenario_to_json(s));
    EXPECT_EQ(scenario_to_json(back), scenario_to_json(s)) << n;
    ASSERT_EQ(back.size(), s.size());
    for (int i = 0; i < s.size(); ++i) {
      EXPECT_EQ(back.generators[i].bid_cost, s.generators[i].bid_cost);
      EXPECT_EQ(back.generators[i].true_cost, s.generators[i].true_cost);
    }
  }
}

TEST(Json, RoundTripsPiecewiseAndQuadratic) {
  Scenario s = fixtures::ramp();
  s.generators[0].bid_cost = {CostCurve::piecewise({{0, 10}, {40, 12.5}})};
  s.generators[1].bid_cost = {CostCurve::quadratic(0.01, 30), CostCurve::quadratic(0.02, 31)};
  const Scenario back = parse_scenario(scenario_to_json(s));
  EXPECT_EQ(back.generators[0].bid_cost, s.generators[0].bid_cost);
  EXPECT_EQ(back.generators[1].bid_cost, s.generators[1].bid_cost);
}

TEST(Json, MalformedInputRaisesInputError) {
  EXPECT_THROW(parse_scenario("{"), InputError);
  EXPECT_THROW(parse_scenario(R"({"generators": 3})"), InputError);
  EXPECT_THROW(parse_scenario(R"({"generators": [{"id": "G1", "cost": {"kind": "cubic"}}],
                                   "demand": [1]})"),
               InputError);
  EXPECT_THROW(load_scenario("/nonexistent/scenario.json"), InputError);
}

TEST(Json, DataDirectoryMatchesEmbeddedFixtures) {
  const std::filesystem::path dir = TLMP_DATA_DIR "/fixtures";
  for (const auto& n : fixtures::names()) {
    const Scenario file = load_scenario((dir / (n + ".json")).string());
    EXPECT_EQ(scenario_to_json(file), scenario_to_json(fixtures::by_name(n))) << n;
  }
}

TEST(Scenario, ScaleRampsScalesBothDirections) {
  const Scenario s = scale_ramps(fixtures::mc(), 0.5);
  EXPECT_DOUBLE_EQ(s.generators[0].ramp_up, 12.5);
  EXPECT_DOUBLE_EQ(s.generators[2].ramp_down, 60.0);
  EXPECT_EQ(s.find_generator("G3"), 2);
  EXPECT_EQ(s.find_generator("nope"), -1);
}

}  // namespace
}  // namespace tlmp
