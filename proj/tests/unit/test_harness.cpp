#include <gtest/gtest.h>

#include <algorithm>

#include "tlmp/harness.hpp"

namespace tlmp {
namespace {

McConfig small_config() {
  return parse_mc_config(R"({"scenario": "fix_mc", "multipliers": ["B", "H"],
                              "sigmas": [0.0, 0.06], "realizations": 6, "seed": 3,
                              "metrics": ["loc", "mw", "ms", "thm2", "thm3", "ptfreq"]})");
}

TEST(McConfig, ParsesLabelsAndObjects) {
  const McConfig a = small_config();
  ASSERT_EQ(a.multipliers.size(), 2u);
  EXPECT_EQ(a.multipliers[1].label, "H");
  EXPECT_DOUBLE_EQ(a.multipliers[1].factor, 8.0);
  EXPECT_EQ(a.base_name, "fix_mc");
  EXPECT_TRUE(a.wants(Metric::kPtFreq));

  const McConfig b = parse_mc_config(
      R"({"scenario": "fix_ex2", "multipliers": [{"label": "x", "factor": 2}]})");
  EXPECT_EQ(b.sigmas, (std::vector<double>{0, 0.02, 0.04, 0.06}));
  EXPECT_EQ(b.realizations, 400);
  EXPECT_FALSE(b.wants(Metric::kPtFreq));
}

TEST(McConfig, RejectsBadInput) {
  EXPECT_THROW(parse_mc_config("[]"), InputError);
  EXPECT_THROW(parse_mc_config(R"({"scenario": "fix_mc", "multipliers": ["Z"]})"), InputError);
  EXPECT_THROW(parse_mc_config(R"({"scenario": "fix_mc", "multipliers": ["A"],
                                   "realizations": 0})"),
               InputError);
  EXPECT_THROW(parse_mc_config(R"({"scenario": "fix_mc", "multipliers": ["A"],
                                   "sigmas": [-0.1]})"),
               InputError);
  EXPECT_THROW(parse_mc_config(R"({"scenario": "fix_mc", "multipliers": ["A"],
                                   "metrics": ["nope"]})"),
               InputError);
  EXPECT_THROW(parse_metric("x"), InputError);
  EXPECT_EQ(parse_metric("thm3"), Metric::kThm3);
  EXPECT_STREQ(metric_name(Metric::kPtFreq), "ptfreq");
}

TEST(MonteCarlo, IndependentOfThreadCount) {
  const McConfig cfg = small_config();
  const McStats one = run_monte_carlo(cfg, 1);
  const McStats three = run_monte_carlo(cfg, 3);
  EXPECT_EQ(summarize(one), summarize(three));
  EXPECT_EQ(summarize(one), summarize(run_monte_carlo(cfg, 1)));
}

TEST(MonteCarlo, RollingTlmpNeverNeedsUplift) {
  const McStats st = run_monte_carlo(small_config(), 1);
  ASSERT_EQ(st.cells.size(), 4u);
  EXPECT_EQ(st.cells[0].label, "B");
  EXPECT_DOUBLE_EQ(st.cells[1].sigma, 0.06);
  for (const auto& c : st.cells) {
    EXPECT_EQ(c.tlmp_loc_nonzero, 0) << c.label << " " << c.sigma;
    EXPECT_EQ(c.loc_below_mw, 0) << c.label << " " << c.sigma;
    EXPECT_EQ(c.completed + c.infeasible, c.realizations);
    EXPECT_LE(c.r_tlmp.max_loc, 0.01);
  }
}

TEST(MonteCarlo, HeaderOnlyWithoutMetrics) {
  McConfig cfg = small_config();
  cfg.metrics.clear();
  const std::string csv = summarize(run_monte_carlo(cfg, 1));
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1);
}

TEST(MonteCarlo, ColumnsFollowMetrics) {
  McConfig cfg = small_config();
  cfg.metrics = {Metric::kThm3};
  const std::string csv = summarize(run_monte_carlo(cfg, 2));
  const std::string header = csv.substr(0, csv.find('\n'));
  EXPECT_NE(header.find("thm3_fraction"), std::string::npos);
  EXPECT_EQ(header.find("rlmp_loc_mean"), std::string::npos);
}

}  // namespace
}  // namespace tlmp
