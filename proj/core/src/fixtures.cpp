#include "tlmp/fixtures.hpp"

#include <cmath>
#include <numbers>

namespace tlmp::fixtures {

namespace {

Generator unit(std::string id, double c, double capacity, double ramp, double initial) {
  Generator g;
  g.id = std::move(id);
  g.bid_cost = {CostCurve::linear(c)};
  g.capacity = capacity;
  g.ramp_up = ramp;
  g.ramp_down = ramp;
  g.initial = initial;
  return g;
}

}  // namespace

Scenario triv() {
  Scenario s;
  s.name = "fix_triv";
  s.generators = {unit("G1", 20, 100, 100, 50)};
  s.demand = {50, 60};
  s.window = 2;
  return s;
}

Scenario ramp() {
  Scenario s;
  s.name = "fix_ramp";
  s.generators = {unit("G1", 10, 100, 100, 65), unit("G2", 30, 100, 20, 40)};
  s.demand = {100, 155};
  s.window = 2;
  return s;
}

Scenario ex1(bool true_ramp) {
  Scenario s;
  s.name = true_ramp ? "fix_ex1_true" : "fix_ex1";
  s.generators = {unit("G1", 25, 380, 500, 380), unit("G2", 30, 200, true_ramp ? 100 : 50, 40),
                  unit("G3", 35, 100, 100, 0)};
  s.demand = {420, 475, 440};
  s.window = 3;
  return s;
}

Scenario ex2() {
  Scenario s;
  s.name = "fix_ex2";
  s.generators = {unit("G1", 25, 500, 500, 370), unit("G2", 30, 200, 50, 50)};
  s.demand = {420, 550, 540};
  s.window = 2;
  s.forecast.kind = ForecastKind::kTable;
  s.forecast.table = {{420, 600}, {550, 540}, {540}};
  return s;
}

Scenario apxl(double g3_bid) {
  Scenario s = ex2();
  s.name = "fix_apxl";
  Generator g3 = unit("G3", g3_bid, 10, 5, 0);
  g3.true_cost = {CostCurve::linear(28)};
  s.generators.push_back(std::move(g3));
  return s;
}

Scenario mc(double sigma, std::uint64_t seed) {
  Scenario s;
  s.name = "fix_mc";
  s.generators = {unit("G1", 20, 300, 25, 300), unit("G2", 30, 250, 40, 50),
                  unit("G3", 45, 200, 120, 0)};
  const int T = 24;
  for (int t = 0; t < T; ++t) {
    s.demand.push_back(450.0 - 100.0 * std::cos(2.0 * std::numbers::pi * t / T));
  }
  s.window = 4;
  s.forecast.kind = ForecastKind::kGaussianRandomWalk;
  s.forecast.sigma = sigma;
  s.forecast.seed = seed;
  return s;
}

const std::vector<RampLevel>& ramp_levels() {
  static const std::vector<RampLevel> levels = {
      {"A", 0.5}, {"B", 0.75}, {"C", 1.0}, {"D", 1.5},
      {"E", 2.0}, {"F", 3.0},  {"G", 5.0}, {"H", 8.0}};
  return levels;
}

Scenario by_name(const std::string& name) {
  if (name == "fix_triv") return triv();
  if (name == "fix_ramp") return ramp();
  if (name == "fix_ex1") return ex1(false);
  if (name == "fix_ex1_true") return ex1(true);
  if (name == "fix_ex2") return ex2();
  if (name == "fix_apxl") return apxl();
  if (name == "fix_mc") return mc();
  throw InputError("unknown fixture '" + name + "'");
}

std::vector<std::string> names() {
  return {"fix_triv", "fix_ramp", "fix_ex1", "fix_ex1_true", "fix_ex2", "fix_apxl", "fix_mc"};
}

bool is_fixture_name(const std::string& name) {
  for (const auto& n : names()) {
    if (n == name) return true;
  }
  return false;
}

}  // namespace tlmp::fixtures
