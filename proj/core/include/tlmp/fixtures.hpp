#pragma once

// Built-in scenarios used by the tests and the `reproduce` commands.

#include <string>
#include <vector>

#include "tlmp/model.hpp"

namespace tlmp::fixtures {

// One unit (c=20, cap 100, ramp 100, g0=50), d=(50, 60).
Scenario triv();
// Two units where G2's ramp limit couples the intervals, d=(100, 155).
Scenario ramp();
// Three units, one-shot, d=(420, 475, 440). `true_ramp` uses G2's actual
// ramp capability of 100 MW instead of the declared 50 MW.
Scenario ex1(bool true_ramp = false);
// Two units, rolling window W=2 with an over-forecast of 600 at t=2.
Scenario ex2();
// ex2 plus a small price-taking unit G3 with true cost 28 bidding `g3_bid`.
Scenario apxl(double g3_bid = 28.0);
// 24-interval daily cycle with three units, W=4, Gaussian random-walk
// forecast error with per-step deviation `sigma` (fraction of mean demand).
Scenario mc(double sigma = 0.04, std::uint64_t seed = 1);

// Ramp scaling factors for the tightness ladder A (tight) .. H (slack).
struct RampLevel {
  std::string label;
  double factor;
};
const std::vector<RampLevel>& ramp_levels();

// Lookup by CLI name (fix_triv, fix_ramp, fix_ex1, fix_ex1_true, fix_ex2,
// fix_apxl, fix_mc). Throws InputError for unknown names.
Scenario by_name(const std::string& name);
bool is_fixture_name(const std::string& name);
std::vector<std::string> names();

}  // namespace tlmp::fixtures
