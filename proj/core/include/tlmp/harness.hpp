#pragma once

// Monte Carlo sweeps over ramp tightness and forecast-error levels.

#include <cstdint>
#include <string>
#include <vector>

#include "tlmp/fixtures.hpp"
#include "tlmp/model.hpp"

namespace tlmp {

enum class Metric { kLoc, kMw, kMs, kThm2, kThm3, kPtFreq };

const char* metric_name(Metric m);  // "loc", "mw", "ms", "thm2", "thm3", "ptfreq"
Metric parse_metric(const std::string& name);

struct McConfig {
  Scenario base;
  std::string base_name;  // fixture name or file path, for reports
  std::vector<fixtures::RampLevel> multipliers;
  std::vector<double> sigmas;
  int realizations = 400;
  std::uint64_t base_seed = 0;
  std::vector<Metric> metrics = {Metric::kLoc, Metric::kMw, Metric::kMs, Metric::kThm2,
                                 Metric::kThm3};
  double ptfreq_delta = 0.01;  // $/MWh

  bool wants(Metric m) const;
  // Throws InputError: empty sweeps, realizations < 1, multipliers <= 0,
  // sigma < 0, or a scaled base scenario that fails validation.
  void validate() const;
};

// JSON: {"scenario": <fixture name | path | scenario object>,
//        "multipliers": [{"label": "A", "factor": 0.5}, ...] or ["A", "H"],
//        "sigmas": [...], "realizations": n, "seed": k,
//        "metrics": ["loc", ...], "ptfreq_delta": d}
McConfig parse_mc_config(const std::string& json_text, const std::string& source = "<string>");
McConfig load_mc_config(const std::string& path);

struct SchemeStats {
  double mean_loc = 0.0;  // per-realization totals over generators
  double max_loc = 0.0;
  double mean_mw = 0.0;
  double max_mw = 0.0;
  double mean_ms = 0.0;
};

struct CellStats {
  std::string label;
  double factor = 1.0;
  double sigma = 0.0;
  int realizations = 0;
  int completed = 0;
  int infeasible = 0;
  SchemeStats r_lmp;
  SchemeStats r_tlmp;
  int loc_below_mw = 0;       // (realization, scheme, generator) with LOC < MW - $0.01
  int tlmp_loc_nonzero = 0;   // realizations with some R-TLMP LOC above $0.01
  double thm2_fraction = 0.0;
  double thm3_fraction = 0.0;
  double ptfreq = 0.0;
};

struct McStats {
  std::vector<Metric> metrics;
  std::vector<CellStats> cells;  // multipliers outer, sigmas inner
};

// Realization k of every cell draws forecasts with seed base_seed + k.
// Infeasible realizations are counted and excluded. Results do not depend
// on `threads`.
McStats run_monte_carlo(const McConfig& cfg, int threads = 1);

// One CSV row per cell; columns depend on the selected metrics. No metrics
// gives a header-only table.
std::string summarize(const McStats& stats);

}  // namespace tlmp
