#include "commands.hpp"

#include <cmath>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "report.hpp"
#include "tlmp/audit.hpp"
#include "tlmp/dispatch.hpp"
#include "tlmp/fixtures.hpp"
#include "tlmp/harness.hpp"
#include "tlmp/pricing.hpp"
#include "tlmp/settlement.hpp"

namespace tlmp::cli {

namespace {

using ojson = nlohmann::ordered_json;

class ExpectationFailed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

double cents(double v) {
  const double r = std::round(v * 100.0) / 100.0;
  return r == 0.0 ? 0.0 : r;
}

double rounded(double v, double step) {
  const double r = std::round(v / step) * step;
  return r == 0.0 ? 0.0 : r;
}

Scenario resolve_scenario(const std::string& name) {
  Scenario s = fixtures::is_fixture_name(name) ? fixtures::by_name(name) : load_scenario(name);
  const ValidationReport rep = validate_scenario(s);
  if (!rep.ok()) throw InputError("invalid scenario '" + name + "': " + rep.summary());
  return s;
}

bool rolling_default(const Scenario& s) {
  return s.forecast.kind != ForecastKind::kExact || s.window < s.horizon();
}

Scheme parse_scheme(const std::string& name) {
  if (name == "lmp") return Scheme::kLmp;
  if (name == "tlmp") return Scheme::kTlmp;
  if (name == "r-lmp") return Scheme::kRollingLmp;
  if (name == "r-tlmp") return Scheme::kRollingTlmp;
  throw InputError("unknown pricing scheme '" + name + "'");
}

bool is_rolling(Scheme s) { return s == Scheme::kRollingLmp || s == Scheme::kRollingTlmp; }

std::string fmt_double(double v) {
  std::ostringstream o;
  o << v;
  return o.str();
}

// A tiny checklist used by `reproduce`.
class Checks {
 public:
  explicit Checks(std::ostream& out) : out_(out) {}
  void near(const std::string& what, double got, double want, double tol) {
    record(what, std::abs(got - want) <= tol, fmt_double(rounded(got, 1e-6)), fmt_double(want));
  }
  void truth(const std::string& what, bool ok) {
    record(what, ok, ok ? "true" : "false", "true");
  }
  bool ok() const { return failures_ == 0; }
  std::string csv() const { return csv_; }

 private:
  void record(const std::string& what, bool ok, const std::string& got, const std::string& want) {
    out_ << (ok ? "PASS " : "FAIL ") << what << " (got " << got << ", want " << want << ")\n";
    csv_ += (ok ? "pass," : "fail,") + what + ',' + got + ',' + want + '\n';
    if (!ok) ++failures_;
  }
  std::ostream& out_;
  int failures_ = 0;
  std::string csv_ = "status,check,got,want\n";
};

struct Options {
  std::string scenario;
  std::string out = "out";
  std::string pricing;
  std::optional<double> sigma;
  std::optional<std::uint64_t> seed;
  bool regularize = false;
  bool exclude_initial_ramp = false;
  std::string check;
  std::string mode = "price-taker";
  std::string subject;
  std::vector<double> grid;
  std::string expect;
  int realizations = 100;
  double delta = 0.01;
  std::string config;
  int threads = 1;
  std::string name;
  std::optional<int> mc_realizations;
};

DispatchOptions dispatch_options(const Options& o) {
  DispatchOptions d;
  if (o.regularize) d.regularization = 1e-9;
  return d;
}

Manifest manifest_for(const std::string& command, const Options& o) {
  Manifest m;
  m.command = command;
  m.scenario = o.scenario;
  if (!o.pricing.empty()) m.parameters["pricing"] = o.pricing;
  if (o.regularize) m.parameters["regularize"] = "1e-9";
  if (o.exclude_initial_ramp) m.parameters["q_initial_ramp"] = "excluded";
  return m;
}

int cmd_solve(const Options& o, std::ostream& out) {
  const Scenario s = resolve_scenario(o.scenario);
  const std::string pricing = o.pricing.empty() ? "both" : o.pricing;
  if (pricing != "lmp" && pricing != "tlmp" && pricing != "both") {
    throw InputError("solve --pricing must be lmp, tlmp or both");
  }
  const DispatchSolution sol = one_shot_ed(s, dispatch_options(o));
  std::vector<PriceSchedule> schedules;
  if (pricing != "tlmp") schedules.push_back(lmp(sol));
  if (pricing != "lmp") schedules.push_back(tlmp(sol));
  SettlementOptions so;
  so.include_initial_ramp = !o.exclude_initial_ramp;
  std::vector<SettlementReport> reports;
  for (const auto& p : schedules) reports.push_back(uplifts(p, sol.kkt.dispatch, s, so));

  OutputDir dir(o.out);
  dir.write("dispatch.csv", dispatch_csv(s, sol.kkt.dispatch));
  dir.write("prices.csv", prices_csv(s, schedules));
  dir.write("duals.csv", duals_csv(s, sol.kkt));
  dir.write("settlement.csv", settlement_csv(reports));
  Manifest m = manifest_for("solve", o);
  m.parameters["pricing"] = pricing;
  write_manifest(dir, m);
  out << "objective " << money(sol.kkt.objective) << ", KKT residual " << sol.kkt.kkt_residual_inf
      << ", outputs in " << dir.root().string() << '\n';
  return kOk;
}

Scenario apply_forecast_flags(Scenario s, const Options& o) {
  if ((o.sigma || o.seed) && s.forecast.kind != ForecastKind::kGaussianRandomWalk) {
    throw InputError("--sigma/--seed conflict with the scenario's non-random forecast");
  }
  if (o.sigma) {
    if (*o.sigma < 0.0) throw InputError("--sigma must be >= 0");
    s.forecast.sigma = *o.sigma;
  }
  if (o.seed) s.forecast.seed = *o.seed;
  return s;
}

int cmd_roll(const Options& o, std::ostream& out) {
  const Scenario s = apply_forecast_flags(resolve_scenario(o.scenario), o);
  const std::string pricing = o.pricing.empty() ? "both" : o.pricing;
  if (pricing != "r-lmp" && pricing != "r-tlmp" && pricing != "both") {
    throw InputError("roll --pricing must be r-lmp, r-tlmp or both");
  }
  const RollingTrace trace = rolling_ed(s, dispatch_options(o));
  SettlementOptions so;
  so.include_initial_ramp = !o.exclude_initial_ramp;
  std::vector<SettlementReport> reports;
  std::vector<PriceSchedule> schedules;
  if (pricing != "r-tlmp") schedules.push_back(rolling_prices(trace, Scheme::kRollingLmp));
  if (pricing != "r-lmp") schedules.push_back(rolling_prices(trace, Scheme::kRollingTlmp));
  for (const auto& p : schedules) reports.push_back(uplifts(p, trace.realized, s, so));

  OutputDir dir(o.out);
  dir.write("trace.csv", trace_csv(s, trace));
  dir.write("prices.csv", prices_csv(s, schedules));
  dir.write("settlement.csv", settlement_csv(reports));
  Manifest m = manifest_for("roll", o);
  m.parameters["pricing"] = pricing;
  if (s.forecast.kind == ForecastKind::kGaussianRandomWalk) {
    m.parameters["sigma"] = fmt_double(s.forecast.sigma);
    m.seed = std::to_string(s.forecast.seed);
  }
  write_manifest(dir, m);
  out << "rolled " << trace.horizon() << " intervals, outputs in " << dir.root().string() << '\n';
  return kOk;
}

// Dispatch and prices for one scheme over the full horizon.
struct Priced {
  Eigen::MatrixXd G;
  PriceSchedule prices;
};

Priced price_scenario(const Scenario& s, Scheme scheme, const DispatchOptions& d) {
  Priced p;
  if (is_rolling(scheme)) {
    const RollingTrace trace = rolling_ed(s, d);
    p.G = trace.realized;
    p.prices = rolling_prices(trace, scheme);
  } else {
    const DispatchSolution sol = one_shot_ed(s, d);
    p.G = sol.kkt.dispatch;
    p.prices = scheme == Scheme::kLmp ? lmp(sol) : tlmp(sol);
  }
  return p;
}

ojson equilibrium_json(const EquilibriumReport& r, const Scenario& s) {
  ojson j;
  j["general"] = r.general;
  if (r.strong) j["strong"] = *r.strong;
  ojson gaps = ojson::object();
  for (int i = 0; i < s.size(); ++i) gaps[s.generators[i].id] = cents(r.profit_gap(i));
  j["profit_gap"] = gaps;
  double worst = 0.0;
  for (Eigen::Index t = 0; t < r.clearing_residual.size(); ++t) {
    worst = std::max(worst, r.clearing_residual(t));
  }
  j["max_clearing_residual_mw"] = rounded(worst, 1e-4);
  if (r.partial_gap.size() > 0) {
    ojson pg = ojson::object();
    for (int i = 0; i < s.size(); ++i) {
      ojson row = ojson::array();
      for (Eigen::Index t = 0; t < r.partial_gap.cols(); ++t) row.push_back(cents(r.partial_gap(i, t)));
      pg[s.generators[i].id] = row;
    }
    j["partial_gap"] = pg;
    ojson fails = ojson::array();
    for (int t : r.partial_failures) fails.push_back(t + 1);
    j["partial_failures"] = fails;
  }
  j["tolerance"] = r.tolerance;
  return j;
}

int subject_index(const Scenario& s, const std::string& id, int fallback) {
  if (id.empty()) return fallback;
  const int i = s.find_generator(id);
  if (i < 0) throw InputError("no generator '" + id + "' in scenario");
  return i;
}

int cmd_audit(const Options& o, std::ostream& out) {
  Scenario s = apply_forecast_flags(resolve_scenario(o.scenario), o);
  const DispatchOptions d = dispatch_options(o);
  const std::string pricing =
      o.pricing.empty() ? (rolling_default(s) ? "r-tlmp" : "tlmp") : o.pricing;
  ojson j;
  j["check"] = o.check;
  j["scenario"] = o.scenario;
  std::optional<bool> verdict;

  if (o.check == "general" || o.check == "partial" || o.check == "strong") {
    const Scheme scheme = parse_scheme(pricing);
    j["pricing"] = scheme_name(scheme);
    const Priced p = price_scenario(s, scheme, d);
    const EquilibriumReport r = o.check == "general"
                                    ? check_general_equilibrium(p.G, p.prices, s)
                                    : check_strong_equilibrium(p.G, p.prices, s);
    j["report"] = equilibrium_json(r, s);
    if (o.check == "general") verdict = r.general;
    if (o.check == "partial") verdict = r.partial_failures.empty();
    if (o.check == "strong") verdict = *r.strong;
  } else if (o.check == "thm2") {
    const DispatchSolution sol = one_shot_ed(s, d);
    const ConditionReport r = thm2_conditions(sol, s);
    ojson cells = ojson::array();
    for (const auto& c : r.cells) {
      cells.push_back({{"gen", s.generators[c.unit].id},
                       {"t", c.interval + 1},
                       {"marginal", c.marginal},
                       {"preceding_slack", c.preceding_slack},
                       {"succeeding_binding", c.succeeding_binding},
                       {"satisfied", c.satisfied()}});
    }
    j["cells"] = cells;
    verdict = r.satisfied_anywhere;
  } else if (o.check == "thm3") {
    const RollingTrace trace = rolling_ed(s, d);
    const ConditionReport r = thm3_conditions(trace, s);
    ojson iv = ojson::array();
    for (const auto& c : r.intervals) {
      ojson e = {{"t", c.interval + 1}, {"two_generators", c.two_generators}};
      if (c.first >= 0) {
        e["pair"] = {s.generators[c.first].id, s.generators[c.second].id};
      }
      e["distinct_costs"] = c.distinct_costs;
      e["both_marginal"] = c.both_marginal;
      e["ramps_slack"] = c.ramps_slack;
      e["satisfied"] = c.satisfied();
      iv.push_back(e);
    }
    j["intervals"] = iv;
    verdict = r.satisfied_anywhere;
  } else if (o.check == "bids") {
    const int subject = subject_index(s, o.subject, s.size() - 1);
    const Scheme scheme = parse_scheme(pricing);
    BidMode mode;
    if (o.mode == "price-taker") {
      mode = BidMode::kPriceTaker;
    } else if (o.mode == "full-recompute") {
      mode = BidMode::kFullRecompute;
    } else {
      throw InputError("--mode must be price-taker or full-recompute");
    }
    std::vector<double> grid = o.grid;
    if (grid.empty()) {
      const auto& g = s.generators[subject];
      const double c = (g.true_cost.empty() ? g.bid_cost : g.true_cost).front().linear_coef();
      for (int k = -2; k <= 4; ++k) grid.push_back(c + k);
    }
    const BidExperiment e = truthful_bidding_experiment(s, subject, grid, mode, scheme);
    j["pricing"] = scheme_name(scheme);
    j["mode"] = o.mode;
    j["subject"] = s.generators[subject].id;
    j["truthful_bid"] = e.truthful_bid;
    ojson pts = ojson::array();
    for (const auto& p : e.points) {
      ojson disp = ojson::array();
      for (Eigen::Index t = 0; t < p.dispatch.size(); ++t) disp.push_back(rounded(p.dispatch(t), 1e-4));
      pts.push_back({{"bid", p.bid},
                     {"dispatch_mw", disp},
                     {"true_profit", cents(p.true_profit)},
                     {"loc", cents(p.loc)},
                     {"profit_with_uplift", cents(p.profit_with_uplift)}});
    }
    j["points"] = pts;
    j["argmax_bid"] = e.argmax_bid;
    verdict = e.argmax_bid == e.truthful_bid;
  } else if (o.check == "ptfreq") {
    if (!o.expect.empty()) throw InputError("--expect is not defined for ptfreq");
    int subject;
    if (o.subject.empty()) {
      subject = add_price_taker_unit(s);
    } else {
      subject = subject_index(s, o.subject, 0);
    }
    const std::uint64_t seed = o.seed.value_or(s.forecast.seed);
    const FrequencyResult f = price_taker_frequency(s, subject, o.delta, o.realizations, seed);
    j["subject"] = s.generators[subject].id;
    j["delta"] = o.delta;
    j["realizations"] = o.realizations;
    j["seed"] = seed;
    j["pairs"] = f.pairs;
    j["unchanged"] = f.unchanged;
    j["infeasible"] = f.infeasible;
    j["fraction"] = rounded(f.fraction, 1e-6);
  } else {
    throw InputError("--check must be one of general, partial, strong, thm2, thm3, bids, ptfreq");
  }
  if (verdict) j["verdict"] = *verdict ? "pass" : "fail";

  OutputDir dir(o.out);
  dir.write("audit.json", j.dump(2) + "\n");
  Manifest m = manifest_for("audit", o);
  m.parameters["check"] = o.check;
  if (o.check == "bids") m.parameters["mode"] = o.mode;
  write_manifest(dir, m);
  out << o.check << ": " << (verdict ? (*verdict ? "pass" : "fail") : "reported") << '\n';

  if (!o.expect.empty()) {
    if (o.expect != "pass" && o.expect != "fail") throw InputError("--expect must be pass or fail");
    if (!verdict || (*verdict ? "pass" : "fail") != o.expect) {
      throw ExpectationFailed("audit verdict differs from --expect " + o.expect);
    }
  }
  return kOk;
}

int cmd_mc(const Options& o, std::ostream& out) {
  McConfig cfg = load_mc_config(o.config);
  if (o.mc_realizations) cfg.realizations = *o.mc_realizations;
  const McStats stats = run_monte_carlo(cfg, o.threads);
  OutputDir dir(o.out);
  dir.write("cells.csv", summarize(stats));
  Manifest m;
  m.command = "mc";
  m.scenario = cfg.base_name;
  m.parameters["config"] = o.config;
  m.parameters["realizations"] = std::to_string(cfg.realizations);
  m.seed = std::to_string(cfg.base_seed);
  write_manifest(dir, m);
  out << stats.cells.size() << " cells, outputs in " << dir.root().string() << '\n';
  return kOk;
}

int reproduce_ex1(OutputDir& dir, std::ostream& out) {
  Checks c(out);
  const Scenario s = fixtures::ex1(false);
  const DispatchSolution sol = one_shot_ed(s);
  const PriceSchedule pl = lmp(sol);
  const PriceSchedule pt = tlmp(sol);
  const int g2 = s.find_generator("G2");
  const double g21 = sol.kkt.dispatch(g2, 0);
  c.near("G2 interval-1 surplus under LMP", pl.demand_price(0) * g21 - 30.0 * g21, -200.0, 0.01);
  c.near("G2 LMP profit, declared ramp 50", generator_surplus(pl, sol.kkt.dispatch, s, g2), 250.0,
         0.01);
  const Scenario st = fixtures::ex1(true);
  const DispatchSolution sol_t = one_shot_ed(st);
  c.near("G2 LMP profit, true ramp 100", generator_surplus(lmp(sol_t), sol_t.kkt.dispatch, st, g2),
         0.0, 0.01);
  c.near("G2 TLMP interval 1", pt.generator_price(g2, 0), 30.0, 1e-6);
  c.near("G2 TLMP interval 2", pt.generator_price(g2, 1), 30.0, 1e-6);
  c.near("G2 ramp premium interval 1", pt.ramp_premium(g2, 0), 5.0, 1e-6);
  c.near("G2 ramp premium interval 2", pt.ramp_premium(g2, 1), -5.0, 1e-6);
  const SettlementReport rt = uplifts(pt, sol.kkt.dispatch, s);
  c.near("TLMP merchandising surplus", rt.operator_account.value, 250.0, 0.01);
  c.near("ramping-charge identity", rt.operator_account.ramping_charge.value_or(NAN), 250.0, 0.01);

  dir.write("dispatch.csv", dispatch_csv(s, sol.kkt.dispatch));
  dir.write("prices.csv", prices_csv(s, {pl, pt}));
  dir.write("duals.csv", duals_csv(s, sol.kkt));
  dir.write("settlement.csv", settlement_csv({uplifts(pl, sol.kkt.dispatch, s), rt}));
  dir.write("settlement_true_ramp.csv", settlement_csv({uplifts(lmp(sol_t), sol_t.kkt.dispatch, st)}));
  dir.write("checks.csv", c.csv());
  return c.ok() ? kOk : kExpectationMismatch;
}

int reproduce_ex2(OutputDir& dir, std::ostream& out) {
  Checks c(out);
  const Scenario s = fixtures::ex2();
  const RollingTrace trace = rolling_ed(s);
  const PriceSchedule rl = rolling_prices(trace, Scheme::kRollingLmp);
  const PriceSchedule rt = rolling_prices(trace, Scheme::kRollingTlmp);
  const SettlementReport sl = uplifts(rl, trace.realized, s);
  const SettlementReport st = uplifts(rt, trace.realized, s);
  const int g2 = s.find_generator("G2");
  c.near("G2 LOC under R-LMP", sl.generators[g2].loc, 250.0, 0.01);
  c.near("G2 MW under R-LMP", sl.generators[g2].mw, 250.0, 0.01);
  for (const auto& g : st.generators) c.near(g.id + " LOC under R-TLMP", g.loc, 0.0, 0.01);
  c.near("G2 R-TLMP premium interval 1", rt.generator_price(g2, 0) - rl.generator_price(g2, 0), 5.0,
         1e-6);

  dir.write("trace.csv", trace_csv(s, trace));
  dir.write("prices.csv", prices_csv(s, {rl, rt}));
  dir.write("settlement.csv", settlement_csv({sl, st}));
  dir.write("checks.csv", c.csv());
  return c.ok() ? kOk : kExpectationMismatch;
}

std::string bids_csv(const BidExperiment& e) {
  std::ostringstream o;
  o << "scheme,mode,bid,true_profit,loc,profit_with_uplift\n";
  for (const auto& p : e.points) {
    o << scheme_name(e.scheme) << ',' << (e.mode == BidMode::kPriceTaker ? "price-taker" : "full-recompute")
      << ',' << rate(p.bid) << ',' << money(p.true_profit) << ',' << money(p.loc) << ','
      << money(p.profit_with_uplift) << '\n';
  }
  return o.str();
}

int reproduce_apxl(OutputDir& dir, std::ostream& out) {
  Checks c(out);
  const Scenario s = fixtures::apxl();
  const int g3 = s.find_generator("G3");
  const std::vector<double> grid = {26, 27, 28, 29, 30, 31, 32};
  const BidExperiment pt = truthful_bidding_experiment(s, g3, grid, BidMode::kPriceTaker);
  c.near("price-taker R-TLMP argmax bid", pt.argmax_bid, 28.0, 0.0);
  double truth_profit = 0.0;
  for (const auto& p : pt.points) {
    if (p.bid == 28.0) truth_profit = p.true_profit;
  }
  bool truth_best = true;
  for (const auto& p : pt.points) truth_best = truth_best && truth_profit >= p.true_profit - 0.01;
  c.truth("truthful profit >= every grid bid (price-taker, R-TLMP)", truth_best);

  const std::vector<double> pair = {28, 29};
  const BidExperiment fr =
      truthful_bidding_experiment(s, g3, pair, BidMode::kFullRecompute, Scheme::kRollingLmp);
  c.truth("bid 29 beats 28 on profit including uplift (R-LMP)",
          fr.points[1].profit_with_uplift > fr.points[0].profit_with_uplift + 0.01);
  c.near("true-cost surplus equal across bids 28 and 29", fr.points[1].true_profit,
         fr.points[0].true_profit, 0.01);

  dir.write("bids.csv", bids_csv(pt) + bids_csv(fr).substr(bids_csv(fr).find('\n') + 1));
  dir.write("checks.csv", c.csv());
  return c.ok() ? kOk : kExpectationMismatch;
}

int reproduce_mc_sweep(OutputDir& dir, const Options& o, std::ostream& out) {
  Checks c(out);
  McConfig cfg;
  cfg.base = fixtures::mc();
  cfg.base_name = "fix_mc";
  cfg.multipliers = fixtures::ramp_levels();
  cfg.sigmas = {0.0, 0.02, 0.04, 0.06};
  cfg.realizations = o.mc_realizations.value_or(400);
  cfg.base_seed = 1;
  const McStats stats = run_monte_carlo(cfg, o.threads);
  const CellStats* tight = nullptr;
  const CellStats* slack = nullptr;
  int tlmp_nonzero = 0, below = 0;
  for (const auto& cell : stats.cells) {
    tlmp_nonzero += cell.tlmp_loc_nonzero;
    below += cell.loc_below_mw;
    if (cell.sigma == 0.06 && cell.label == "B") tight = &cell;
    if (cell.sigma == 0.06 && cell.label == "H") slack = &cell;
  }
  c.near("realizations with nonzero R-TLMP LOC", tlmp_nonzero, 0.0, 0.0);
  c.near("LOC < MW occurrences", below, 0.0, 0.0);
  c.truth("thm3 fraction tight (B) > slack (H) at sigma 6%",
          tight && slack && tight->thm3_fraction > slack->thm3_fraction);
  dir.write("cells.csv", summarize(stats));
  dir.write("checks.csv", c.csv());
  return c.ok() ? kOk : kExpectationMismatch;
}

int cmd_reproduce(const Options& o, std::ostream& out) {
  const std::string root = o.out == "out" ? "out/reproduce-" + o.name : o.out;
  OutputDir dir(root);
  int code;
  Manifest m;
  m.command = "reproduce";
  m.parameters["name"] = o.name;
  if (o.name == "ex1") {
    m.scenario = "fix_ex1";
    code = reproduce_ex1(dir, out);
  } else if (o.name == "ex2") {
    m.scenario = "fix_ex2";
    code = reproduce_ex2(dir, out);
  } else if (o.name == "apxl") {
    m.scenario = "fix_apxl";
    code = reproduce_apxl(dir, out);
  } else if (o.name == "mc-sweep") {
    m.scenario = "fix_mc";
    m.seed = "1";
    m.parameters["realizations"] = std::to_string(o.mc_realizations.value_or(400));
    code = reproduce_mc_sweep(dir, o, out);
  } else {
    throw InputError("reproduce target must be ex1, ex2, apxl or mc-sweep");
  }
  write_manifest(dir, m);
  return code;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multi-interval dispatch, pricing and settlement under ramping limits"};
  app.name(args.empty() ? "tlmp" : args.front());
  app.require_subcommand(1);
  app.set_version_flag("--version", TLMP_VERSION);
  Options o;

  auto scenario_flags = [&](CLI::App* sub) {
    sub->add_option("--scenario", o.scenario, "Scenario file or fixture name")->required();
    sub->add_option("--out", o.out, "Output directory")->capture_default_str();
    sub->add_flag("--regularize", o.regularize, "Add 1e-9 * sum g^2 for unique duals");
  };

  CLI::App* solve = app.add_subcommand("solve", "One-shot dispatch with LMP/TLMP settlement");
  scenario_flags(solve);
  solve->add_option("--pricing", o.pricing, "lmp | tlmp | both");
  solve->add_flag("--exclude-initial-ramp", o.exclude_initial_ramp,
                  "Drop the initial transition from Q's self-schedule");

  CLI::App* roll = app.add_subcommand("roll", "Rolling-window dispatch with R-LMP/R-TLMP");
  scenario_flags(roll);
  roll->add_option("--pricing", o.pricing, "r-lmp | r-tlmp | both");
  roll->add_option("--sigma", o.sigma, "Forecast error level (Gaussian forecasts only)");
  roll->add_option("--seed", o.seed, "Forecast seed (Gaussian forecasts only)");
  roll->add_flag("--exclude-initial-ramp", o.exclude_initial_ramp,
                 "Drop the initial transition from Q's self-schedule");

  CLI::App* audit = app.add_subcommand("audit", "Equilibrium, hypothesis and bidding audits");
  scenario_flags(audit);
  audit->add_option("--check", o.check, "general|partial|strong|thm2|thm3|bids|ptfreq")->required();
  audit->add_option("--pricing", o.pricing, "lmp | tlmp | r-lmp | r-tlmp");
  audit->add_option("--mode", o.mode, "price-taker | full-recompute")->capture_default_str();
  audit->add_option("--subject", o.subject, "Generator id for bids/ptfreq");
  audit->add_option("--grid", o.grid, "Bid grid ($/MWh), comma separated")->delimiter(',');
  audit->add_option("--expect", o.expect, "pass | fail; mismatch exits 4");
  audit->add_option("--realizations", o.realizations, "ptfreq realizations")->capture_default_str();
  audit->add_option("--delta", o.delta, "ptfreq bid perturbation ($/MWh)")->capture_default_str();
  audit->add_option("--sigma", o.sigma, "Forecast error level (Gaussian forecasts only)");
  audit->add_option("--seed", o.seed, "Forecast seed (Gaussian forecasts only)");

  CLI::App* mc = app.add_subcommand("mc", "Monte Carlo sweep from a JSON config");
  mc->add_option("--config", o.config, "McConfig JSON file")->required();
  mc->add_option("--threads", o.threads, "Worker threads")->capture_default_str();
  mc->add_option("--realizations", o.mc_realizations, "Override realizations per cell");
  mc->add_option("--out", o.out, "Output directory")->capture_default_str();

  CLI::App* repro = app.add_subcommand("reproduce", "Re-run a worked example and check it");
  repro->add_option("name", o.name, "ex1 | ex2 | apxl | mc-sweep")->required();
  repro->add_option("--out", o.out, "Output directory (default out/reproduce-<name>)");
  repro->add_option("--threads", o.threads, "Worker threads (mc-sweep)")->capture_default_str();
  repro->add_option("--realizations", o.mc_realizations, "Realizations per cell (mc-sweep)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << TLMP_VERSION << '\n';
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kBadInput;
  }

  try {
    if (solve->parsed()) return cmd_solve(o, out);
    if (roll->parsed()) return cmd_roll(o, out);
    if (audit->parsed()) return cmd_audit(o, out);
    if (mc->parsed()) return cmd_mc(o, out);
    if (repro->parsed()) return cmd_reproduce(o, out);
  } catch (const ExpectationFailed& e) {
    err << "expectation mismatch: " << e.what() << '\n';
    return kExpectationMismatch;
  } catch (const InfeasibleError& e) {
    err << "infeasible: " << e.what() << '\n';
    return kInfeasible;
  } catch (const SolverError& e) {
    err << "solver failure: " << e.what() << '\n';
    return kSolverFailure;
  } catch (const InputError& e) {
    err << "input error: " << e.what() << '\n';
    return kBadInput;
  } catch (const DomainError& e) {
    err << "input error: " << e.what() << '\n';
    return kBadInput;
  }
  return kBadInput;
}

}  // namespace tlmp::cli
