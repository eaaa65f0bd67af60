#include "tlmp/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "tlmp/audit.hpp"
#include "tlmp/dispatch.hpp"
#include "tlmp/pricing.hpp"
#include "tlmp/settlement.hpp"

namespace tlmp {

namespace {

using nlohmann::json;

struct SchemeSample {
  double loc = 0.0;
  double mw = 0.0;
  double ms = 0.0;
  int loc_below_mw = 0;
  bool loc_nonzero = false;
};

struct Sample {
  bool infeasible = false;
  SchemeSample r_lmp, r_tlmp;
  bool thm2 = false;
  bool thm3 = false;
  int pt_pairs = 0;
  int pt_same = 0;
};

SchemeSample settle(const RollingTrace& trace, const Scenario& s, Scheme scheme) {
  const SettlementReport rep = uplifts(rolling_prices(trace, scheme), trace.realized, s);
  SchemeSample out;
  for (const auto& g : rep.generators) {
    out.loc += g.loc;
    out.mw += g.mw;
    if (g.loc < g.mw - kMoneyTolerance) ++out.loc_below_mw;
    if (std::abs(g.loc) > kMoneyTolerance) out.loc_nonzero = true;
  }
  out.ms = rep.operator_account.value;
  return out;
}

Scenario cell_scenario(const McConfig& cfg, double factor, double sigma) {
  Scenario s = scale_ramps(cfg.base, factor);
  s.forecast.kind = ForecastKind::kGaussianRandomWalk;
  s.forecast.table.clear();
  s.forecast.sigma = sigma;
  return s;
}

Sample run_one(const McConfig& cfg, const Scenario& s, const Scenario& with_pt, int pt_unit,
               std::uint64_t seed) {
  Sample out;
  ForecastRng rng(seed);
  RollingTrace trace;
  try {
    trace = rolling_ed(s, rng);
  } catch (const InfeasibleError&) {
    out.infeasible = true;
    return out;
  }
  if (cfg.wants(Metric::kLoc) || cfg.wants(Metric::kMw) || cfg.wants(Metric::kMs)) {
    out.r_lmp = settle(trace, s, Scheme::kRollingLmp);
    out.r_tlmp = settle(trace, s, Scheme::kRollingTlmp);
  }
  if (cfg.wants(Metric::kThm2)) {
    for (const auto& w : trace.windows) {
      if (thm2_conditions(w, s).satisfied_anywhere) {
        out.thm2 = true;
        break;
      }
    }
  }
  if (cfg.wants(Metric::kThm3)) out.thm3 = thm3_conditions(trace, s).satisfied_anywhere;
  if (cfg.wants(Metric::kPtFreq)) {
    const FrequencyResult f = price_taker_frequency(with_pt, pt_unit, cfg.ptfreq_delta, 1, seed);
    out.pt_pairs = f.pairs;
    out.pt_same = f.unchanged;
  }
  return out;
}

void accumulate(SchemeStats& st, const SchemeSample& x) {
  st.mean_loc += x.loc;
  st.max_loc = std::max(st.max_loc, x.loc);
  st.mean_mw += x.mw;
  st.max_mw = std::max(st.max_mw, x.mw);
  st.mean_ms += x.ms;
}

void finish(SchemeStats& st, int n) {
  if (n == 0) return;
  st.mean_loc /= n;
  st.mean_mw /= n;
  st.mean_ms /= n;
}

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  std::string s(buf);
  // Avoid "-0.00" style output for values that round to zero.
  if (s.front() == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  return s;
}

}  // namespace

const char* metric_name(Metric m) {
  switch (m) {
    case Metric::kLoc:
      return "loc";
    case Metric::kMw:
      return "mw";
    case Metric::kMs:
      return "ms";
    case Metric::kThm2:
      return "thm2";
    case Metric::kThm3:
      return "thm3";
    case Metric::kPtFreq:
      return "ptfreq";
  }
  return "?";
}

Metric parse_metric(const std::string& name) {
  for (Metric m : {Metric::kLoc, Metric::kMw, Metric::kMs, Metric::kThm2, Metric::kThm3,
                   Metric::kPtFreq}) {
    if (name == metric_name(m)) return m;
  }
  throw InputError("unknown metric '" + name + "'");
}

bool McConfig::wants(Metric m) const {
  return std::find(metrics.begin(), metrics.end(), m) != metrics.end();
}

void McConfig::validate() const {
  if (multipliers.empty()) throw InputError("mc config: no ramp multipliers");
  if (sigmas.empty()) throw InputError("mc config: no sigma levels");
  if (realizations < 1) throw InputError("mc config: realizations must be >= 1");
  for (double s : sigmas) {
    if (!(s >= 0.0)) throw InputError("mc config: sigma must be >= 0");
  }
  for (const auto& m : multipliers) {
    if (!(m.factor > 0.0)) throw InputError("mc config: multiplier '" + m.label + "' must be > 0");
    const ValidationReport rep = validate_scenario(scale_ramps(base, m.factor));
    if (!rep.ok()) {
      throw InputError("mc config: base scenario invalid under multiplier '" + m.label +
                       "': " + rep.summary());
    }
  }
}

McConfig parse_mc_config(const std::string& json_text, const std::string& source) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw InputError(source + ": " + e.what());
  }
  McConfig cfg;
  try {
    if (!j.is_object()) throw InputError(source + ": config must be a JSON object");
    if (!j.contains("scenario")) throw InputError(source + ": missing field 'scenario'");
    const json& sc = j.at("scenario");
    if (sc.is_string()) {
      cfg.base_name = sc.get<std::string>();
      cfg.base = fixtures::is_fixture_name(cfg.base_name) ? fixtures::by_name(cfg.base_name)
                                                          : load_scenario(cfg.base_name);
    } else {
      cfg.base = parse_scenario(sc.dump(), source + ":scenario");
      cfg.base_name = cfg.base.name.empty() ? "inline" : cfg.base.name;
    }
    if (j.contains("multipliers")) {
      for (const auto& m : j.at("multipliers")) {
        if (m.is_string()) {
          const std::string label = m.get<std::string>();
          const auto& levels = fixtures::ramp_levels();
          auto it = std::find_if(levels.begin(), levels.end(),
                                 [&](const auto& l) { return l.label == label; });
          if (it == levels.end()) throw InputError(source + ": unknown ramp level '" + label + "'");
          cfg.multipliers.push_back(*it);
        } else {
          cfg.multipliers.push_back({m.value("label", std::string()), m.at("factor").get<double>()});
          if (cfg.multipliers.back().label.empty()) {
            cfg.multipliers.back().label = fmt("x%g", cfg.multipliers.back().factor);
          }
        }
      }
    } else {
      cfg.multipliers = fixtures::ramp_levels();
    }
    cfg.sigmas = j.value("sigmas", std::vector<double>{0.0, 0.02, 0.04, 0.06});
    cfg.realizations = j.value("realizations", 400);
    cfg.base_seed = j.value("seed", std::uint64_t{0});
    if (j.contains("metrics")) {
      cfg.metrics.clear();
      for (const auto& m : j.at("metrics")) cfg.metrics.push_back(parse_metric(m.get<std::string>()));
    }
    cfg.ptfreq_delta = j.value("ptfreq_delta", 0.01);
  } catch (const json::exception& e) {
    throw InputError(source + ": " + e.what());
  }
  cfg.validate();
  return cfg;
}

McConfig load_mc_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_mc_config(buf.str(), path);
}

McStats run_monte_carlo(const McConfig& cfg, int threads) {
  cfg.validate();
  struct CellSetup {
    Scenario s, with_pt;
    int pt_unit = -1;
  };
  std::vector<CellSetup> setups;
  McStats stats;
  stats.metrics = cfg.metrics;
  for (const auto& m : cfg.multipliers) {
    for (double sigma : cfg.sigmas) {
      CellSetup cs;
      cs.s = cell_scenario(cfg, m.factor, sigma);
      cs.with_pt = cs.s;
      cs.pt_unit = add_price_taker_unit(cs.with_pt);
      setups.push_back(std::move(cs));
      CellStats c;
      c.label = m.label;
      c.factor = m.factor;
      c.sigma = sigma;
      c.realizations = cfg.realizations;
      stats.cells.push_back(c);
    }
  }

  const std::size_t R = static_cast<std::size_t>(cfg.realizations);
  const std::size_t jobs = setups.size() * R;
  std::vector<Sample> samples(jobs);
  std::vector<std::exception_ptr> errors(jobs);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t job = next++; job < jobs; job = next++) {
      const auto& cs = setups[job / R];
      const std::uint64_t seed = cfg.base_seed + job % R;
      try {
        samples[job] = run_one(cfg, cs.s, cs.with_pt, cs.pt_unit, seed);
      } catch (...) {
        errors[job] = std::current_exception();
      }
    }
  };
  const int n = std::max(1, threads);
  std::vector<std::thread> pool;
  for (int w = 1; w < n; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  // Aggregate in job order so the result does not depend on scheduling.
  for (std::size_t c = 0; c < setups.size(); ++c) {
    CellStats& cell = stats.cells[c];
    int thm2 = 0, thm3 = 0, pt_pairs = 0, pt_same = 0;
    for (std::size_t k = 0; k < R; ++k) {
      const Sample& x = samples[c * R + k];
      if (x.infeasible) {
        ++cell.infeasible;
        continue;
      }
      ++cell.completed;
      accumulate(cell.r_lmp, x.r_lmp);
      accumulate(cell.r_tlmp, x.r_tlmp);
      cell.loc_below_mw += x.r_lmp.loc_below_mw + x.r_tlmp.loc_below_mw;
      if (x.r_tlmp.loc_nonzero) ++cell.tlmp_loc_nonzero;
      thm2 += x.thm2;
      thm3 += x.thm3;
      pt_pairs += x.pt_pairs;
      pt_same += x.pt_same;
    }
    finish(cell.r_lmp, cell.completed);
    finish(cell.r_tlmp, cell.completed);
    if (cell.completed > 0) {
      cell.thm2_fraction = static_cast<double>(thm2) / cell.completed;
      cell.thm3_fraction = static_cast<double>(thm3) / cell.completed;
    }
    if (pt_pairs > 0) cell.ptfreq = static_cast<double>(pt_same) / pt_pairs;
  }
  return stats;
}

std::string summarize(const McStats& stats) {
  auto wants = [&](Metric m) {
    return std::find(stats.metrics.begin(), stats.metrics.end(), m) != stats.metrics.end();
  };
  std::ostringstream out;
  std::vector<std::string> header = {"level",        "factor",    "sigma",
                                     "realizations", "completed", "infeasible"};
  if (wants(Metric::kLoc)) {
    for (const char* h : {"rlmp_loc_mean", "rlmp_loc_max", "rtlmp_loc_mean", "rtlmp_loc_max",
                          "rtlmp_loc_nonzero", "loc_below_mw"}) {
      header.push_back(h);
    }
  }
  if (wants(Metric::kMw)) {
    for (const char* h : {"rlmp_mw_mean", "rlmp_mw_max", "rtlmp_mw_mean", "rtlmp_mw_max"}) {
      header.push_back(h);
    }
  }
  if (wants(Metric::kMs)) {
    header.push_back("rlmp_ms_mean");
    header.push_back("rtlmp_ms_mean");
  }
  if (wants(Metric::kThm2)) header.push_back("thm2_fraction");
  if (wants(Metric::kThm3)) header.push_back("thm3_fraction");
  if (wants(Metric::kPtFreq)) header.push_back("ptfreq_fraction");
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
  if (stats.metrics.empty()) return out.str();

  for (const auto& c : stats.cells) {
    std::vector<std::string> row = {c.label,
                                    fmt("%g", c.factor),
                                    fmt("%g", c.sigma),
                                    std::to_string(c.realizations),
                                    std::to_string(c.completed),
                                    std::to_string(c.infeasible)};
    if (wants(Metric::kLoc)) {
      row.push_back(fmt("%.2f", c.r_lmp.mean_loc));
      row.push_back(fmt("%.2f", c.r_lmp.max_loc));
      row.push_back(fmt("%.2f", c.r_tlmp.mean_loc));
      row.push_back(fmt("%.2f", c.r_tlmp.max_loc));
      row.push_back(std::to_string(c.tlmp_loc_nonzero));
      row.push_back(std::to_string(c.loc_below_mw));
    }
    if (wants(Metric::kMw)) {
      row.push_back(fmt("%.2f", c.r_lmp.mean_mw));
      row.push_back(fmt("%.2f", c.r_lmp.max_mw));
      row.push_back(fmt("%.2f", c.r_tlmp.mean_mw));
      row.push_back(fmt("%.2f", c.r_tlmp.max_mw));
    }
    if (wants(Metric::kMs)) {
      row.push_back(fmt("%.2f", c.r_lmp.mean_ms));
      row.push_back(fmt("%.2f", c.r_tlmp.mean_ms));
    }
    if (wants(Metric::kThm2)) row.push_back(fmt("%.6f", c.thm2_fraction));
    if (wants(Metric::kThm3)) row.push_back(fmt("%.6f", c.thm3_fraction));
    if (wants(Metric::kPtFreq)) row.push_back(fmt("%.6f", c.ptfreq));
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
    out << '\n';
  }
  return out.str();
}

}  // namespace tlmp
