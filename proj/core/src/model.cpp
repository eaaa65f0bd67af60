#include "tlmp/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

#include "json.hpp"

namespace tlmp {

using nlohmann::json;

CostCurve CostCurve::linear(double c) {
  CostCurve curve;
  curve.kind_ = CostKind::kLinear;
  curve.c_ = c;
  return curve;
}

CostCurve CostCurve::quadratic(double a, double c) {
  if (!(a >= 0.0)) throw InputError("quadratic cost coefficient must be >= 0");
  CostCurve curve;
  curve.kind_ = CostKind::kQuadratic;
  curve.a_ = a;
  curve.c_ = c;
  return curve;
}

CostCurve CostCurve::piecewise(std::vector<Breakpoint> segments) {
  if (segments.empty()) throw InputError("piecewise cost needs at least one segment");
  if (segments.front().start_mw != 0.0) {
    throw InputError("piecewise cost: first segment must start at 0 MW");
  }
  for (size_t k = 1; k < segments.size(); ++k) {
    if (!(segments[k].start_mw > segments[k - 1].start_mw)) {
      throw InputError("piecewise cost: segment starts must increase");
    }
    if (segments[k].slope < segments[k - 1].slope) {
      throw InputError("piecewise cost: slopes must be nondecreasing (convexity)");
    }
  }
  CostCurve curve;
  curve.kind_ = CostKind::kPiecewiseLinear;
  curve.segments_ = std::move(segments);
  return curve;
}

double CostCurve::cost(double g) const {
  switch (kind_) {
    case CostKind::kLinear:
      return c_ * g;
    case CostKind::kQuadratic:
      return a_ * g * g + c_ * g;
    case CostKind::kPiecewiseLinear: {
      double total = 0.0;
      for (size_t k = 0; k < segments_.size(); ++k) {
        const double lo = segments_[k].start_mw;
        if (g <= lo) break;
        const double hi =
            k + 1 < segments_.size() ? std::min(g, segments_[k + 1].start_mw) : g;
        total += segments_[k].slope * (hi - lo);
      }
      return total;
    }
  }
  return 0.0;
}

double CostCurve::marginal_right(double g) const {
  switch (kind_) {
    case CostKind::kLinear:
      return c_;
    case CostKind::kQuadratic:
      return 2.0 * a_ * g + c_;
    case CostKind::kPiecewiseLinear: {
      double slope = segments_.front().slope;
      for (const auto& seg : segments_) {
        if (g >= seg.start_mw) slope = seg.slope;
      }
      return slope;
    }
  }
  return 0.0;
}

double CostCurve::marginal_left(double g) const {
  if (kind_ != CostKind::kPiecewiseLinear) return marginal_right(g);
  double slope = segments_.front().slope;
  for (const auto& seg : segments_) {
    if (g > seg.start_mw) slope = seg.slope;
  }
  return slope;
}

CostCurve CostCurve::shifted(double offset) const {
  CostCurve out = *this;
  out.c_ += offset;
  for (auto& seg : out.segments_) seg.slope += offset;
  return out;
}

double CostCurve::scale() const {
  double s = std::max(std::abs(a_), std::abs(c_));
  for (const auto& seg : segments_) s = std::max(s, std::abs(seg.slope));
  return s;
}

namespace {

void check_domain(double g, double capacity) {
  if (!(g >= 0.0 && g <= capacity)) {
    std::ostringstream msg;
    msg << "output " << g << " MW outside [0, " << capacity << "]";
    throw DomainError(msg.str());
  }
}

}  // namespace

double cost_eval(const CostCurve& curve, double g, double capacity) {
  check_domain(g, capacity);
  return curve.cost(g);
}

double marginal_cost(const CostCurve& curve, double g, double capacity) {
  check_domain(g, capacity);
  return g == capacity ? curve.marginal_left(g) : curve.marginal_right(g);
}

const CostCurve& Generator::bid(int t) const {
  return bid_cost.size() == 1 ? bid_cost.front() : bid_cost.at(static_cast<size_t>(t));
}

const CostCurve& Generator::truth(int t) const {
  if (true_cost.empty()) return bid(t);
  return true_cost.size() == 1 ? true_cost.front()
                               : true_cost.at(static_cast<size_t>(t));
}

std::vector<double> Scenario::initial_output() const {
  std::vector<double> g0;
  g0.reserve(generators.size());
  for (const auto& gen : generators) g0.push_back(gen.initial);
  return g0;
}

int Scenario::find_generator(const std::string& id) const {
  for (size_t i = 0; i < generators.size(); ++i) {
    if (generators[i].id == id) return static_cast<int>(i);
  }
  return -1;
}

std::string ValidationReport::summary() const {
  if (ok()) return "ok";
  std::ostringstream out;
  for (size_t k = 0; k < violations.size(); ++k) {
    if (k) out << "; ";
    out << violations[k].code << " (" << violations[k].entity
        << "): " << violations[k].message;
  }
  return out.str();
}

ValidationReport validate_scenario(const Scenario& s) {
  ValidationReport report;
  auto add = [&](std::string code, std::string message, std::string entity) {
    report.violations.push_back({std::move(code), std::move(message), std::move(entity)});
  };
  const int T = s.horizon();
  if (s.generators.empty()) add("no-generators", "scenario has no generators", "scenario");
  if (T == 0) add("empty-demand", "demand trajectory is empty", "scenario");
  if (s.window < 1 || s.window > std::max(T, 1)) {
    add("bad-window", "window must satisfy 1 <= W <= T", "scenario");
  }
  for (int t = 0; t < T; ++t) {
    if (!(s.demand[t] >= 0.0) || !std::isfinite(s.demand[t])) {
      add("negative-demand", "demand must be finite and >= 0",
          "interval " + std::to_string(t + 1));
    }
  }
  for (const auto& gen : s.generators) {
    if (!(gen.capacity > 0.0)) add("bad-capacity", "capacity must be > 0", gen.id);
    if (!(gen.ramp_up > 0.0)) add("bad-ramp", "ramp_up must be > 0", gen.id);
    if (!(gen.ramp_down > 0.0)) add("bad-ramp", "ramp_down must be > 0", gen.id);
    if (!(gen.initial >= 0.0 && gen.initial <= gen.capacity)) {
      add("bad-initial", "initial output must lie in [0, capacity]", gen.id);
    }
    auto check_curves = [&](const std::vector<CostCurve>& curves, const char* field) {
      if (curves.size() != 1 && static_cast<int>(curves.size()) != T) {
        add("bad-cost", std::string(field) + " must have 1 or T entries", gen.id);
      }
      for (const auto& c : curves) {
        if (c.quadratic_coef() < 0.0) add("nonconvex-cost", "quadratic coefficient < 0", gen.id);
      }
    };
    if (gen.bid_cost.empty()) {
      add("bad-cost", "bid cost missing", gen.id);
    } else {
      check_curves(gen.bid_cost, "cost");
    }
    if (!gen.true_cost.empty()) check_curves(gen.true_cost, "true_cost");
  }
  const auto& fc = s.forecast;
  if (fc.kind == ForecastKind::kTable) {
    if (static_cast<int>(fc.table.size()) != T) {
      add("bad-forecast", "forecast table needs one row per interval", "forecast");
    } else {
      for (int t = 0; t < T; ++t) {
        const size_t need = static_cast<size_t>(std::min(s.window, T - t));
        if (fc.table[t].size() < need) {
          add("bad-forecast", "forecast row shorter than the window",
              "forecast row " + std::to_string(t + 1));
        } else if (fc.table[t][0] != s.demand[t]) {
          add("bad-forecast", "binding-interval forecast must equal actual demand",
              "forecast row " + std::to_string(t + 1));
        }
      }
    }
  }
  if (fc.kind == ForecastKind::kGaussianRandomWalk && !(fc.sigma >= 0.0)) {
    add("bad-forecast", "sigma must be >= 0", "forecast");
  }
  if (report.ok() && T > 0) {
    double lo = 0.0, hi = 0.0;
    for (const auto& gen : s.generators) {
      lo += std::clamp(gen.initial - gen.ramp_down, 0.0, gen.capacity);
      hi += std::clamp(gen.initial + gen.ramp_up, 0.0, gen.capacity);
    }
    if (s.demand[0] < lo || s.demand[0] > hi) {
      std::ostringstream msg;
      msg << "interval-1 demand " << s.demand[0] << " outside ramp-reachable range ["
          << lo << ", " << hi << "]";
      add("demand-unreachable", msg.str(), "interval 1");
    }
  }
  return report;
}

std::vector<double> generate_forecast(const Scenario& s, int t, ForecastRng& rng) {
  const int T = s.horizon();
  if (t < 0 || t >= T) throw InputError("forecast interval out of range");
  const int len = std::min(s.window, T - t);
  std::vector<double> out(static_cast<size_t>(len));
  const auto& fc = s.forecast;
  switch (fc.kind) {
    case ForecastKind::kExact:
      for (int k = 0; k < len; ++k) out[k] = s.demand[t + k];
      break;
    case ForecastKind::kTable:
      for (int k = 0; k < len; ++k) out[k] = fc.table.at(t).at(k);
      break;
    case ForecastKind::kGaussianRandomWalk: {
      const double mean =
          std::accumulate(s.demand.begin(), s.demand.end(), 0.0) / T;
      const double sd = fc.sigma * mean;
      std::normal_distribution<double> noise(0.0, sd > 0.0 ? sd : 1.0);
      double drift = 0.0;
      bool clamped = false;
      for (int k = 0; k < len; ++k) {
        if (k > 0 && sd > 0.0) drift += noise(rng);
        double value = s.demand[t + k] + drift;
        if (value < 0.0) {
          value = 0.0;
          clamped = true;
        }
        out[k] = value;
      }
      if (clamped) {
        std::clog << "warning: negative demand forecast clamped to 0 at interval "
                  << t + 1 << '\n';
      }
      break;
    }
  }
  out[0] = s.demand[t];
  return out;
}

// ---------------------------------------------------------------------------
// JSON ingestion

namespace {

std::string line_context(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t k = 0; k < std::min(byte, text.size()); ++k) {
    if (text[k] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

double number_field(const json& obj, const char* field, const std::string& where) {
  auto it = obj.find(field);
  if (it == obj.end()) {
    throw InputError(where + ": missing field '" + field + "'");
  }
  if (!it->is_number()) {
    throw InputError(where + ": field '" + field + "' must be a number");
  }
  return it->get<double>();
}

CostCurve parse_curve(const json& j, const std::string& where) {
  if (!j.is_object()) throw InputError(where + ": cost must be an object");
  const std::string kind = j.value("kind", std::string("linear"));
  if (kind == "linear") return CostCurve::linear(number_field(j, "c", where));
  if (kind == "quadratic") {
    return CostCurve::quadratic(number_field(j, "a", where), number_field(j, "c", where));
  }
  if (kind == "piecewise" || kind == "piecewise-linear") {
    auto it = j.find("breakpoints");
    if (it == j.end() || !it->is_array()) {
      throw InputError(where + ": missing field 'breakpoints'");
    }
    std::vector<Breakpoint> segs;
    for (const auto& bp : *it) {
      if (!bp.is_array() || bp.size() != 2 || !bp[0].is_number() || !bp[1].is_number()) {
        throw InputError(where + ": breakpoints must be [start_mw, slope] pairs");
      }
      segs.push_back({bp[0].get<double>(), bp[1].get<double>()});
    }
    try {
      return CostCurve::piecewise(std::move(segs));
    } catch (const InputError& e) {
      throw InputError(where + ": " + e.what());
    }
  }
  throw InputError(where + ": unknown cost kind '" + kind + "'");
}

std::vector<CostCurve> parse_curves(const json& j, const std::string& where) {
  std::vector<CostCurve> out;
  if (j.is_array()) {
    for (size_t t = 0; t < j.size(); ++t) {
      out.push_back(parse_curve(j[t], where + "[" + std::to_string(t) + "]"));
    }
  } else {
    out.push_back(parse_curve(j, where));
  }
  return out;
}

json curve_json(const CostCurve& c) {
  switch (c.kind()) {
    case CostKind::kLinear:
      return {{"kind", "linear"}, {"c", c.linear_coef()}};
    case CostKind::kQuadratic:
      return {{"kind", "quadratic"}, {"a", c.quadratic_coef()}, {"c", c.linear_coef()}};
    case CostKind::kPiecewiseLinear: {
      json bps = json::array();
      for (const auto& s : c.segments()) bps.push_back({s.start_mw, s.slope});
      return {{"kind", "piecewise"}, {"breakpoints", bps}};
    }
  }
  return {};
}

json curves_json(const std::vector<CostCurve>& curves) {
  if (curves.size() == 1) return curve_json(curves.front());
  json arr = json::array();
  for (const auto& c : curves) arr.push_back(curve_json(c));
  return arr;
}

}  // namespace

Scenario parse_scenario(const std::string& text, const std::string& source) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(source + ": parse error at " + line_context(text, e.byte) + ": " +
                     e.what());
  }
  if (!root.is_object()) throw InputError(source + ": top level must be an object");

  Scenario s;
  s.name = root.value("name", std::string());
  auto gens = root.find("generators");
  if (gens == root.end() || !gens->is_array()) {
    throw InputError(source + ": missing field 'generators'");
  }
  for (size_t i = 0; i < gens->size(); ++i) {
    const json& g = (*gens)[i];
    if (!g.is_object()) throw InputError(source + ": generator entries must be objects");
    Generator gen;
    gen.id = g.value("id", "G" + std::to_string(i + 1));
    const std::string where = source + ": generator '" + gen.id + "'";
    auto cost = g.find("cost");
    if (cost == g.end()) throw InputError(where + ": missing field 'cost'");
    gen.bid_cost = parse_curves(*cost, where + " cost");
    if (auto tc = g.find("true_cost"); tc != g.end() && !tc->is_null()) {
      gen.true_cost = parse_curves(*tc, where + " true_cost");
    }
    gen.capacity = number_field(g, "capacity", where);
    gen.ramp_up = number_field(g, "ramp_up", where);
    gen.ramp_down = number_field(g, "ramp_down", where);
    gen.initial = number_field(g, "initial", where);
    s.generators.push_back(std::move(gen));
  }

  auto demand = root.find("demand");
  if (demand == root.end() || !demand->is_array()) {
    throw InputError(source + ": missing field 'demand'");
  }
  for (const auto& d : *demand) {
    if (!d.is_number()) throw InputError(source + ": demand entries must be numbers");
    s.demand.push_back(d.get<double>());
  }
  if (auto h = root.find("horizon"); h != root.end()) {
    if (!h->is_number_integer() || h->get<int>() != s.horizon()) {
      throw InputError(source + ": field 'horizon' must equal the demand length");
    }
  }
  s.window = root.value("window", s.horizon());

  if (auto fc = root.find("forecast"); fc != root.end() && !fc->is_null()) {
    const std::string where = source + ": forecast";
    const std::string kind = fc->value("kind", std::string("exact"));
    if (kind == "exact") {
      s.forecast.kind = ForecastKind::kExact;
    } else if (kind == "table" || kind == "explicit-table") {
      s.forecast.kind = ForecastKind::kTable;
      auto tab = fc->find("table");
      if (tab == fc->end() || !tab->is_array()) {
        throw InputError(where + ": missing field 'table'");
      }
      for (const auto& row : *tab) {
        std::vector<double> r;
        for (const auto& v : row) {
          if (!v.is_number()) throw InputError(where + ": table entries must be numbers");
          r.push_back(v.get<double>());
        }
        s.forecast.table.push_back(std::move(r));
      }
    } else if (kind == "gaussian" || kind == "gaussian-random-walk") {
      s.forecast.kind = ForecastKind::kGaussianRandomWalk;
      s.forecast.sigma = number_field(*fc, "sigma", where);
      s.forecast.seed = fc->value("seed", std::uint64_t{0});
    } else {
      throw InputError(where + ": unknown forecast kind '" + kind + "'");
    }
  }
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open scenario file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), path);
}

std::string scenario_to_json(const Scenario& s) {
  json root;
  if (!s.name.empty()) root["name"] = s.name;
  json gens = json::array();
  for (const auto& g : s.generators) {
    json jg = {{"id", g.id},
               {"cost", curves_json(g.bid_cost)},
               {"capacity", g.capacity},
               {"ramp_up", g.ramp_up},
               {"ramp_down", g.ramp_down},
               {"initial", g.initial}};
    if (!g.true_cost.empty()) jg["true_cost"] = curves_json(g.true_cost);
    gens.push_back(std::move(jg));
  }
  root["generators"] = gens;
  root["demand"] = s.demand;
  root["horizon"] = s.horizon();
  root["window"] = s.window;
  json fc;
  switch (s.forecast.kind) {
    case ForecastKind::kExact:
      fc = {{"kind", "exact"}};
      break;
    case ForecastKind::kTable:
      fc = {{"kind", "table"}, {"table", s.forecast.table}};
      break;
    case ForecastKind::kGaussianRandomWalk:
      fc = {{"kind", "gaussian"}, {"sigma", s.forecast.sigma}, {"seed", s.forecast.seed}};
      break;
  }
  root["forecast"] = fc;
  return root.dump(2);
}

Scenario scale_ramps(const Scenario& s, double factor) {
  Scenario out = s;
  for (auto& g : out.generators) {
    g.ramp_up *= factor;
    g.ramp_down *= factor;
  }
  return out;
}

}  // namespace tlmp
