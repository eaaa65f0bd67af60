#include "report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace tlmp::cli {

namespace {

std::string fixed(double v, int digits) {
  const double scale = std::pow(10.0, digits);
  double r = std::round(v * scale) / scale;
  if (r == 0.0) r = 0.0;  // drops the sign of -0
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, r);
  return buf;
}

}  // namespace

std::string money(double v) { return fixed(v, 2); }
std::string mw(double v) { return fixed(v, 4); }
std::string rate(double v) { return fixed(v, 4); }

OutputDir::OutputDir(std::filesystem::path root) : root_(std::move(root)) {
  std::error_code ec;
  std::filesystem::create_directories(root_, ec);
  if (ec) throw InputError("cannot create output directory '" + root_.string() + "'");
}

void OutputDir::write(const std::string& name, const std::string& content) {
  std::ofstream f(root_ / name, std::ios::binary);
  if (!f) throw InputError("cannot write '" + (root_ / name).string() + "'");
  f << content;
  files_.push_back(name);
}

void write_manifest(OutputDir& out, const Manifest& m) {
  nlohmann::ordered_json j;
  j["command"] = m.command;
  j["scenario"] = m.scenario;
  j["parameters"] = m.parameters;
  j["seed"] = m.seed;
  j["version"] = TLMP_VERSION;
  j["outputs"] = out.files();
  out.write("manifest.json", j.dump(2) + "\n");
}

std::string dispatch_csv(const Scenario& s, const Eigen::MatrixXd& G) {
  std::ostringstream o;
  o << "t,gen,g_mw\n";
  for (Eigen::Index t = 0; t < G.cols(); ++t) {
    for (int i = 0; i < s.size(); ++i) {
      o << t + 1 << ',' << s.generators[i].id << ',' << mw(G(i, t)) << '\n';
    }
  }
  return o.str();
}

std::string prices_csv(const Scenario& s, const std::vector<PriceSchedule>& schedules) {
  std::ostringstream o;
  o << "scheme,t,gen,price,energy,ramp_premium\n";
  for (const auto& p : schedules) {
    for (int t = 0; t < p.horizon(); ++t) {
      o << scheme_name(p.scheme) << ',' << t + 1 << ",demand," << rate(p.demand_price(t)) << ','
        << rate(p.demand_price(t)) << ",0.0000\n";
      for (int i = 0; i < s.size(); ++i) {
        o << scheme_name(p.scheme) << ',' << t + 1 << ',' << s.generators[i].id << ','
          << rate(p.generator_price(i, t)) << ',' << rate(p.demand_price(t)) << ','
          << rate(p.ramp_premium(i, t)) << '\n';
      }
    }
  }
  return o.str();
}

std::string duals_csv(const Scenario& s, const KktSolution& k) {
  std::ostringstream o;
  o << "t,gen,lambda,mu_up,mu_dn,rho_up,rho_dn\n";
  for (Eigen::Index t = 0; t < k.dispatch.cols(); ++t) {
    for (int i = 0; i < s.size(); ++i) {
      o << t + 1 << ',' << s.generators[i].id << ',' << rate(k.lambda ? (*k.lambda)(t) : 0.0)
        << ',' << rate(k.mu_up(i, t)) << ',' << rate(k.mu_dn(i, t)) << ','
        << rate(k.rho_up(i, t)) << ',' << rate(k.rho_dn(i, t)) << '\n';
    }
  }
  return o.str();
}

std::string settlement_csv(const std::vector<SettlementReport>& reports) {
  std::ostringstream o;
  o << "scheme,gen,energy_payment,bid_cost,true_cost,bid_surplus,true_surplus,q,loc,mw,"
       "profit_with_uplift,demand_revenue,generator_payments,merchandising_surplus,"
       "ramping_charge\n";
  for (const auto& r : reports) {
    for (const auto& g : r.generators) {
      o << scheme_name(r.scheme) << ',' << g.id << ',' << money(g.energy_payment) << ','
        << money(g.bid_cost) << ',' << money(g.true_cost) << ',' << money(g.bid_surplus) << ','
        << money(g.true_surplus) << ',' << money(g.q) << ',' << money(g.loc) << ','
        << money(g.mw) << ',' << money(g.profit_with_uplift) << ",,,,\n";
    }
    const auto& m = r.operator_account;
    o << scheme_name(r.scheme) << ",operator,,,,,,,,,," << money(m.demand_revenue) << ','
      << money(m.generator_payments) << ',' << money(m.value) << ','
      << (m.ramping_charge ? money(*m.ramping_charge) : std::string()) << '\n';
  }
  return o.str();
}

std::string trace_csv(const Scenario& s, const RollingTrace& trace) {
  const PriceSchedule rl = rolling_prices(trace, Scheme::kRollingLmp);
  const PriceSchedule rt = rolling_prices(trace, Scheme::kRollingTlmp);
  std::ostringstream o;
  o << "t,gen,g_mw,lmp,tlmp,mu_up,mu_dn,rho_up,rho_dn,lambda\n";
  for (int t = 0; t < trace.horizon(); ++t) {
    const KktSolution& k = trace.windows[t].kkt;
    for (int i = 0; i < s.size(); ++i) {
      o << t + 1 << ',' << s.generators[i].id << ',' << mw(trace.realized(i, t)) << ','
        << rate(rl.generator_price(i, t)) << ',' << rate(rt.generator_price(i, t)) << ','
        << rate(k.mu_up(i, 0)) << ',' << rate(k.mu_dn(i, 0)) << ',' << rate(k.rho_up(i, 0))
        << ',' << rate(k.rho_dn(i, 0)) << ',' << rate((*k.lambda)(0)) << '\n';
    }
  }
  return o.str();
}

}  // namespace tlmp::cli
