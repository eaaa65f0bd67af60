#pragma once

// CSV and manifest writers shared by the CLI commands.

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tlmp/dispatch.hpp"
#include "tlmp/pricing.hpp"
#include "tlmp/settlement.hpp"

namespace tlmp::cli {

std::string money(double v);  // cents
std::string mw(double v);     // 1e-4 MW
std::string rate(double v);   // $/MWh, 1e-4

class OutputDir {
 public:
  explicit OutputDir(std::filesystem::path root);
  // Writes `name` under the root and records it for the manifest.
  void write(const std::string& name, const std::string& content);
  const std::vector<std::string>& files() const { return files_; }
  const std::filesystem::path& root() const { return root_; }

 private:
  std::filesystem::path root_;
  std::vector<std::string> files_;
};

struct Manifest {
  std::string command;
  std::string scenario;
  std::map<std::string, std::string> parameters;
  std::string seed;
};

// Writes manifest.json listing every file written so far.
void write_manifest(OutputDir& out, const Manifest& m);

std::string dispatch_csv(const Scenario& s, const Eigen::MatrixXd& G);
std::string prices_csv(const Scenario& s, const std::vector<PriceSchedule>& schedules);
std::string duals_csv(const Scenario& s, const KktSolution& k);
std::string settlement_csv(const std::vector<SettlementReport>& reports);
std::string trace_csv(const Scenario& s, const RollingTrace& trace);

}  // namespace tlmp::cli
