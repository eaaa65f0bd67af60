#pragma once

// Domain types for multi-interval dispatch: cost curves, generators,
// scenarios and demand forecast models.

#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace tlmp {

// Raised when a cost curve is evaluated outside [0, capacity].
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Raised for malformed scenario files or inconsistent scenario data.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class CostKind { kLinear, kQuadratic, kPiecewiseLinear };

// One segment of a convex piecewise-linear cost: `slope` applies from
// `start_mw` up to the next segment's start (or the unit's capacity).
struct Breakpoint {
  double start_mw = 0.0;
  double slope = 0.0;

  bool operator==(const Breakpoint&) const = default;
};

// Convex generation cost with zero cost at zero output.
//   linear:     c*g
//   quadratic:  a*g^2 + c*g
//   piecewise:  integral of a nondecreasing step marginal cost
class CostCurve {
 public:
  CostCurve() = default;

  static CostCurve linear(double c);
  static CostCurve quadratic(double a, double c);
  // Throws InputError unless the first segment starts at 0 and both
  // starts and slopes are nondecreasing.
  static CostCurve piecewise(std::vector<Breakpoint> segments);

  CostKind kind() const { return kind_; }
  double linear_coef() const { return c_; }
  double quadratic_coef() const { return a_; }
  const std::vector<Breakpoint>& segments() const { return segments_; }

  // No domain checks; see cost_eval / marginal_cost for the checked forms.
  double cost(double g) const;
  double marginal_right(double g) const;
  double marginal_left(double g) const;

  // Same curve with every marginal cost raised by `offset` $/MWh.
  CostCurve shifted(double offset) const;

  // Largest absolute coefficient, used to scale solver tolerances.
  double scale() const;

  bool operator==(const CostCurve&) const = default;

 private:
  CostKind kind_ = CostKind::kLinear;
  double a_ = 0.0;
  double c_ = 0.0;
  std::vector<Breakpoint> segments_;
};

// Checked evaluation on [0, capacity]. Throws DomainError outside.
double cost_eval(const CostCurve& curve, double g, double capacity);
// Right-derivative, except the left-derivative at g == capacity.
double marginal_cost(const CostCurve& curve, double g, double capacity);

struct Generator {
  std::string id;
  // One curve for all intervals, or one per interval.
  std::vector<CostCurve> bid_cost;
  // Empty means "same as bid_cost".
  std::vector<CostCurve> true_cost;
  double capacity = 0.0;
  double ramp_up = 0.0;
  double ramp_down = 0.0;
  double initial = 0.0;

  const CostCurve& bid(int t) const;
  const CostCurve& truth(int t) const;
};

enum class ForecastKind { kExact, kTable, kGaussianRandomWalk };

struct ForecastModel {
  ForecastKind kind = ForecastKind::kExact;
  // table[t] holds the forecast issued at interval t (0-based) for
  // intervals t, t+1, ...; only the first min(W, T-t) entries are used.
  std::vector<std::vector<double>> table;
  // Per-step standard deviation as a fraction of mean demand.
  double sigma = 0.0;
  std::uint64_t seed = 0;
};

struct Scenario {
  std::string name;
  std::vector<Generator> generators;
  std::vector<double> demand;
  ForecastModel forecast;
  int window = 1;

  int horizon() const { return static_cast<int>(demand.size()); }
  int size() const { return static_cast<int>(generators.size()); }
  std::vector<double> initial_output() const;
  int find_generator(const std::string& id) const;  // -1 when absent
};

struct Violation {
  std::string code;
  std::string message;
  std::string entity;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
  std::string summary() const;
};

ValidationReport validate_scenario(const Scenario& s);

// Forecast RNG state owned by the caller.
using ForecastRng = std::mt19937_64;

// Forecast issued at 0-based interval t for intervals t..t+len-1, with
// len = min(W, T - t). The first entry always equals demand[t].
std::vector<double> generate_forecast(const Scenario& s, int t,
                                      ForecastRng& rng);

// Scenario JSON (see README for the schema).
Scenario load_scenario(const std::string& path);
Scenario parse_scenario(const std::string& json_text,
                        const std::string& source = "<string>");
std::string scenario_to_json(const Scenario& s);

// Ramp limits scaled by `factor` for every generator.
Scenario scale_ramps(const Scenario& s, double factor);

}  // namespace tlmp
