#pragma once

// One-shot multi-interval economic dispatch and the rolling-window engine.

#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "tlmp/model.hpp"
#include "tlmp/qpsolve.hpp"

namespace tlmp {

struct DispatchOptions {
  // Passed through to EdProblem::regularization.
  double regularization = 0.0;
};

// One window solve: intervals [start, start + forecast.size()).
struct DispatchSolution {
  KktSolution kkt;
  int start = 0;
  std::vector<double> forecast;
  std::vector<double> initial;

  int length() const { return static_cast<int>(forecast.size()); }
};

struct RollingTrace {
  Eigen::MatrixXd realized;  // N x T, MW
  std::vector<DispatchSolution> windows;  // one per interval
  // Realized transition into interval t sits at its up/down ramp limit.
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> ramp_up_binding;
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> ramp_down_binding;
  double regularization = 0.0;

  int horizon() const { return static_cast<int>(realized.cols()); }
};

// Window infeasibility during a rolling run, tagged with the 0-based
// interval whose window failed.
class RollingInfeasible : public InfeasibleError {
 public:
  RollingInfeasible(int window_start, const InfeasibleError& cause);
  int window_start() const { return window_start_; }

 private:
  int window_start_;
};

DispatchSolution one_shot_ed(const Scenario& s, std::span<const double> demand,
                             std::span<const double> initial,
                             const DispatchOptions& opts = {});
// Convenience: actual demand and the scenario's initial outputs.
DispatchSolution one_shot_ed(const Scenario& s, const DispatchOptions& opts = {});

// Forecasts come from the scenario's forecast model seeded with its seed.
RollingTrace rolling_ed(const Scenario& s, const DispatchOptions& opts = {});
RollingTrace rolling_ed(const Scenario& s, ForecastRng& rng, const DispatchOptions& opts = {});

// Slack tolerance for "binding" classifications (MW).
inline constexpr double kBindingTolerance = 1e-6;

}  // namespace tlmp
