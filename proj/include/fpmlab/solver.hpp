#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <vector>

#include "fpmlab/nonlinearity.hpp"
#include "fpmlab/operators.hpp"

namespace fpm {

struct TimeGrid {
  double t_final = 1.0;
  int steps = 1;

  void validate() const {
    if (!(t_final > 0.0)) throw std::invalid_argument("time grid needs t_final > 0");
    if (steps < 1) throw std::invalid_argument("time grid needs at least one step");
  }
  double dt() const { return t_final / steps; }
  std::vector<double> all_step_times() const {
    std::vector<double> t(steps + 1);
    for (int k = 0; k <= steps; ++k) t[k] = dt() * k;
    return t;
  }
  std::vector<double> strided_times(int stride) const {
    std::vector<double> t{0.0};
    for (int k = stride; k <= steps; k += stride) t.push_back(dt() * k);
    return t;
  }
};

struct SolveStats {
  long newton_iterations = 0;
  int step_halvings = 0;
  double clamped_mass = 0.0;  // h-weighted mass removed by the zero clamp
};

struct Trajectory {
  std::vector<double> times;
  std::vector<Eigen::VectorXd> states;
  std::vector<bool> at_step_time;  // false for interpolated snapshots
  SolveStats stats;

  int size() const { return static_cast<int>(times.size()); }
};

class SolverError : public std::runtime_error {
 public:
  explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

/// One implicit Euler step: solves u + dt * A F(u) = u_prev by Newton with a
/// residual backtracking line search; retries with halved steps on failure.
Eigen::VectorXd implicit_step(const DiscreteOperator& op, const SteppedNonlinearity& F,
                              const Eigen::VectorXd& u_prev, double dt, SolveStats& stats,
                              int depth = 0);

/// Mild solution by uniform implicit stepping; snapshots at the requested
/// times (linear interpolation off the step grid, flagged as such).
Trajectory run_mild(const DiscreteOperator& op, const PowerSum& F, const Eigen::VectorXd& u0,
                    const TimeGrid& tg, const std::vector<double>& snapshot_times,
                    double shift = 0.0);

struct MonotoneLadderReport {
  long violations = 0;
  double worst_margin = 0.0;  // most negative of (next - prev) over the ladder
};

struct MinimalRun {
  std::vector<double> cutoffs;
  std::vector<Trajectory> trajectories;
  MonotoneLadderReport monotonicity;
};

/// Minimal weak dual construction: mild runs for the truncated data u0 ^ c,
/// with a monotonicity audit across the cutoff ladder.
MinimalRun run_minimal(const DiscreteOperator& op, const PowerSum& F, const Eigen::VectorXd& u0,
                       const TimeGrid& tg, const std::vector<double>& snapshot_times,
                       const std::vector<double>& cutoffs);

/// Solution of the shifted approximate problem; returns u_delta = v + delta.
Trajectory run_delta(const DiscreteOperator& op, const PowerSum& F, const Eigen::VectorXd& u0,
                     double delta, const TimeGrid& tg, const std::vector<double>& snapshot_times);

struct ContractionReport {
  bool degenerate = false;   // identical data
  double max_l1_ratio = 0.0; // max_t |u-v|_1 / |u0-v0|_1
  bool ordered_data = false; // u0 <= v0 entrywise
  long order_violations = 0; // snapshots x points with u > v + 1e-9
  double sup_ratio_u = 0.0;  // max_t |u(t)|_inf / |u0|_inf
};

ContractionReport contraction_audit(const DiscreteOperator& op, const PowerSum& F,
                                    const Eigen::VectorXd& u0, const Eigen::VectorXd& v0,
                                    const TimeGrid& tg, const std::vector<double>& snapshot_times);

}  // namespace fpm
