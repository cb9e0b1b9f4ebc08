#pragma once

#include <filesystem>
#include <utility>

#include "fpmlab/config.hpp"
#include "fpmlab/estimates.hpp"
#include "fpmlab/reporting.hpp"

namespace fpm {

/// Builds the named datum family on the operator's grid; always nonnegative.
Eigen::VectorXd build_datum(const DatumSpec& d, const DiscreteOperator& op);

struct SideFits {
  FitResult left;
  FitResult right;
};

/// Least-squares boundary exponent of a positive field against the distance
/// to each endpoint, over the window [lo, hi] (distance units).
SideFits boundary_exponent_fit(const Eigen::VectorXd& u, const DiscreteOperator& op,
                               double window_lo, double window_hi);

/// Pointwise extremum over a time window of F(u(t,x)) t^{time_power}.
Eigen::VectorXd time_envelope(const Trajectory& traj, const PowerSum& F, double time_power,
                              double t_lo, double t_hi, bool upper);

struct HarnackReport {
  std::vector<double> times;
  std::vector<double> quotients;  // +inf recorded as infinity
  double q_max = 0.0;
  double eigen_ratio = 0.0;      // sup phi / inf phi on the ball
  double eigen_ratio_max = 0.0;  // worst over all admissible centers, same radius
  long positivity_failures = 0;  // snapshots with vanishing infimum
};

HarnackReport harnack_quotient(const Trajectory& traj, const DiscreteOperator& op,
                               const PowerSum& F, int center_index, double radius,
                               const std::string& mode, double lag, double t_lo = 0.0,
                               double t_hi = std::numeric_limits<double>::infinity());

struct PropagationReport {
  std::string verdict;  // "infinite" | "finite" | "mixed"
  int first_collar_left = 0;   // zero cells at each boundary, first t > 0 snapshot
  int first_collar_right = 0;
  double first_min = 0.0;      // min of the first positive-time snapshot
  bool growth_monotone = true; // positivity set never shrinks
  std::vector<std::pair<double, double>> support_distance;  // (t, distance to datum support)
};

PropagationReport propagation_probe(const Trajectory& traj, const DiscreteOperator& op,
                                    double threshold);

struct ConvergenceReport {
  std::vector<double> time_dist_l1, time_dist_linf, time_rates;
  std::vector<double> space_dist_l1, space_dist_linf, space_rates;
  bool degenerate = false;
};

ConvergenceReport convergence_study(const ExperimentConfig& cfg, const std::vector<int>& n_list,
                                    const std::vector<int>& steps_list);

struct ExperimentResult {
  std::vector<BoundReport> reports;
  std::vector<bool> expected_fail;
  std::vector<Trajectory> trajectories;  // one, or one per sweep value
  std::string config_hash;
  std::filesystem::path out_dir;

  bool all_ok() const {
    for (std::size_t i = 0; i < reports.size(); ++i)
      if (reports[i].passed() == expected_fail[i]) return false;
    return true;
  }
};

/// Assembles, runs, audits, and persists one experiment (or sweep).
ExperimentResult run_experiment(const ExperimentConfig& cfg, int jobs = 0,
                                bool persist = true);

/// The three canonical bundles; emits one fitted-constant table per operator.
void run_table_bundles(const std::filesystem::path& out_root, int jobs);

}  // namespace fpm
