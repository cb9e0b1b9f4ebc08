#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fpmlab/fitting.hpp"
#include "fpmlab/nonlinearity.hpp"
#include "fpmlab/operators.hpp"
#include "fpmlab/solver.hpp"

namespace fpm {

/// Closed-form exponents attached to a (nonlinearity, operator) pair.
struct ExponentSet {
  double m0 = 0, m1 = 0;
  double mu0 = 0, mu1 = 0;
  double gamma = 0, s = 0;
  int N = 1;
  double sigma0 = 0, sigma1 = 0;
  double theta0 = 0, theta1 = 0;

  double time_power(int i) const {  // m_i / (m_i - 1)
    const double m = i == 0 ? m0 : m1;
    return m / (m - 1.0);
  }
  double theta(int i) const { return i == 0 ? theta0 : theta1; }
  /// t* = c* max(norm^{-(m1-1)}, norm^{-(m0-1)}); +inf for a trivial datum.
  double waiting_time(double datum_norm, double c_star) const;
};

ExponentSet exponents(const PowerSum& F, const DiscreteOperator& op);

/// h-weighted integral of |u| against the first eigenfunction.
double weighted_l1(const Eigen::VectorXd& u, const DiscreteOperator& op);

/// One audited estimate: fitted constants, worst margin, verdict.
struct BoundReport {
  std::string claim;
  std::string verdict;  // "pass" | "fail" | "degenerate"
  double margin_worst = 0.0;
  std::map<std::string, double> fitted;
  std::string note;  // diagnostics, e.g. the message of a rejected audit
  int n = 0;
  int n_steps = 0;
  std::string inputs_hash;

  bool passed() const { return verdict != "fail"; }
};

class AuditError : public std::runtime_error {
 public:
  explicit AuditError(const std::string& what) : std::runtime_error(what) {}
};

/// Time-monotonicity of t^{m0/(m0-1)} F(u) and t^{1/(m0-1)} u at every grid
/// point, over consecutive step-time snapshots.
BoundReport benilan_crandall_audit(const Trajectory& traj, const ExponentSet& es,
                                   const PowerSum& F);

/// Monotonicity of the weighted norm plus the integrated evolution identity
/// with trapezoid time quadrature; the residual itself is reported so callers
/// can verify first-order decay under time refinement.
BoundReport weighted_l1_identity_audit(const Trajectory& traj, const DiscreteOperator& op,
                                       const PowerSum& F);
double weighted_l1_identity_residual(const Trajectory& traj, const DiscreteOperator& op,
                                     const PowerSum& F);

/// Optional: the intermediate-time reverse control of the weighted norm,
/// W(tau) <= W(t) + k7 max_i |t-tau|^{2s theta_i} norm^{2s(m_i-1)theta_i + 1};
/// fits the smallest k7 over all snapshot pairs.
BoundReport weighted_l1_reverse_audit(const Trajectory& traj, const DiscreteOperator& op,
                                      const PowerSum& F, const ExponentSet& es);

/// Datum-independent upper bound via the Legendre transform, plus the
/// power-law form with branch switching at the fitted unit-crossing time.
BoundReport absolute_upper_audit(const std::vector<Trajectory>& sweep, const PowerSum& F,
                                 const ExponentSet& es);

/// Fits sup-norm decay against datum mass and time across a sweep and
/// compares the exponents with (2s theta_i, (N+gamma) theta_i).
BoundReport smoothing_audit(const std::vector<Trajectory>& sweep, const DiscreteOperator& op,
                            const PowerSum& F, const ExponentSet& es,
                            double detach_factor = 0.5, double rel_tol = 0.20);

/// Upper envelope F(u) <= k3 phi^{sigma1} / t^{m_i/(m_i-1)}.
BoundReport ghp_upper_audit(const Trajectory& traj, const DiscreteOperator& op,
                            const PowerSum& F, const ExponentSet& es);

enum class GhpRegime { general, nondegenerate, degenerate };

struct GhpLowerParams {
  GhpRegime regime = GhpRegime::general;
  double c_star = 1.0;
  double t_window_lo = 0.0;  // absolute time window; 0/inf = unrestricted
  double t_window_hi = std::numeric_limits<double>::infinity();
  double dead_zone = 0.10;   // relative exclusion around t*
  // evaluate the large-time envelope before t* as well (the finite-speed
  // counterexample that motivates the waiting time)
  bool include_early = false;
};

/// Lower envelopes of the three Global Harnack regimes. The fitted constant
/// is the infimum of F(u) over the regime envelope; zero means failure
/// (expected for the classical operator before the waiting time).
BoundReport ghp_lower_audit(const Trajectory& traj, const DiscreteOperator& op,
                            const PowerSum& F, const ExponentSet& es,
                            const GhpLowerParams& params);

enum class BarrierShape { phi_power, phi_linear };

/// Smallest constant making phi^beta / [A^{1-m1} - C t]^{1/(m1-1)} dominate
/// the trajectory; beta = 1 - 2s/gamma (anomalous) or 1.
BoundReport supersolution_audit(const Trajectory& traj, const DiscreteOperator& op,
                                const PowerSum& F, const ExponentSet& es, double A_scale,
                                BarrierShape shape);

/// Decay bound F(u) <= C0 k13 phi / t for data below C0 phi, the vanishing
/// boundary ratio when sigma1 < 1, and the boundary exponent floor.
BoundReport small_data_decay_audit(const Trajectory& traj, const DiscreteOperator& op,
                                   const PowerSum& F, const ExponentSet& es, double C0);

/// Operational waiting-time constant: t_hat is the first snapshot where
/// inf F(u)/phi^{sigma1} reaches half its trajectory peak, and c* scales it
/// by the datum norm so that t*(norm) = t_hat for the reference run.
double calibrate_c_star(const Trajectory& ref, const DiscreteOperator& op, const PowerSum& F,
                        const ExponentSet& es);

}  // namespace fpm
