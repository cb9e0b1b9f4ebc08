#include "fpmlab/solver.hpp"

#include <algorithm>
#include <cmath>

namespace fpm {

namespace {

constexpr int kMaxNewton = 50;
constexpr int kMaxHalvings = 4;
constexpr double kResidualTol = 1e-10;

Eigen::VectorXd apply_F(const SteppedNonlinearity& F, const Eigen::VectorXd& u) {
  Eigen::VectorXd out(u.size());
  for (Eigen::Index i = 0; i < u.size(); ++i) out(i) = F.value(u(i));
  return out;
}

Eigen::VectorXd apply_Fp(const SteppedNonlinearity& F, const Eigen::VectorXd& u) {
  Eigen::VectorXd out(u.size());
  for (Eigen::Index i = 0; i < u.size(); ++i) out(i) = F.derivative(u(i));
  return out;
}

double clamp_negative(Eigen::VectorXd& u, double h) {
  double removed = 0.0;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    if (u(i) < 0.0) {
      removed -= u(i) * h;
      u(i) = 0.0;
    }
  }
  return removed;
}

}  // namespace

Eigen::VectorXd implicit_step(const DiscreteOperator& op, const SteppedNonlinearity& F,
                              const Eigen::VectorXd& u_prev, double dt, SolveStats& stats,
                              int depth) {
  const int n = op.size();
  const double tol = kResidualTol * (1.0 + u_prev.cwiseAbs().maxCoeff());
  Eigen::VectorXd u = u_prev;
  Eigen::VectorXd G = u + dt * op.apply(apply_F(F, u)) - u_prev;
  double resid = G.cwiseAbs().maxCoeff();
  for (int it = 0; it < kMaxNewton && std::isfinite(resid); ++it) {
    if (resid <= tol) return u;
    Eigen::MatrixXd J = op.matrix() * apply_Fp(F, u).asDiagonal() * dt;
    J += Eigen::MatrixXd::Identity(n, n);
    const Eigen::VectorXd du = J.partialPivLu().solve(-G);
    double alpha = 1.0;
    Eigen::VectorXd u_try, G_try;
    double r_try = resid;
    for (int ls = 0; ls < 30; ++ls) {
      u_try = u + alpha * du;
      G_try = u_try + dt * op.apply(apply_F(F, u_try)) - u_prev;
      r_try = G_try.cwiseAbs().maxCoeff();
      if (std::isfinite(r_try) && r_try <= (1.0 - 1e-4 * alpha) * resid) break;
      alpha *= 0.5;
    }
    ++stats.newton_iterations;
    u = u_try;
    G = G_try;
    resid = r_try;
  }
  if (std::isfinite(resid) && resid <= tol) return u;
  if (depth < kMaxHalvings) {
    ++stats.step_halvings;
    const Eigen::VectorXd mid = implicit_step(op, F, u_prev, 0.5 * dt, stats, depth + 1);
    return implicit_step(op, F, mid, 0.5 * dt, stats, depth + 1);
  }
  throw SolverError("implicit step did not converge: dt=" + std::to_string(dt) +
                    " residual=" + std::to_string(resid) + " after " +
                    std::to_string(kMaxHalvings) + " halvings");
}

namespace {

struct SnapshotCollector {
  std::vector<double> wanted;  // sorted, unique, starting at 0
  Trajectory traj;
  std::size_t next = 0;
  double eps;

  SnapshotCollector(std::vector<double> times, double t_final) {
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end()), times.end());
    if (times.empty() || times.front() > 0.0) times.insert(times.begin(), 0.0);
    wanted = std::move(times);
    eps = 1e-12 * t_final;
  }

  void offer(double t_prev, const Eigen::VectorXd& u_prev, double t_cur,
             const Eigen::VectorXd& u_cur, bool cur_is_step) {
    while (next < wanted.size() && wanted[next] <= t_cur + eps) {
      const double tau = wanted[next];
      if (std::abs(tau - t_cur) <= eps) {
        traj.times.push_back(t_cur);
        traj.states.push_back(u_cur);
        traj.at_step_time.push_back(cur_is_step);
      } else {
        const double w = (tau - t_prev) / (t_cur - t_prev);
        traj.times.push_back(tau);
        traj.states.push_back((1.0 - w) * u_prev + w * u_cur);
        traj.at_step_time.push_back(false);
      }
      ++next;
    }
  }
};

Eigen::VectorXd sanitize_datum(const Eigen::VectorXd& u0) {
  Eigen::VectorXd u = u0;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    if (u(i) < -1e-12) throw SolverError("initial datum must be nonnegative");
    u(i) = std::max(u(i), 0.0);
  }
  return u;
}

Trajectory run_impl(const DiscreteOperator& op, const PowerSum& F, const Eigen::VectorXd& u0raw,
                    const TimeGrid& tg, const std::vector<double>& snapshot_times, double shift) {
  tg.validate();
  Eigen::VectorXd u = sanitize_datum(u0raw);
  if (u.size() != op.size()) throw SolverError("datum size does not match the grid");
  SnapshotCollector col(snapshot_times, tg.t_final);
  col.offer(0.0, u, 0.0, u, true);
  if (u.maxCoeff() == 0.0 && shift == 0.0) {
    // zero is a fixed point of every step
    for (std::size_t i = col.next; i < col.wanted.size(); ++i) {
      col.traj.times.push_back(col.wanted[i]);
      col.traj.states.push_back(u);
      col.traj.at_step_time.push_back(true);
    }
    return col.traj;
  }
  const SteppedNonlinearity SF{&F, shift};
  const double dt = tg.dt();
  const double h = op.grid().h();
  Eigen::VectorXd u_prev = u;
  for (int k = 1; k <= tg.steps; ++k) {
    Eigen::VectorXd u_next = implicit_step(op, SF, u_prev, dt, col.traj.stats);
    col.traj.stats.clamped_mass += clamp_negative(u_next, h);
    col.offer((k - 1) * dt, u_prev, k * dt, u_next, true);
    u_prev = std::move(u_next);
  }
  return col.traj;
}

}  // namespace

Trajectory run_mild(const DiscreteOperator& op, const PowerSum& F, const Eigen::VectorXd& u0,
                    const TimeGrid& tg, const std::vector<double>& snapshot_times, double shift) {
  return run_impl(op, F, u0, tg, snapshot_times, shift);
}

MinimalRun run_minimal(const DiscreteOperator& op, const PowerSum& F, const Eigen::VectorXd& u0,
                       const TimeGrid& tg, const std::vector<double>& snapshot_times,
                       const std::vector<double>& cutoffs) {
  if (cutoffs.empty()) throw SolverError("run_minimal needs at least one cutoff");
  for (std::size_t i = 1; i < cutoffs.size(); ++i)
    if (!(cutoffs[i] > cutoffs[i - 1])) throw SolverError("cutoff levels must increase");
  MinimalRun out;
  out.cutoffs = cutoffs;
  for (double c : cutoffs)
    out.trajectories.push_back(run_mild(op, F, u0.cwiseMin(c), tg, snapshot_times));
  for (std::size_t k = 1; k < out.trajectories.size(); ++k) {
    const Trajectory& lo = out.trajectories[k - 1];
    const Trajectory& hi = out.trajectories[k];
    for (int si = 0; si < lo.size(); ++si) {
      const double margin = (hi.states[si] - lo.states[si]).minCoeff();
      out.monotonicity.worst_margin = std::min(out.monotonicity.worst_margin, margin);
      if (margin < -1e-9) ++out.monotonicity.violations;
    }
  }
  return out;
}

Trajectory run_delta(const DiscreteOperator& op, const PowerSum& F, const Eigen::VectorXd& u0,
                     double delta, const TimeGrid& tg,
                     const std::vector<double>& snapshot_times) {
  if (!(delta > 0.0)) throw SolverError("run_delta needs delta > 0");
  Trajectory traj = run_impl(op, F, u0, tg, snapshot_times, delta);
  for (auto& st : traj.states) st.array() += delta;
  return traj;
}

ContractionReport contraction_audit(const DiscreteOperator& op, const PowerSum& F,
                                    const Eigen::VectorXd& u0, const Eigen::VectorXd& v0,
                                    const TimeGrid& tg,
                                    const std::vector<double>& snapshot_times) {
  ContractionReport rep;
  const double h = op.grid().h();
  const double d0 = h * (u0 - v0).cwiseAbs().sum();
  rep.ordered_data = (v0 - u0).minCoeff() >= 0.0;
  const Trajectory tu = run_mild(op, F, u0, tg, snapshot_times);
  const Trajectory tv = run_mild(op, F, v0, tg, snapshot_times);
  const double sup0 = std::max(u0.cwiseAbs().maxCoeff(), 1e-300);
  if (d0 == 0.0) {
    rep.degenerate = true;
    return rep;
  }
  for (int si = 0; si < tu.size(); ++si) {
    rep.max_l1_ratio = std::max(
        rep.max_l1_ratio, h * (tu.states[si] - tv.states[si]).cwiseAbs().sum() / d0);
    if (rep.ordered_data)
      rep.order_violations += ((tu.states[si] - tv.states[si]).array() > 1e-9).count();
    rep.sup_ratio_u = std::max(rep.sup_ratio_u, tu.states[si].cwiseAbs().maxCoeff() / sup0);
  }
  return rep;
}

}  // namespace fpm
