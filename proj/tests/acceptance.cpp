// Acceptance suite: every quantitative gate the project commits to, one
// pass/fail line per criterion, all tolerances pinned in code.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "fpmlab/harness.hpp"
#include "helpers.hpp"

using fpm::DiscreteOperator;
using fpm::ExponentSet;
using fpm::PowerSum;
using fpm::TimeGrid;
using fpm::Trajectory;

namespace {

namespace fs = std::filesystem;

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

DiscreteOperator make_op(fpm::OperatorKind kind, double s, double a, double b, int n) {
  return DiscreteOperator::assemble({kind, s, {a, b, n}});
}

Trajectory bump_run(const DiscreteOperator& op, const PowerSum& F, double amp, double T,
                    int steps, int stride = 1) {
  const Eigen::VectorXd u0 = testutil::cosine_bump(op.grid(), 0.5, 1.0 / 6.0, amp);
  const TimeGrid tg{T, steps};
  return fpm::run_mild(op, F, u0, tg,
                       stride == 1 ? tg.all_step_times() : tg.strided_times(stride));
}

// 1. principal eigenpair accuracy on the classical operator
Outcome criterion_eigen() {
  const DiscreteOperator op = make_op(fpm::OperatorKind::classical, 1.0, 0.0, M_PI, 199);
  const double lam_err = std::abs(op.lambda1() - 1.0);
  const fpm::SideFits fits = fpm::boundary_exponent_fit(
      op.phi1(), op, 2.0 * op.grid().h(), 0.1 * op.grid().length());
  const bool ok = lam_err < 1e-3 && std::abs(fits.left.exponent - 1.0) <= 0.05 &&
                  std::abs(fits.right.exponent - 1.0) <= 0.05;
  return {ok, "lambda1=" + fmt(op.lambda1()) + " phi1 exponent=" + fmt(fits.left.exponent) +
                  "/" + fmt(fits.right.exponent)};
}

// 2. restricted-kernel consistency against the quadrature oracle
Outcome criterion_rfl_consistency() {
  const double s = 0.25;
  const std::vector<double> targets{-0.6, -0.3, 0.0, 0.3, 0.6};
  std::vector<double> errs;
  for (int n : {128, 256, 512}) {
    const DiscreteOperator op = make_op(fpm::OperatorKind::rfl, s, -1.0, 1.0, n);
    Eigen::VectorXd u(n);
    for (int i = 0; i < n; ++i) {
      const double x = op.grid().point(i);
      u(i) = std::pow(1.0 - x * x, s);
    }
    const Eigen::VectorXd Au = op.apply(u);
    double err = 0.0;
    for (double target : targets) {
      int best = 0;
      for (int i = 1; i < n; ++i)
        if (std::abs(op.grid().point(i) - target) < std::abs(op.grid().point(best) - target))
          best = i;
      err = std::max(err,
                     std::abs(Au(best) - testutil::rfl_profile_oracle(op.grid().point(best), s)));
    }
    errs.push_back(err);
  }
  const double r1 = std::log2(errs[0] / errs[1]);
  const double r2 = std::log2(errs[1] / errs[2]);
  return {std::min(r1, r2) >= 1.0,
          "errors=" + fmt(errs[0]) + "/" + fmt(errs[1]) + "/" + fmt(errs[2]) +
              " rates=" + fmt(r1) + "," + fmt(r2)};
}

// 3. semigroup properties of the implicit scheme
Outcome criterion_semigroup() {
  const DiscreteOperator op = make_op(fpm::OperatorKind::rfl, 0.25, 0.0, 1.0, 256);
  const PowerSum F = PowerSum::single(2.0);
  const ExponentSet es = fpm::exponents(F, op);
  const TimeGrid tg{1.0, 256};
  const Eigen::VectorXd u0 = testutil::cosine_bump(op.grid(), 0.5, 1.0 / 6.0, 1.0);
  const Eigen::VectorXd v0 = u0 + testutil::cosine_bump(op.grid(), 0.35, 0.1, 0.3);
  const fpm::ContractionReport cr =
      fpm::contraction_audit(op, F, u0, v0, tg, tg.all_step_times());
  const Trajectory traj = fpm::run_mild(op, F, u0, tg, tg.all_step_times());
  const fpm::BoundReport bc = fpm::benilan_crandall_audit(traj, es, F);
  const bool ok = cr.max_l1_ratio <= 1.0 + 1e-8 && cr.order_violations == 0 &&
                  cr.sup_ratio_u <= 1.0 + 1e-8 && bc.margin_worst >= -1.0;
  return {ok, "l1 ratio=" + fmt(cr.max_l1_ratio) +
                  " order violations=" + fmt(double(cr.order_violations)) +
                  " sup ratio=" + fmt(cr.sup_ratio_u) +
                  " bc margin/tol=" + fmt(bc.margin_worst)};
}

// 4. first-order decay of the weighted-norm evolution identity
Outcome criterion_weighted_identity() {
  const DiscreteOperator op = make_op(fpm::OperatorKind::rfl, 0.25, 0.0, 1.0, 256);
  const PowerSum F = PowerSum::single(2.0);
  const double r128 = fpm::weighted_l1_identity_residual(bump_run(op, F, 1.0, 1.0, 128), op, F);
  const double r256 = fpm::weighted_l1_identity_residual(bump_run(op, F, 1.0, 1.0, 256), op, F);
  const double ratio = r128 / r256;
  return {ratio >= 1.5 && ratio <= 2.5,
          "residuals=" + fmt(r128) + "/" + fmt(r256) + " ratio=" + fmt(ratio)};
}

// 5. smoothing exponents across a three-decade mass sweep
Outcome criterion_smoothing() {
  const DiscreteOperator op = make_op(fpm::OperatorKind::rfl, 0.25, 0.0, 1.0, 256);
  const PowerSum F = PowerSum::single(2.0);
  const ExponentSet es = fpm::exponents(F, op);
  std::vector<Trajectory> sweep;
  for (double amp : {0.03, 0.3, 3.0, 30.0}) sweep.push_back(bump_run(op, F, amp, 2.0, 256, 4));
  const fpm::BoundReport rep = fpm::smoothing_audit(sweep, op, F, es);
  return {rep.passed(), "alpha=" + fmt(rep.fitted.at("alpha")) + " (target " +
                            fmt(rep.fitted.at("alpha_target")) + ")  beta=" +
                            fmt(rep.fitted.at("beta")) + " (target " +
                            fmt(rep.fitted.at("beta_target")) + ")"};
}

// 6. matching boundary powers after the waiting time, with a stable local
//    Harnack quotient
Outcome criterion_matching_powers() {
  const PowerSum F = PowerSum::single(2.0);
  const double target = 0.25;  // gamma * sigma1
  double q[2] = {0.0, 0.0};
  std::string detail;
  bool ok = true;
  int slot = 0;
  for (int n : {256, 512}) {
    const DiscreteOperator op = make_op(fpm::OperatorKind::rfl, 0.25, 0.0, 1.0, n);
    const ExponentSet es = fpm::exponents(F, op);
    const Trajectory traj = bump_run(op, F, 1.0, 6.0, 384, 4);
    const double cs = fpm::calibrate_c_star(traj, op, F, es);
    const double ts = es.waiting_time(fpm::weighted_l1(traj.states.front(), op), cs);
    if (n == 256) {
      for (bool upper : {true, false}) {
        const Eigen::VectorXd env = fpm::time_envelope(
            traj, F, es.time_power(upper ? 1 : 0), 1.3 * ts, 2.0 * ts, upper);
        const fpm::SideFits fits = fpm::boundary_exponent_fit(env, op, 0.015, 0.06);
        const double worst = std::max(std::abs(fits.left.exponent - target),
                                      std::abs(fits.right.exponent - target));
        ok = ok && worst <= 0.15 * target;
        detail += std::string(upper ? "upper=" : " lower=") + fmt(fits.left.exponent) + "/" +
                  fmt(fits.right.exponent);
      }
    }
    int ci = 0;
    double best = 1e300;
    for (int i = 0; i < n; ++i)
      if (std::abs(op.grid().point(i) - 0.5) < best) {
        best = std::abs(op.grid().point(i) - 0.5);
        ci = i;
      }
    const fpm::HarnackReport hr =
        fpm::harnack_quotient(traj, op, F, ci, 0.1, "elliptic", 0.0, 1.1 * ts);
    ok = ok && hr.positivity_failures == 0 && std::isfinite(hr.q_max);
    q[slot++] = hr.q_max;
  }
  const double drift = std::abs(q[1] - q[0]) / q[0];
  ok = ok && drift < 0.25;
  return {ok, detail + " harnack q=" + fmt(q[0]) + " drift=" + fmt(drift)};
}

// 7. speed-of-propagation dichotomy and the waiting time
Outcome criterion_propagation() {
  const PowerSum F = PowerSum::single(2.0);
  const DiscreteOperator cls = make_op(fpm::OperatorKind::classical, 1.0, 0.0, 1.0, 256);
  const DiscreteOperator rfl = make_op(fpm::OperatorKind::rfl, 0.25, 0.0, 1.0, 256);
  const ExponentSet es = fpm::exponents(F, cls);

  const Trajectory tr = bump_run(rfl, F, 1.0, 1.0, 256);
  const fpm::PropagationReport pr = fpm::propagation_probe(tr, rfl, 1e-14);

  const Trajectory tc = bump_run(cls, F, 1.0, 1.0, 256);
  const fpm::PropagationReport pc = fpm::propagation_probe(tc, cls, 1e-14);

  const double cs = fpm::calibrate_c_star(tc, cls, F, es);
  const double ts = es.waiting_time(fpm::weighted_l1(tc.states.front(), cls), cs);
  fpm::GhpLowerParams early;
  early.c_star = cs;
  early.t_window_hi = 0.9 * ts;
  early.include_early = true;
  const fpm::BoundReport before = fpm::ghp_lower_audit(tc, cls, F, es, early);
  fpm::GhpLowerParams late;
  late.c_star = cs;
  late.t_window_lo = 1.1 * ts;
  const fpm::BoundReport after = fpm::ghp_lower_audit(tc, cls, F, es, late);

  const bool ok = pr.verdict == "infinite" && pc.verdict == "finite" &&
                  pc.first_collar_left >= 5 && pc.first_collar_right >= 5 &&
                  !before.passed() && after.passed();
  return {ok, "rfl=" + pr.verdict + " classical collar=" + fmt(double(pc.first_collar_left)) +
                  "/" + fmt(double(pc.first_collar_right)) + " t*=" + fmt(ts) +
                  " lower before/after=" + before.verdict + "/" + after.verdict};
}

// 8. anomalous small-data boundary behaviour of the spectral operator
Outcome criterion_anomalous() {
  const PowerSum F = PowerSum::single(10.0);
  const double A = 0.01;
  double ctilde[2] = {0.0, 0.0};
  double alpha = 0.0, alpha_se = 0.0;
  bool ok = true;
  int slot = 0;
  for (int n : {256, 512}) {
    const DiscreteOperator op = make_op(fpm::OperatorKind::sfl, 0.25, 0.0, 1.0, n);
    const ExponentSet es = fpm::exponents(F, op);
    const Eigen::VectorXd u0 = A * op.phi1().array().pow(0.5).matrix();
    const TimeGrid tg{1.0, 64};
    const Trajectory traj = fpm::run_mild(op, F, u0, tg, tg.strided_times(4));
    const fpm::BoundReport sup =
        fpm::supersolution_audit(traj, op, F, es, A, fpm::BarrierShape::phi_power);
    ok = ok && sup.verdict != "fail";
    ctilde[slot++] = sup.fitted.at("ctilde");
    if (n == 256) {
      const fpm::SideFits fits =
          fpm::boundary_exponent_fit(traj.states.back(), op, 2.0 * op.grid().h(), 0.1);
      alpha = 0.5 * (fits.left.exponent + fits.right.exponent);
      alpha_se = std::max(fits.left.std_error, fits.right.std_error);
      const double floor = 1.0 - 2.0 * es.s / es.gamma;  // = 0.5
      const double naive = es.gamma * es.sigma1 / es.m1;  // generic-envelope power
      ok = ok && std::abs(alpha - floor) <= 0.15 * floor;   // anomalous power holds
      ok = ok && alpha > naive;                             // strictly below the naive size
      ok = ok && alpha >= floor - std::max(0.02, 2.0 * alpha_se);  // exponent floor
    }
  }
  const double drift = std::abs(ctilde[1] - ctilde[0]) / std::max(ctilde[0], 1e-12);
  ok = ok && (drift < 0.25 || (ctilde[0] <= 1e-12 && ctilde[1] <= 1e-12));
  return {ok, "alpha=" + fmt(alpha) + "+-" + fmt(alpha_se) + " ctilde=" + fmt(ctilde[0]) +
                  "/" + fmt(ctilde[1])};
}

// 9. delta-approximation bracket and monotonicity
Outcome criterion_delta() {
  const DiscreteOperator op = make_op(fpm::OperatorKind::rfl, 0.25, 0.0, 1.0, 256);
  const PowerSum F = PowerSum::single(2.0);
  const TimeGrid tg{1.0, 128};
  const auto snaps = tg.all_step_times();
  const Eigen::VectorXd u0 = testutil::cosine_bump(op.grid(), 0.5, 1.0 / 6.0, 1.0);
  const Trajectory mild = fpm::run_mild(op, F, u0, tg, snaps);
  const double phi_l1 = op.phi1_l1_norm();
  double worst = 0.0;
  long violations = 0;
  Trajectory prev;
  for (double delta : {0.1, 0.01, 0.001}) {
    const Trajectory td = fpm::run_delta(op, F, u0, delta, tg, snaps);
    for (int k = 0; k < td.size(); ++k) {
      if (td.states[k].minCoeff() < delta - 1e-12) ++violations;
      if ((td.states[k] - mild.states[k]).minCoeff() < -1e-9) ++violations;
      if (prev.size() > 0 && (prev.states[k] - td.states[k]).minCoeff() < -1e-9) ++violations;
      const double dist =
          op.grid().h() * (td.states[k] - mild.states[k]).cwiseAbs().dot(op.phi1());
      worst = std::max(worst, dist / (delta * phi_l1));
    }
    prev = td;
  }
  return {worst <= 1.0 + 1e-6 && violations == 0,
          "worst bracket ratio=" + fmt(worst) + " violations=" + fmt(double(violations))};
}

// 10. byte-identical reports when re-running a criterion config from its manifest
Outcome criterion_determinism() {
  const fs::path root = fs::current_path() / "acceptance_out";
  fs::remove_all(root);
  fpm::Json j = fpm::Json::parse(R"({
    "version": 1,
    "label": "dichotomy",
    "operator": {"kind": "classical", "s": 1.0, "a": 0.0, "b": 1.0, "n": 256},
    "nonlinearity": {"terms": [{"coeff": 1.0, "exponent": 2.0}]},
    "datum": {"family": "bump", "amplitude": 1.0, "center": 0.5,
              "width": 0.16666666666666666},
    "time": {"t_final": 1.0, "steps": 256},
    "snapshots": {"mode": "every_step"},
    "audits": [
      {"name": "propagation", "expect": "finite", "min_collar_cells": 5},
      {"name": "ghp_lower", "regime": "general", "t_hi_factor": 0.9,
       "include_early": true, "expected_fail": true},
      {"name": "ghp_lower", "regime": "general", "t_lo_factor": 1.1}
    ]
  })");
  fpm::ExperimentConfig cfg = fpm::parse_config(j);
  cfg.out_dir = (root / "a").string();
  const fpm::ExperimentResult r1 = fpm::run_experiment(cfg, 0);
  if (!r1.all_ok()) return {false, "reference run failed its audits"};

  fpm::ExperimentConfig cfg2 = fpm::load_config_file((root / "a" / "manifest.json").string());
  cfg2.out_dir = (root / "b").string();
  const fpm::ExperimentResult r2 = fpm::run_experiment(cfg2, 0);
  if (!r2.all_ok()) return {false, "manifest re-run failed its audits"};
  long compared = 0;
  for (const auto& entry : fs::directory_iterator(root / "a")) {
    const auto name = entry.path().filename().string();
    if (name.rfind("meta_", 0) == 0 || name == "manifest.json") continue;
    if (fpm::read_text_file(root / "b" / name) != fpm::read_text_file(entry.path()))
      return {false, "mismatch in " + name};
    ++compared;
  }
  return {compared >= 6, "byte-identical files=" + fmt(double(compared)) +
                             " hash=" + r1.config_hash};
}

}  // namespace

int main() {
  using Clock = std::chrono::steady_clock;
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"eigen accuracy (classical, n=199)", criterion_eigen},
      {"rfl consistency vs quadrature oracle", criterion_rfl_consistency},
      {"semigroup properties (contraction, order, sup, monotonicity)", criterion_semigroup},
      {"weighted-l1 identity first-order residual", criterion_weighted_identity},
      {"smoothing exponents over a mass sweep", criterion_smoothing},
      {"matching boundary powers + local harnack", criterion_matching_powers},
      {"propagation dichotomy and waiting time", criterion_propagation},
      {"anomalous small-data boundary behaviour", criterion_anomalous},
      {"delta-approximation bracket", criterion_delta},
      {"determinism and manifest re-run", criterion_determinism},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = Clock::now();
    Outcome out;
    try {
      out = criteria[i].second();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - t0).count() /
        1000.0;
    std::printf("[%s] criterion %2zu: %s (%s) [%.1fs]\n", out.pass ? "PASS" : "FAIL", i + 1,
                criteria[i].first.c_str(), out.detail.c_str(), secs);
    std::fflush(stdout);
    if (!out.pass) ++failures;
  }
  if (failures) std::printf("%d criterion(s) failed\n", failures);
  return failures;
}
