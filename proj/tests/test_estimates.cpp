#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fpmlab/estimates.hpp"
#include "helpers.hpp"

using fpm::DiscreteOperator;
using fpm::ExponentSet;
using fpm::PowerSum;
using fpm::TimeGrid;
using fpm::Trajectory;

namespace {
const DiscreteOperator& rfl96() {
  static DiscreteOperator op =
      DiscreteOperator::assemble({fpm::OperatorKind::rfl, 0.25, {0.0, 1.0, 96}});
  return op;
}
const DiscreteOperator& sfl96() {
  static DiscreteOperator op =
      DiscreteOperator::assemble({fpm::OperatorKind::sfl, 0.25, {0.0, 1.0, 96}});
  return op;
}
Trajectory bump_run(const DiscreteOperator& op, const PowerSum& F, double amp, double T,
                    int steps) {
  const Eigen::VectorXd u0 = testutil::cosine_bump(op.grid(), 0.5, 1.0 / 6.0, amp);
  return fpm::run_mild(op, F, u0, {T, steps}, TimeGrid{T, steps}.all_step_times());
}
}  // namespace

TEST_CASE("exponent arithmetic") {
  const ExponentSet e1 = fpm::exponents(PowerSum::single(2.0), rfl96());
  CHECK(e1.gamma == 0.25);
  CHECK(e1.theta0 == doctest::Approx(1.0 / (0.5 + 1.25)).epsilon(1e-14));
  CHECK(e1.theta0 == doctest::Approx(0.5714285714).epsilon(1e-9));
  CHECK(e1.sigma0 == e1.sigma1);  // single power
  CHECK(e1.theta0 == e1.theta1);

  const ExponentSet e2 = fpm::exponents(PowerSum::single(10.0), sfl96());
  CHECK(e2.sigma1 == doctest::Approx(5.0 / 9.0).epsilon(1e-12));

  const ExponentSet e3 = fpm::exponents(PowerSum({{1.0, 2.0}, {1.0, 10.0}}), sfl96());
  CHECK(e3.m0 == 2.0);
  CHECK(e3.m1 == 10.0);
  CHECK(e3.sigma1 <= e3.sigma0);
  CHECK(e3.sigma0 <= 1.0);
  CHECK(e3.theta1 <= e3.theta0);
}

TEST_CASE("weighted norm") {
  const DiscreteOperator op =
      DiscreteOperator::assemble({fpm::OperatorKind::classical, 1.0, {0.0, M_PI, 199}});
  // integral of sin^2 over (0, pi)
  CHECK(fpm::weighted_l1(op.phi1(), op) == doctest::Approx(M_PI / 2.0).epsilon(1e-3));
  CHECK(fpm::weighted_l1(Eigen::VectorXd::Zero(199), op) == 0.0);
  Eigen::VectorXd u = Eigen::VectorXd::Random(199).cwiseAbs();
  CHECK(fpm::weighted_l1(3.0 * u, op) == doctest::Approx(3.0 * fpm::weighted_l1(u, op)));
}

TEST_CASE("waiting time formula") {
  ExponentSet es = fpm::exponents(PowerSum({{1.0, 2.0}, {1.0, 10.0}}), rfl96());
  CHECK(es.waiting_time(1.0, 0.7) == doctest::Approx(0.7));
  CHECK(es.waiting_time(2.0, 1.0) == doctest::Approx(0.5));         // large-data branch
  CHECK(es.waiting_time(0.5, 1.0) == doctest::Approx(512.0));       // small-data branch
  CHECK(std::isinf(es.waiting_time(0.0, 1.0)));
}

TEST_CASE("benilan-crandall audit") {
  const PowerSum F = PowerSum::single(2.0);
  const ExponentSet es = fpm::exponents(F, rfl96());
  const Trajectory zero = fpm::run_mild(rfl96(), F, Eigen::VectorXd::Zero(96), {0.25, 8},
                                        TimeGrid{0.25, 8}.all_step_times());
  CHECK(fpm::benilan_crandall_audit(zero, es, F).verdict == "pass");

  Trajectory traj = bump_run(rfl96(), F, 1.0, 0.5, 64);
  const fpm::BoundReport rep = fpm::benilan_crandall_audit(traj, es, F);
  CHECK(rep.verdict == "pass");
  CHECK(rep.margin_worst >= -1.0);

  // mutation: a time-reversed trajectory must fail the audit
  std::reverse(traj.states.begin(), traj.states.end());
  CHECK(fpm::benilan_crandall_audit(traj, es, F).verdict == "fail");
}

TEST_CASE("weighted-l1 identity audit and first-order residual") {
  const PowerSum F = PowerSum::single(2.0);
  const fpm::BoundReport rep =
      fpm::weighted_l1_identity_audit(bump_run(rfl96(), F, 1.0, 0.5, 64), rfl96(), F);
  CHECK(rep.verdict == "pass");
  const double r64 =
      fpm::weighted_l1_identity_residual(bump_run(rfl96(), F, 1.0, 0.5, 64), rfl96(), F);
  const double r128 =
      fpm::weighted_l1_identity_residual(bump_run(rfl96(), F, 1.0, 0.5, 128), rfl96(), F);
  CHECK(r64 / r128 > 1.5);
  CHECK(r64 / r128 < 2.5);

  const fpm::ExponentSet es = fpm::exponents(F, rfl96());
  const fpm::BoundReport rev =
      fpm::weighted_l1_reverse_audit(bump_run(rfl96(), F, 1.0, 0.5, 64), rfl96(), F, es);
  CHECK(rev.verdict == "pass");
  CHECK(rev.fitted.at("k7") >= 0.0);
  CHECK(std::isfinite(rev.fitted.at("k7")));
}

TEST_CASE("absolute upper audit") {
  const PowerSum F = PowerSum::single(2.0);
  const ExponentSet es = fpm::exponents(F, rfl96());
  // T far past every waiting time in the sweep: the bound is a large-time
  // statement, small data only saturate it after forgetting their mass
  std::vector<Trajectory> sweep;
  for (double amp : {0.1, 1.0, 10.0}) sweep.push_back(bump_run(rfl96(), F, amp, 300.0, 256));
  const fpm::BoundReport rep = fpm::absolute_upper_audit(sweep, F, es);
  CHECK(rep.verdict == "pass");
  CHECK(rep.fitted.at("kbar2") > 0.0);
  CHECK(rep.fitted.at("k2") > 0.0);
  // decay exponent approaches -1/(m1 - 1) = -1 at large times
  CHECK(rep.fitted.at("decay_exponent") == doctest::Approx(-1.0).epsilon(0.2));
  // the bound is datum-independent across a hundredfold datum sweep
  CHECK(rep.fitted.at("kbar2_datum_drift") < 0.30);
}

TEST_CASE("ghp audits") {
  const PowerSum F = PowerSum::single(2.0);
  const ExponentSet es = fpm::exponents(F, rfl96());
  const Trajectory traj = bump_run(rfl96(), F, 1.0, 4.0, 192);
  const double cs = fpm::calibrate_c_star(traj, rfl96(), F, es);
  CHECK(cs > 0.0);

  const fpm::BoundReport up = fpm::ghp_upper_audit(traj, rfl96(), F, es);
  CHECK(up.verdict == "pass");
  CHECK(up.fitted.at("k3") > 0.0);

  fpm::GhpLowerParams gp;
  gp.regime = fpm::GhpRegime::nondegenerate;
  gp.c_star = cs;
  const fpm::BoundReport lo = fpm::ghp_lower_audit(traj, rfl96(), F, es, gp);
  CHECK(lo.verdict == "pass");
  CHECK(lo.fitted.at("lower_constant") > 0.0);

  // fitted envelope constants are stable when the grid doubles
  const fpm::DiscreteOperator fine =
      fpm::DiscreteOperator::assemble({fpm::OperatorKind::rfl, 0.25, {0.0, 1.0, 193}});
  const Trajectory tf = fpm::run_mild(fine, F,
                                      testutil::cosine_bump(fine.grid(), 0.5, 1.0 / 6.0, 1.0),
                                      {4.0, 192}, TimeGrid{4.0, 192}.all_step_times());
  const fpm::ExponentSet esf = fpm::exponents(F, fine);
  const fpm::BoundReport upf = fpm::ghp_upper_audit(tf, fine, F, esf);
  CHECK(std::abs(upf.fitted.at("k3") - up.fitted.at("k3")) < 0.25 * up.fitted.at("k3"));
  fpm::GhpLowerParams gpf = gp;
  gpf.c_star = fpm::calibrate_c_star(tf, fine, F, esf);
  const fpm::BoundReport lof = fpm::ghp_lower_audit(tf, fine, F, esf, gpf);
  CHECK(std::abs(lof.fitted.at("lower_constant") - lo.fitted.at("lower_constant")) <
        0.25 * lo.fitted.at("lower_constant"));

  // regime / operator mismatches are rejected
  fpm::GhpLowerParams bad;
  bad.regime = fpm::GhpRegime::degenerate;
  CHECK_THROWS_AS(fpm::ghp_lower_audit(traj, rfl96(), F, es, bad), fpm::AuditError);
  const ExponentSet es10 = fpm::exponents(PowerSum::single(10.0), sfl96());
  CHECK(es10.sigma1 < 1.0);
  fpm::GhpLowerParams nd;
  nd.regime = fpm::GhpRegime::nondegenerate;
  const Trajectory tiny = fpm::run_mild(sfl96(), PowerSum::single(10.0),
                                        0.01 * sfl96().phi1(), {0.5, 8},
                                        TimeGrid{0.5, 8}.all_step_times());
  CHECK_THROWS_AS(fpm::ghp_lower_audit(tiny, sfl96(), PowerSum::single(10.0), es10, nd),
                  fpm::AuditError);
}

TEST_CASE("supersolution barrier") {
  const PowerSum F = PowerSum::single(10.0);
  const ExponentSet es = fpm::exponents(F, sfl96());
  const double A = 0.01;
  const Eigen::VectorXd u0 = A * sfl96().phi1().array().pow(0.5).matrix();
  const Trajectory traj =
      fpm::run_mild(sfl96(), F, u0, {1.0, 16}, TimeGrid{1.0, 16}.all_step_times());
  const fpm::BoundReport rep =
      fpm::supersolution_audit(traj, sfl96(), F, es, A, fpm::BarrierShape::phi_power);
  CHECK(rep.verdict != "fail");
  CHECK(rep.fitted.at("beta") == doctest::Approx(0.5));

  // precondition violations are rejected with the offending points
  CHECK_THROWS_AS(
      fpm::supersolution_audit(traj, sfl96(), F, es, 0.25 * A, fpm::BarrierShape::phi_power),
      fpm::AuditError);
  // the anomalous shape needs sigma0 < 1, which fails for m = 2
  const PowerSum F2 = PowerSum::single(2.0);
  const ExponentSet es2 = fpm::exponents(F2, sfl96());
  const Trajectory t2 = fpm::run_mild(sfl96(), F2, 0.01 * sfl96().phi1(), {0.5, 8},
                                      TimeGrid{0.5, 8}.all_step_times());
  CHECK_THROWS_AS(
      fpm::supersolution_audit(t2, sfl96(), F2, es2, 0.011, fpm::BarrierShape::phi_power),
      fpm::AuditError);
  // the zero datum is degenerate for any barrier
  const Trajectory z = fpm::run_mild(sfl96(), F, Eigen::VectorXd::Zero(96), {0.5, 8},
                                     TimeGrid{0.5, 8}.all_step_times());
  CHECK(fpm::supersolution_audit(z, sfl96(), F, es, A, fpm::BarrierShape::phi_power).verdict ==
        "degenerate");
}

TEST_CASE("small data decay") {
  const PowerSum F = PowerSum::single(2.0);
  // rfl: sigma1 = 1, the vanishing clause is skipped
  const ExponentSet es = fpm::exponents(F, rfl96());
  const Eigen::VectorXd u0 = 0.5 * rfl96().phi1();
  const Trajectory traj =
      fpm::run_mild(rfl96(), F, u0, {1.0, 32}, TimeGrid{1.0, 32}.all_step_times());
  const fpm::BoundReport rep = fpm::small_data_decay_audit(traj, rfl96(), F, es, 0.5);
  CHECK(rep.verdict == "pass");
  CHECK(rep.fitted.at("k13") > 0.0);
  CHECK(rep.fitted.count("vanishing_ratio_violations") == 0);

  // sfl with m = 10: sigma1 < 1, the vanishing clause is checked
  const PowerSum F10 = PowerSum::single(10.0);
  const ExponentSet es10 = fpm::exponents(F10, sfl96());
  const Eigen::VectorXd v0 = 0.01 * sfl96().phi1();
  const Trajectory t10 =
      fpm::run_mild(sfl96(), F10, v0, {1.0, 16}, TimeGrid{1.0, 16}.all_step_times());
  const fpm::BoundReport r10 = fpm::small_data_decay_audit(t10, sfl96(), F10, es10, 0.01);
  CHECK(r10.verdict == "pass");
  CHECK(r10.fitted.at("vanishing_ratio_violations") == 0.0);

  CHECK_THROWS_AS(fpm::small_data_decay_audit(traj, rfl96(), F, es, 0.01), fpm::AuditError);
}
