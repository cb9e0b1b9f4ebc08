#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fpmlab/estimates.hpp"
#include "fpmlab/solver.hpp"
#include "helpers.hpp"

using fpm::DiscreteOperator;
using fpm::PowerSum;
using fpm::TimeGrid;
using fpm::Trajectory;

namespace {
const DiscreteOperator& rfl64() {
  static DiscreteOperator op =
      DiscreteOperator::assemble({fpm::OperatorKind::rfl, 0.25, {0.0, 1.0, 64}});
  return op;
}
}  // namespace

TEST_CASE("zero datum short-circuits to the zero trajectory") {
  const PowerSum F = PowerSum::single(2.0);
  const Trajectory t = fpm::run_mild(rfl64(), F, Eigen::VectorXd::Zero(64), {1.0, 16},
                                     TimeGrid{1.0, 16}.all_step_times());
  CHECK(t.size() == 17);
  CHECK(t.stats.newton_iterations == 0);
  for (const auto& st : t.states) CHECK(st.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("implicit step satisfies its residual contract") {
  const PowerSum F = PowerSum::single(2.0);
  const fpm::SteppedNonlinearity SF{&F, 0.0};
  const Eigen::VectorXd u0 = testutil::cosine_bump(rfl64().grid(), 0.5, 0.2, 1.0);
  fpm::SolveStats stats;
  const double ht = 1.0 / 64.0;
  const Eigen::VectorXd u1 = fpm::implicit_step(rfl64(), SF, u0, ht, stats);
  Eigen::VectorXd Fu(u1.size());
  for (int i = 0; i < u1.size(); ++i) Fu(i) = F.value(u1(i));
  const double resid = (u1 + ht * rfl64().apply(Fu) - u0).cwiseAbs().maxCoeff();
  CHECK(resid <= 1e-10 * (1.0 + u0.maxCoeff()));
  CHECK(u1.minCoeff() >= 0.0);
}

TEST_CASE("small step from a scaled eigenvector matches the linearization") {
  const PowerSum F = PowerSum::single(2.0);
  const fpm::SteppedNonlinearity SF{&F, 0.0};
  const double eps = 1e-2, ht = 1e-4;
  const Eigen::VectorXd u0 = eps * rfl64().phi1();
  fpm::SolveStats stats;
  const Eigen::VectorXd u1 = fpm::implicit_step(rfl64(), SF, u0, ht, stats);
  Eigen::VectorXd Fu(u0.size());
  for (int i = 0; i < u0.size(); ++i) Fu(i) = F.value(u0(i));
  // one-term expansion of the implicit step
  const Eigen::VectorXd predicted = u0 - ht * rfl64().apply(Fu);
  CHECK((u1 - predicted).cwiseAbs().maxCoeff() < 1e-8 * eps);
}

TEST_CASE("mild run conserves the semigroup inequalities") {
  const PowerSum F = PowerSum::single(2.0);
  const Eigen::VectorXd u0 = testutil::cosine_bump(rfl64().grid(), 0.5, 1.0 / 6.0, 1.0);
  const TimeGrid tg{0.5, 64};
  const Trajectory t = fpm::run_mild(rfl64(), F, u0, tg, tg.all_step_times());
  const double h = rfl64().grid().h();
  double mass_prev = h * u0.sum();
  for (int k = 1; k < t.size(); ++k) {
    CHECK(t.states[k].maxCoeff() <= u0.maxCoeff() * (1.0 + 1e-8));
    const double mass = h * t.states[k].sum();
    CHECK(mass <= mass_prev * (1.0 + 1e-10));
    mass_prev = mass;
    CHECK(t.states[k].minCoeff() >= 0.0);
  }
  CHECK(t.stats.clamped_mass < 1e-10 * (h * u0.sum()));
}

TEST_CASE("snapshot interpolation") {
  const PowerSum F = PowerSum::single(2.0);
  const Eigen::VectorXd u0 = testutil::cosine_bump(rfl64().grid(), 0.5, 0.2, 1.0);
  const Trajectory t = fpm::run_mild(rfl64(), F, u0, {1.0, 8}, {0.0, 0.4375, 0.5, 1.0});
  REQUIRE(t.size() == 4);
  CHECK(t.at_step_time[0]);
  CHECK_FALSE(t.at_step_time[1]);  // 0.4375 is off the step grid
  CHECK(t.at_step_time[2]);
  CHECK(t.at_step_time[3]);
  CHECK(t.times[1] == doctest::Approx(0.4375));
}

TEST_CASE("contraction and order preservation") {
  const PowerSum F = PowerSum::single(2.0);
  const auto& op = rfl64();
  const Eigen::VectorXd u0 = testutil::cosine_bump(op.grid(), 0.5, 1.0 / 6.0, 1.0);
  const Eigen::VectorXd v0 = u0 + testutil::cosine_bump(op.grid(), 0.35, 0.1, 0.3);
  const TimeGrid tg{0.5, 32};
  const fpm::ContractionReport rep =
      fpm::contraction_audit(op, F, u0, v0, tg, tg.all_step_times());
  CHECK_FALSE(rep.degenerate);
  CHECK(rep.max_l1_ratio <= 1.0 + 1e-8);
  CHECK(rep.ordered_data);
  CHECK(rep.order_violations == 0);
  CHECK(rep.sup_ratio_u <= 1.0 + 1e-8);

  const fpm::ContractionReport same =
      fpm::contraction_audit(op, F, u0, u0, tg, tg.all_step_times());
  CHECK(same.degenerate);
}

TEST_CASE("minimal weak dual ladder") {
  const PowerSum F = PowerSum::single(2.0);
  const auto& op = rfl64();
  const Eigen::VectorXd u0 = testutil::cosine_bump(op.grid(), 0.5, 1.0 / 6.0, 3.0);
  const TimeGrid tg{0.25, 16};
  const auto snaps = tg.all_step_times();
  CHECK_THROWS_AS(fpm::run_minimal(op, F, u0, tg, snaps, {2.0, 1.0}), fpm::SolverError);

  const fpm::MinimalRun run = fpm::run_minimal(op, F, u0, tg, snaps, {1.0, 2.0, 4.0});
  CHECK(run.monotonicity.violations == 0);
  CHECK(run.monotonicity.worst_margin >= -1e-9);

  // cutoff above the sup is the mild run itself
  const Trajectory plain = fpm::run_mild(op, F, u0, tg, snaps);
  const Trajectory& top = run.trajectories.back();
  for (int k = 0; k < plain.size(); ++k)
    CHECK((plain.states[k] - top.states[k]).cwiseAbs().maxCoeff() <= 1e-12);

  // two different ladders saturate to the same limit
  const fpm::MinimalRun alt = fpm::run_minimal(op, F, u0, tg, snaps, {1.5, 3.0, 6.0});
  const Trajectory& top2 = alt.trajectories.back();
  for (int k = 0; k < top.size(); ++k)
    CHECK((top.states[k] - top2.states[k]).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("approximate problems") {
  const PowerSum F = PowerSum::single(2.0);
  const auto& op = rfl64();
  const TimeGrid tg{0.5, 32};
  const auto snaps = tg.all_step_times();
  CHECK_THROWS_AS(fpm::run_delta(op, F, Eigen::VectorXd::Zero(64), 0.0, tg, snaps),
                  fpm::SolverError);

  // zero datum: u_delta stays >= delta
  const Trajectory z = fpm::run_delta(op, F, Eigen::VectorXd::Zero(64), 0.1, tg, snaps);
  for (const auto& st : z.states) CHECK(st.minCoeff() >= 0.1 - 1e-12);

  const Eigen::VectorXd u0 = testutil::cosine_bump(op.grid(), 0.5, 1.0 / 6.0, 1.0);
  const Trajectory mild = fpm::run_mild(op, F, u0, tg, snaps);
  const double phi_l1 = op.phi1_l1_norm();
  Trajectory prev;
  for (double delta : {0.1, 0.01, 0.001}) {
    const Trajectory td = fpm::run_delta(op, F, u0, delta, tg, snaps);
    for (int k = 0; k < td.size(); ++k) {
      CHECK(td.states[k].minCoeff() >= delta - 1e-12);
      CHECK((td.states[k] - mild.states[k]).minCoeff() >= -1e-9);
      if (prev.size() > 0) CHECK((prev.states[k] - td.states[k]).minCoeff() >= -1e-9);
      const double dist =
          op.grid().h() * (td.states[k] - mild.states[k]).cwiseAbs().dot(op.phi1());
      CHECK(dist <= delta * phi_l1 * (1.0 + 1e-6));
    }
    prev = td;
  }
}

TEST_CASE("crandall-liggett self convergence in time") {
  const PowerSum F = PowerSum::single(2.0);
  const auto& op = rfl64();
  const Eigen::VectorXd u0 = testutil::cosine_bump(op.grid(), 0.5, 1.0 / 6.0, 1.0);
  std::vector<Eigen::VectorXd> finals;
  for (int steps : {16, 32, 64, 128})
    finals.push_back(fpm::run_mild(op, F, u0, {0.5, steps}, {0.5}).states.back());
  const double h = op.grid().h();
  std::vector<double> d;
  for (std::size_t i = 0; i + 1 < finals.size(); ++i)
    d.push_back(h * (finals[i] - finals[i + 1]).cwiseAbs().sum());
  for (std::size_t i = 0; i + 1 < d.size(); ++i) CHECK(std::log2(d[i] / d[i + 1]) >= 0.8);
}

TEST_CASE("hard failure diagnostics on a non-finite step") {
  const PowerSum F = PowerSum::single(10.0);
  const auto& op = rfl64();
  // an absurd time step overflows F evaluations into non-finite residuals
  Eigen::VectorXd u0 = Eigen::VectorXd::Constant(64, 1e30);
  fpm::SolveStats stats;
  const fpm::SteppedNonlinearity SF{&F, 0.0};
  CHECK_THROWS_AS(fpm::implicit_step(op, SF, u0, 1e300, stats), fpm::SolverError);
  CHECK(stats.step_halvings > 0);
}
