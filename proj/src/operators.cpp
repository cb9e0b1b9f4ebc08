#include "fpmlab/operators.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "fpmlab/fitting.hpp"

namespace fpm {

std::string to_string(OperatorKind kind) {
  switch (kind) {
    case OperatorKind::classical: return "classical";
    case OperatorKind::rfl: return "rfl";
    case OperatorKind::sfl: return "sfl";
  }
  return "?";
}

OperatorKind operator_kind_from_string(const std::string& name) {
  if (name == "classical") return OperatorKind::classical;
  if (name == "rfl") return OperatorKind::rfl;
  if (name == "sfl") return OperatorKind::sfl;
  throw OperatorError("unknown operator kind '" + name + "' (classical|rfl|sfl)");
}

double fractional_normalization(double s) {
  return s * std::pow(4.0, s) * std::tgamma(0.5 + s) /
         (std::sqrt(M_PI) * std::tgamma(1.0 - s));
}

void OperatorSpec::validate() const {
  grid.validate();
  switch (kind) {
    case OperatorKind::classical:
      if (s != 1.0) throw OperatorError("classical operator has order s = 1");
      break;
    case OperatorKind::rfl:
      if (!(s > 0.0 && s < 0.5))
        throw OperatorError("rfl needs s in (0, 1/2): the standing assumption N > 2s "
                            "fails in one dimension otherwise");
      break;
    case OperatorKind::sfl:
      if (!(s > 0.0 && s < 1.0)) throw OperatorError("sfl needs s in (0, 1)");
      break;
  }
}

namespace {

Eigen::MatrixXd assemble_classical(const Grid& g) {
  const int n = g.n;
  const double w = 1.0 / (g.h() * g.h());
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    A(i, i) = 2.0 * w;
    if (i > 0) A(i, i - 1) = -w;
    if (i + 1 < n) A(i, i + 1) = -w;
  }
  return A;
}

// Midpoint quadrature over the interior cells, an even-symmetry Taylor
// correction for the singular cell, and the exact integral of the kernel over
// the region where u vanishes (exterior plus the two uncovered half cells).
Eigen::MatrixXd assemble_rfl(const Grid& g, double s) {
  const int n = g.n;
  const double h = g.h();
  const double C = fractional_normalization(s);
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    const double xi = g.point(i);
    double offsum = 0.0;
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      const double w = C * h / std::pow(std::abs(xi - g.point(j)), 1.0 + 2.0 * s);
      A(i, j) = -w;
      offsum += w;
    }
    const double dl = xi - g.a - 0.5 * h;
    const double dr = g.b - 0.5 * h - xi;
    A(i, i) = C * (std::pow(dl, -2.0 * s) + std::pow(dr, -2.0 * s)) / (2.0 * s) + offsum;
  }
  const double csing = C * std::pow(0.5 * h, 2.0 - 2.0 * s) / (2.0 - 2.0 * s) / (h * h);
  for (int i = 0; i < n; ++i) {
    A(i, i) += 2.0 * csing;
    if (i > 0) A(i, i - 1) -= csing;
    if (i + 1 < n) A(i, i + 1) -= csing;
  }
  return A;
}

// Spectral power of the discrete Dirichlet Laplacian, built from its
// closed-form eigenpairs under the h-weighted inner product.
Eigen::MatrixXd assemble_sfl(const Grid& g, double s) {
  const int n = g.n;
  const double h = g.h();
  Eigen::VectorXd lam_s(n);
  for (int k = 1; k <= n; ++k) {
    const double lam = (2.0 / (h * h)) * (1.0 - std::cos(k * M_PI / (n + 1)));
    lam_s(k - 1) = std::pow(lam, s);
  }
  Eigen::MatrixXd V(n, n);
  for (int j = 1; j <= n; ++j)
    for (int k = 1; k <= n; ++k)
      V(j - 1, k - 1) = std::sin(j * k * M_PI / (n + 1));
  Eigen::MatrixXd A = (2.0 / (n + 1)) * V * lam_s.asDiagonal() * V.transpose();
  A = 0.5 * (A + A.transpose()).eval();
  return A;
}

}  // namespace

DiscreteOperator DiscreteOperator::assemble(const OperatorSpec& spec) {
  spec.validate();
  DiscreteOperator op;
  op.spec_ = spec;
  switch (spec.kind) {
    case OperatorKind::classical: op.A_ = assemble_classical(spec.grid); break;
    case OperatorKind::rfl: op.A_ = assemble_rfl(spec.grid, spec.s); break;
    case OperatorKind::sfl: op.A_ = assemble_sfl(spec.grid, spec.s); break;
  }
  op.lu_.compute(op.A_);
  op.compute_eigenpair();
  return op;
}

Eigen::VectorXd DiscreteOperator::apply(const Eigen::VectorXd& u) const {
  if (u.size() != A_.rows()) throw OperatorError("apply: dimension mismatch");
  return A_ * u;
}

Eigen::VectorXd DiscreteOperator::solve_green(const Eigen::VectorXd& f) const {
  if (f.size() != A_.rows()) throw OperatorError("solve_green: dimension mismatch");
  Eigen::VectorXd u = lu_.solve(f);
  if (!u.allFinite()) throw OperatorError("solve_green: singular factorization");
  return u;
}

const Eigen::MatrixXd& DiscreteOperator::inverse() const {
  if (!inv_cache_)
    inv_cache_ = std::make_shared<Eigen::MatrixXd>(
        lu_.solve(Eigen::MatrixXd::Identity(A_.rows(), A_.cols())));
  return *inv_cache_;
}

double DiscreteOperator::green_kernel(int i, int j) const {
  const int n = size();
  if (i < 0 || j < 0 || i >= n || j >= n) throw OperatorError("green_kernel: bad index");
  return inverse()(i, j) / spec_.grid.h();
}

double DiscreteOperator::phi1_l1_norm() const { return spec_.grid.h() * phi1_.sum(); }

void DiscreteOperator::compute_eigenpair() {
  const int n = size();
  Eigen::VectorXd v = Eigen::VectorXd::Ones(n);
  double lam = 0.0;
  double resid = std::numeric_limits<double>::infinity();
  for (int it = 0; it < 500; ++it) {
    Eigen::VectorXd w = lu_.solve(v);
    w /= w.cwiseAbs().maxCoeff();
    const Eigen::VectorXd Aw = A_ * w;
    lam = w.dot(Aw) / w.dot(w);
    resid = (Aw - lam * w).cwiseAbs().maxCoeff();
    v = w;
    if (resid <= 1e-10 * lam) break;
  }
  if (!(resid <= 1e-8 * lam))
    throw OperatorError("principal eigenpair did not converge, residual " +
                        std::to_string(resid));
  v /= v.maxCoeff();
  if (v.minCoeff() <= 0.0)
    throw OperatorError("principal eigenvector is not entrywise positive");
  lambda1_ = lam;
  phi1_ = v;
}

KernelBoundsReport DiscreteOperator::verify_kernel_bounds() const {
  const int n = size();
  const Grid& g = spec_.grid;
  const double s = spec_.s;
  const double gam = spec_.gamma();
  const Eigen::MatrixXd& G = inverse();
  const double h = g.h();
  KernelBoundsReport rep;
  double c0 = std::numeric_limits<double>::infinity();
  double c1 = 0.0, c1_flat = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double K = G(i, j) / h;
      c0 = std::min(c0, K / (phi1_(i) * phi1_(j)));
      if (i == j) continue;
      const double r = std::abs(g.point(i) - g.point(j));
      const double envelope = std::pow(r, 2.0 * s - 1.0) *
                              std::min(phi1_(i) / std::pow(r, gam), 1.0) *
                              std::min(phi1_(j) / std::pow(r, gam), 1.0);
      c1 = std::max(c1, K / envelope);
      c1_flat = std::max(c1_flat, K * std::pow(r, 1.0 - 2.0 * s));
      ++rep.pair_count;
    }
  }
  rep.fitted_c0 = c0;
  rep.fitted_c1 = c1;
  rep.fitted_c1_flat = c1_flat;
  rep.lower_ok = c0 > 0.0;
  rep.upper_ok = std::isfinite(c1) && c1 > 0.0;
  return rep;
}

KernelFormReport DiscreteOperator::kernel_form() const {
  if (spec_.kind == OperatorKind::classical)
    throw OperatorError("kernel_form: the classical operator has no nonlocal kernel");
  const int n = size();
  const Grid& g = spec_.grid;
  const double h = g.h();
  KernelFormReport rep;
  rep.min_offdiag_kernel = std::numeric_limits<double>::infinity();
  rep.fitted_kernel_floor = std::numeric_limits<double>::infinity();
  rep.min_zero_order = std::numeric_limits<double>::infinity();
  rep.fitted_c0_l2 = std::numeric_limits<double>::infinity();
  const double gam = spec_.gamma();
  std::vector<double> bd, bv;
  for (int i = 0; i < n; ++i) {
    double rowsum = A_(i, i);
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      rowsum += A_(i, j);
      const double K = -A_(i, j) / h;
      rep.min_offdiag_kernel = std::min(rep.min_offdiag_kernel, K);
      rep.fitted_kernel_floor = std::min(rep.fitted_kernel_floor, K);
      const double dd = std::pow(g.boundary_distance(i), gam) *
                        std::pow(g.boundary_distance(j), gam);
      rep.fitted_c0_l2 = std::min(rep.fitted_c0_l2, K / dd);
    }
    rep.min_zero_order = std::min(rep.min_zero_order, rowsum);
    const double d = g.boundary_distance(i);
    if (d <= 0.25 * g.length() && rowsum > 0.0) {
      bd.push_back(d);
      bv.push_back(rowsum);
    }
  }
  rep.offdiag_nonnegative = rep.min_offdiag_kernel >= -1e-12;
  rep.zero_order_nonnegative = rep.min_zero_order >= -1e-12;
  if (bd.size() >= 5) rep.zero_order_exponent = loglog_fit(bd, bv).exponent;
  return rep;
}

}  // namespace fpm
