#pragma once

#include <Eigen/Dense>
#include <memory>
#include <stdexcept>
#include <string>

#include "fpmlab/grid.hpp"

namespace fpm {

enum class OperatorKind { classical, rfl, sfl };

std::string to_string(OperatorKind kind);
OperatorKind operator_kind_from_string(const std::string& name);

struct OperatorSpec {
  OperatorKind kind = OperatorKind::classical;
  double s = 1.0;
  Grid grid;

  /// Boundary exponent of the first eigenfunction: 1 for the classical
  /// Laplacian and the spectral power, s for the restricted kernel.
  double gamma() const { return kind == OperatorKind::rfl ? s : 1.0; }
  void validate() const;
};

struct KernelBoundsReport {
  long pair_count = 0;
  double fitted_c0 = 0.0;      // largest c0 with K(x,y) >= c0 phi(x) phi(y)
  double fitted_c1 = 0.0;      // smallest c1 for the two-sided upper envelope
  double fitted_c1_flat = 0.0; // smallest c1 with K <= c1 |x-y|^{2s-1}
  bool lower_ok = false;
  bool upper_ok = false;
};

struct KernelFormReport {
  double min_offdiag_kernel = 0.0;  // min over i != j of K_ij = -A_ij / h
  double min_zero_order = 0.0;      // min over i of B_i (row sums of A)
  double fitted_kernel_floor = 0.0; // inf over pairs of K_ij
  double fitted_c0_l2 = 0.0;        // largest c0 with K_ij >= c0 d_i^g d_j^g
  double zero_order_exponent = 0.0; // log-log slope of B vs d near the boundary
  bool offdiag_nonnegative = false;
  bool zero_order_nonnegative = false;
};

/// Dense realization of one of the three Dirichlet operators, with cached LU
/// factorization, Green kernel access, and the principal eigenpair.
class DiscreteOperator {
 public:
  static DiscreteOperator assemble(const OperatorSpec& spec);

  Eigen::VectorXd apply(const Eigen::VectorXd& u) const;
  Eigen::VectorXd solve_green(const Eigen::VectorXd& f) const;

  /// Discrete Green kernel value K(x_i, x_j) = (A^{-1})_{ij} / h.
  double green_kernel(int i, int j) const;

  double lambda1() const { return lambda1_; }
  const Eigen::VectorXd& phi1() const { return phi1_; }
  double phi1_l1_norm() const;  // h * sum phi1
  const Eigen::MatrixXd& matrix() const { return A_; }
  const OperatorSpec& spec() const { return spec_; }
  const Grid& grid() const { return spec_.grid; }
  int size() const { return spec_.grid.n; }

  KernelBoundsReport verify_kernel_bounds() const;
  KernelFormReport kernel_form() const;  // rejects the classical operator

 private:
  DiscreteOperator() = default;
  void compute_eigenpair();
  const Eigen::MatrixXd& inverse() const;

  OperatorSpec spec_;
  Eigen::MatrixXd A_;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
  mutable std::shared_ptr<Eigen::MatrixXd> inv_cache_;
  double lambda1_ = 0.0;
  Eigen::VectorXd phi1_;
};

/// Normalization constant of the 1-D fractional Laplacian kernel.
double fractional_normalization(double s);

class OperatorError : public std::runtime_error {
 public:
  explicit OperatorError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace fpm
