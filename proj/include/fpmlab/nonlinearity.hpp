#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace fpm {

struct PowerTerm {
  double coeff;
  double exponent;
};

/// Monotone nonlinearity F(r) = sum_i a_i r^{p_i} on r >= 0, extended oddly,
/// with a_i > 0 and p_i > 1. Degenerate at zero: F(0) = F'(0) = 0.
class PowerSum {
 public:
  explicit PowerSum(std::vector<PowerTerm> terms);

  static PowerSum single(double exponent, double coeff = 1.0) {
    return PowerSum({{coeff, exponent}});
  }

  double value(double r) const;
  double derivative(double r) const;         // even in r
  double second_derivative(double r) const;  // r != 0

  /// Inverse of F restricted to [0, inf). Requires v >= 0.
  double inverse(double v) const;

  /// Legendre transform F*(z) = sup_{r>=0} (r z - F(r)), z >= 0.
  double legendre(double z) const;
  /// Maximizer r* = (F')^{-1}(z) of the Legendre supremum.
  double legendre_argmax(double z) const;
  /// Inverse of z -> F*(z) on [0, inf).
  double legendre_inverse(double w) const;

  double m0() const { return m0_; }  // smallest exponent
  double m1() const { return m1_; }  // largest exponent
  double mu0() const { return (m0_ - 1.0) / m0_; }
  double mu1() const { return (m1_ - 1.0) / m1_; }

  const std::vector<PowerTerm>& terms() const { return terms_; }

 private:
  std::vector<PowerTerm> terms_;
  double m0_ = 0.0;
  double m1_ = 0.0;
};

/// Nonlinearity seen by the implicit stepper: F itself, or the shifted
/// H_delta(v) = F(v + delta) - F(delta) used by the approximate problems.
struct SteppedNonlinearity {
  const PowerSum* base;
  double shift = 0.0;

  double value(double v) const {
    if (shift == 0.0) return base->value(v);
    return base->value(v + shift) - base->value(shift);
  }
  double derivative(double v) const { return base->derivative(v + shift); }
};

struct EnvelopeReport {
  double m0 = 0.0, m1 = 0.0;
  double worst_upper = 0.0;  // max of F(r)/F(r0) / (r/r0)^{m1} - 1 over r >= r0
  double worst_lower = 0.0;  // max of 1 - F(r)/F(r0) / (r/r0)^{m0} over r >= r0
  bool pass = false;
};

struct N2Report {
  double min_ratio = 0.0;  // min over grid of F F'' / (F')^2
  double max_ratio = 0.0;
  double mu0 = 0.0, mu1 = 0.0;
  bool within_band = false;  // min >= mu0 - tol and max <= mu1 + tol
};

/// Exponent envelope (m0, m1) with a numerical audit of the two-sided power
/// bounds on a log-spaced grid of (r, r0) pairs.
EnvelopeReport envelope_audit(const PowerSum& F, const std::vector<double>& grid);

/// Samples F F'' / (F')^2 on a positive grid. For a single power the ratio is
/// identically (m-1)/m; for genuine sums it can leave [mu0, mu1] near the
/// exponent crossover, and the report says so.
N2Report check_n2(const PowerSum& F, const std::vector<double>& grid);

/// Smallest C with F(ab) <= C F(a) F(b) over a log grid of pairs.
double product_bound_constant(const PowerSum& F, const std::vector<double>& grid);

std::vector<double> log_grid(double lo, double hi, int count);

class NonlinearityError : public std::runtime_error {
 public:
  explicit NonlinearityError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace fpm
