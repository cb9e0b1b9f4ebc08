#include "fpmlab/nonlinearity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fpm {

namespace {

constexpr double kInverseRtol = 1e-12;
constexpr double kInverseAtol = 1e-300;

// Monotone scalar solve: find r >= 0 with g(r) = target, g increasing,
// g(0) = 0. Multiplicative bracket, bisection, Newton polish.
template <typename G, typename Gp>
double solve_increasing(G g, Gp gp, double target) {
  if (target <= 0.0) return 0.0;
  double hi = 1.0;
  for (int i = 0; i < 1080 && g(hi) < target; ++i) hi *= 2.0;
  double lo = 0.5 * hi;
  while (lo > 1e-320 && g(lo) >= target) lo *= 0.5;
  for (int i = 0; i < 110; ++i) {
    double mid = 0.5 * (lo + hi);
    if (g(mid) < target)
      lo = mid;
    else
      hi = mid;
  }
  double r = 0.5 * (lo + hi);
  for (int i = 0; i < 8; ++i) {
    double gr = g(r) - target;
    if (std::abs(gr) <= kInverseRtol * std::max(target, kInverseAtol)) break;
    double d = gp(r);
    if (!(d > 0.0)) break;
    double next = r - gr / d;
    if (!(next > 0.0) || !std::isfinite(next)) break;
    r = next;
  }
  return r;
}

}  // namespace

PowerSum::PowerSum(std::vector<PowerTerm> terms) : terms_(std::move(terms)) {
  if (terms_.empty()) throw NonlinearityError("nonlinearity needs at least one term");
  m0_ = std::numeric_limits<double>::infinity();
  m1_ = 0.0;
  for (const auto& t : terms_) {
    if (!(t.coeff > 0.0)) throw NonlinearityError("term coefficient must be positive");
    if (!(t.exponent > 1.0)) throw NonlinearityError("term exponent must exceed 1");
    m0_ = std::min(m0_, t.exponent);
    m1_ = std::max(m1_, t.exponent);
  }
}

double PowerSum::value(double r) const {
  if (r == 0.0) return 0.0;
  const double a = std::abs(r);
  double s = 0.0;
  for (const auto& t : terms_) s += t.coeff * std::pow(a, t.exponent);
  return r > 0.0 ? s : -s;
}

double PowerSum::derivative(double r) const {
  const double a = std::abs(r);
  if (a == 0.0) return 0.0;
  double s = 0.0;
  for (const auto& t : terms_) s += t.coeff * t.exponent * std::pow(a, t.exponent - 1.0);
  return s;
}

double PowerSum::second_derivative(double r) const {
  const double a = std::abs(r);
  if (a == 0.0) return 0.0;
  double s = 0.0;
  for (const auto& t : terms_)
    s += t.coeff * t.exponent * (t.exponent - 1.0) * std::pow(a, t.exponent - 2.0);
  return r >= 0.0 ? s : -s;
}

double PowerSum::inverse(double v) const {
  if (v < 0.0) throw NonlinearityError("inverse needs a nonnegative argument");
  return solve_increasing([this](double r) { return value(r); },
                          [this](double r) { return derivative(r); }, v);
}

double PowerSum::legendre_argmax(double z) const {
  if (z < 0.0) throw NonlinearityError("legendre needs a nonnegative argument");
  return solve_increasing([this](double r) { return derivative(r); },
                          [this](double r) { return second_derivative(r); }, z);
}

double PowerSum::legendre(double z) const {
  if (z == 0.0) return 0.0;
  const double r = legendre_argmax(z);
  return z * r - value(r);
}

double PowerSum::legendre_inverse(double w) const {
  if (w < 0.0) throw NonlinearityError("legendre_inverse needs a nonnegative argument");
  // F*(F'(r)) = r F'(r) - F(r) is increasing in r; solve for r, return F'(r).
  auto g = [this](double r) { return r * derivative(r) - value(r); };
  auto gp = [this](double r) { return r * second_derivative(r); };
  return derivative(solve_increasing(g, gp, w));
}

std::vector<double> log_grid(double lo, double hi, int count) {
  std::vector<double> g(count);
  const double llo = std::log(lo), lhi = std::log(hi);
  for (int i = 0; i < count; ++i)
    g[i] = std::exp(llo + (lhi - llo) * i / double(count - 1));
  return g;
}

EnvelopeReport envelope_audit(const PowerSum& F, const std::vector<double>& grid) {
  EnvelopeReport rep;
  rep.m0 = F.m0();
  rep.m1 = F.m1();
  for (double r0 : grid) {
    const double f0 = F.value(r0);
    for (double r : grid) {
      if (r < r0) continue;
      const double q = F.value(r) / f0;
      const double up = std::pow(r / r0, rep.m1);
      const double lo = std::pow(r / r0, rep.m0);
      rep.worst_upper = std::max(rep.worst_upper, q / up - 1.0);
      rep.worst_lower = std::max(rep.worst_lower, 1.0 - q / lo);
    }
  }
  rep.pass = rep.worst_upper <= 1e-9 && rep.worst_lower <= 1e-9;
  return rep;
}

N2Report check_n2(const PowerSum& F, const std::vector<double>& grid) {
  if (grid.empty()) throw NonlinearityError("check_n2 needs a non-empty grid");
  N2Report rep;
  rep.mu0 = F.mu0();
  rep.mu1 = F.mu1();
  rep.min_ratio = std::numeric_limits<double>::infinity();
  rep.max_ratio = -std::numeric_limits<double>::infinity();
  for (double r : grid) {
    if (!(r > 0.0)) throw NonlinearityError("check_n2 grid must be strictly positive");
    const double fp = F.derivative(r);
    const double ratio = F.value(r) * F.second_derivative(r) / (fp * fp);
    rep.min_ratio = std::min(rep.min_ratio, ratio);
    rep.max_ratio = std::max(rep.max_ratio, ratio);
  }
  rep.within_band = rep.min_ratio >= rep.mu0 - 1e-12 && rep.max_ratio <= rep.mu1 + 1e-12;
  return rep;
}

double product_bound_constant(const PowerSum& F, const std::vector<double>& grid) {
  double c = 0.0;
  for (double a : grid)
    for (double b : grid)
      c = std::max(c, F.value(a * b) / (F.value(a) * F.value(b)));
  return c;
}

}  // namespace fpm
