#include "fpmlab/fitting.hpp"

#include <cmath>
#include <Eigen/Dense>

namespace fpm {

FitResult loglog_fit(std::span<const double> x, std::span<const double> y) {
  const int n = static_cast<int>(x.size());
  if (n < 2 || y.size() != x.size()) throw FitError("loglog_fit needs >= 2 matched points");
  double mx = 0, my = 0;
  std::vector<double> lx(n), ly(n);
  for (int i = 0; i < n; ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw FitError("loglog_fit needs positive data");
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (sxx == 0.0) throw FitError("loglog_fit needs distinct abscissae");
  FitResult fit;
  fit.exponent = sxy / sxx;
  fit.points = n;
  double ss_res = 0, ss_tot = 0;
  for (int i = 0; i < n; ++i) {
    const double pred = my + fit.exponent * (lx[i] - mx);
    ss_res += (ly[i] - pred) * (ly[i] - pred);
    ss_tot += (ly[i] - my) * (ly[i] - my);
  }
  fit.std_error = std::sqrt(ss_res / std::max(n - 2, 1) / sxx);
  fit.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  double lo = x[0], hi = x[0];
  for (int i = 1; i < n; ++i) {
    lo = std::min(lo, x[i]);
    hi = std::max(hi, x[i]);
  }
  fit.window_lo = lo;
  fit.window_hi = hi;
  return fit;
}

PowerLaw2Fit power_law_fit2(std::span<const double> x1, std::span<const double> x2,
                            std::span<const double> y) {
  const int n = static_cast<int>(y.size());
  if (n < 4 || x1.size() != y.size() || x2.size() != y.size())
    throw FitError("power_law_fit2 needs >= 4 matched points");
  Eigen::MatrixXd X(n, 3);
  Eigen::VectorXd ly(n);
  for (int i = 0; i < n; ++i) {
    if (!(x1[i] > 0.0) || !(x2[i] > 0.0) || !(y[i] > 0.0))
      throw FitError("power_law_fit2 needs positive data");
    X(i, 0) = 1.0;
    X(i, 1) = std::log(x1[i]);
    X(i, 2) = std::log(x2[i]);
    ly(i) = std::log(y[i]);
  }
  Eigen::Vector3d coef = (X.transpose() * X).ldlt().solve(X.transpose() * ly);
  PowerLaw2Fit fit;
  fit.log_c = coef(0);
  fit.alpha = coef(1);
  fit.beta = coef(2);
  fit.points = n;
  const Eigen::VectorXd resid = ly - X * coef;
  const double my = ly.mean();
  double ss_tot = (ly.array() - my).square().sum();
  fit.r2 = ss_tot > 0.0 ? 1.0 - resid.squaredNorm() / ss_tot : 1.0;
  return fit;
}

}  // namespace fpm
