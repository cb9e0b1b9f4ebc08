#pragma once

#include <span>
#include <stdexcept>
#include <vector>

namespace fpm {

struct FitResult {
  double exponent = 0.0;
  double std_error = 0.0;
  double r2 = 0.0;
  int points = 0;
  double window_lo = 0.0;  // range actually used (abscissa units)
  double window_hi = 0.0;
};

/// Ordinary least squares slope of log(y) against log(x).
FitResult loglog_fit(std::span<const double> x, std::span<const double> y);

struct PowerLaw2Fit {
  double alpha = 0.0;  // exponent of the first regressor
  double beta = 0.0;   // exponent of the second regressor
  double log_c = 0.0;
  double r2 = 0.0;
  int points = 0;
};

/// Two-variable log-log least squares: log y ~ log c + alpha log x1 + beta log x2.
PowerLaw2Fit power_law_fit2(std::span<const double> x1, std::span<const double> x2,
                            std::span<const double> y);

class FitError : public std::runtime_error {
 public:
  explicit FitError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace fpm
