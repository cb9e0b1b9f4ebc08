#pragma once

#include <algorithm>
#include <stdexcept>
#include <string>

namespace fpm {

/// Uniform grid of interior points on (a, b); homogeneous Dirichlet data is
/// encoded by omitting the endpoints.
struct Grid {
  double a = 0.0;
  double b = 1.0;
  int n = 0;

  void validate() const {
    if (!(b > a)) throw std::invalid_argument("grid needs b > a");
    if (n < 8) throw std::invalid_argument("grid needs at least 8 interior points");
  }

  double length() const { return b - a; }
  double h() const { return (b - a) / (n + 1); }
  double point(int i) const { return a + h() * (i + 1); }
  double boundary_distance(int i) const {
    const double x = point(i);
    return std::min(x - a, b - x);
  }
};

}  // namespace fpm
