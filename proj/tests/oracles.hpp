// Independent numerical oracles used to freeze expected values in tests.
// Nothing here calls into the library's own special-function or quadrature
// code.
#pragma once

#include <cmath>
#include <functional>
#include <numbers>

namespace oracle {

/// Tanh-sinh (double exponential) quadrature on (0, 1). Tolerates
/// integrable endpoint singularities; f is never evaluated at 0 or 1.
inline double tanh_sinh_01(const std::function<double(double)>& f, double h = 1.0 / 64.0,
                           double t_max = 6.0) {
  const double half_pi = 0.5 * std::numbers::pi;
  double sum = 0.0;
  for (double t = -t_max; t <= t_max + 0.5 * h; t += h) {
    const double u = half_pi * std::sinh(t);
    const double ch = std::cosh(u);
    // x = (1 + tanh u) / 2 written to keep precision near both ends.
    const double e = std::exp(-2.0 * std::abs(u));
    const double small = e / (1.0 + e);  // distance to the nearer endpoint
    const double x = u < 0.0 ? small : 1.0 - small;
    if (small <= 0.0) continue;
    const double w = half_pi * std::cosh(t) / (2.0 * ch * ch);
    sum += w * f(x);
  }
  return sum * h;
}

/// Composite Simpson rule on [a, b] with n (even) panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

}  // namespace oracle
