#include "slicedmi/specfun.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace slicedmi {

namespace {

void require_positive(double x, const char* what) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw DomainError(std::string(what) + ": argument must be positive and finite, got " +
                      std::to_string(x));
  }
}

// Stirling series for ln Gamma(x), x >= 10. Truncation error < 1e-16.
double log_gamma_stirling(double x) {
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  const double series =
      inv * (1.0 / 12.0 +
             inv2 * (-1.0 / 360.0 +
                     inv2 * (1.0 / 1260.0 +
                             inv2 * (-1.0 / 1680.0 +
                                     inv2 * (1.0 / 1188.0 +
                                             inv2 * (-691.0 / 360360.0 + inv2 / 156.0))))));
  return (x - 0.5) * std::log(x) - x + 0.5 * std::log(2.0 * std::numbers::pi) + series;
}

}  // namespace

double log_gamma(double x) {
  require_positive(x, "log_gamma");
  if (x >= 10.0) return log_gamma_stirling(x);
  // Shift up with Gamma(x + n) = Gamma(x) * x (x + 1) ... (x + n - 1).
  double product = 1.0;
  while (x < 10.0) {
    product *= x;
    x += 1.0;
  }
  return log_gamma_stirling(x) - std::log(product);
}

double digamma(double x) {
  require_positive(x, "digamma");
  double shift = 0.0;
  while (x < 6.0) {
    shift -= 1.0 / x;
    x += 1.0;
  }
  // Asymptotic expansion with Bernoulli numbers B_2 .. B_14.
  const double inv2 = 1.0 / (x * x);
  const double tail =
      inv2 * (1.0 / 12.0 -
              inv2 * (1.0 / 120.0 -
                      inv2 * (1.0 / 252.0 -
                              inv2 * (1.0 / 240.0 -
                                      inv2 * (1.0 / 132.0 -
                                              inv2 * (691.0 / 32760.0 - inv2 / 12.0))))));
  return shift + std::log(x) - 0.5 / x - tail;
}

double log_beta(double a, double b) {
  require_positive(a, "log_beta");
  require_positive(b, "log_beta");
  return log_gamma(a) + log_gamma(b) - log_gamma(a + b);
}

double hyp3f2_ones(double z, double d, const SeriesControl& ctrl) {
  if (!(z >= 0.0) || !(z < 1.0)) {
    throw DomainError("hyp3f2_ones: z must lie in [0, 1), got " + std::to_string(z));
  }
  require_positive(d, "hyp3f2_ones");
  if (!(ctrl.rel_tol > 0.0) || ctrl.max_terms < 1) {
    throw DomainError("hyp3f2_ones: invalid series control");
  }
  const double lower = 0.5 * d + 1.0;
  // Every ratio t_{n+1} / t_n is bounded by z, so the remainder after the
  // current term is at most next / (1 - z).
  const double tail_factor = 1.0 / (1.0 - z);
  double term = 1.0;
  double sum = 1.0;
  for (std::size_t n = 0; n < ctrl.max_terms; ++n) {
    const double m = static_cast<double>(n);
    term *= (m + 1.0) * (m + 1.5) / ((m + lower) * (m + 2.0)) * z;
    if (term * tail_factor <= ctrl.rel_tol * sum) return sum + term;
    sum += term;
  }
  throw ConvergenceError("hyp3f2_ones: series did not converge within " +
                         std::to_string(ctrl.max_terms) + " terms at z = " + std::to_string(z));
}

double beta_pdf(double x, double a, double b) {
  require_positive(a, "beta_pdf");
  require_positive(b, "beta_pdf");
  if (!(x > 0.0) || !(x < 1.0)) {
    throw DomainError("beta_pdf: x must lie in (0, 1)");
  }
  return std::exp((a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) - log_beta(a, b));
}

namespace {

// Continued fraction for the incomplete beta function (modified Lentz).
double incomplete_beta_cf(double x, double a, double b) {
  constexpr double kTiny = 1e-300;
  constexpr double kEps = 1e-16;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 10000; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return h;
  }
  throw ConvergenceError("beta_cdf: continued fraction did not converge");
}

}  // namespace

double beta_cdf(double x, double a, double b) {
  require_positive(a, "beta_cdf");
  require_positive(b, "beta_cdf");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double log_front = a * std::log(x) + b * std::log1p(-x) - log_beta(a, b);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return std::exp(log_front) * incomplete_beta_cf(x, a, b) / a;
  }
  return 1.0 - std::exp(log_front) * incomplete_beta_cf(1.0 - x, b, a) / b;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double log_gamma_sample(double shape, Rng& rng) {
  require_positive(shape, "gamma_sample");
  if (shape < 1.0) {
    // Gamma(a) = Gamma(a + 1) * U^(1/a).
    return log_gamma_sample(shape + 1.0, rng) + std::log(rng.uniform_open()) / shape;
  }
  // Marsaglia-Tsang squeeze/rejection.
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x = 0.0;
    double v = 0.0;
    do {
      x = rng.normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform_open();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2 ||
        std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) {
      return std::log(d) + std::log(v);
    }
  }
}

double gamma_sample(double shape, Rng& rng) { return std::exp(log_gamma_sample(shape, rng)); }

double beta_sample(double a, double b, Rng& rng) {
  const double la = log_gamma_sample(a, rng);
  const double lb = log_gamma_sample(b, rng);
  // Ga / (Ga + Gb) evaluated on the log scale.
  return 1.0 / (1.0 + std::exp(lb - la));
}

}  // namespace slicedmi

namespace slicedmi {

GaussLegendreRule gauss_legendre(int n) {
  if (n < 1) throw DomainError("gauss_legendre: need at least one node");
  GaussLegendreRule rule;
  rule.nodes.resize(static_cast<std::size_t>(n));
  rule.weights.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      const double pn = n == 1 ? x : p1;
      const double pn1 = n == 1 ? 1.0 : p0;
      dp = n * (x * pn - pn1) / (x * x - 1.0);
      const double step = pn / dp;
      x -= step;
      if (std::abs(step) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[static_cast<std::size_t>(i)] = -x;
    rule.nodes[static_cast<std::size_t>(n - 1 - i)] = x;
    rule.weights[static_cast<std::size_t>(i)] = w;
    rule.weights[static_cast<std::size_t>(n - 1 - i)] = w;
  }
  return rule;
}

}  // namespace slicedmi
