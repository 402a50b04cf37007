#pragma once

#include <cmath>
#include <algorithm>
#include <cstddef>
#include <queue>
#include <vector>

#include "slicedmi/errors.hpp"
#include "slicedmi/random.hpp"

namespace slicedmi {

/// Truncation control for power series.
struct SeriesControl {
  double rel_tol = 1e-12;
  std::size_t max_terms = 100000;
};

/// ln Gamma(x) for x > 0.
double log_gamma(double x);

/// psi(x) = d/dx ln Gamma(x) for x > 0.
double digamma(double x);

double log_beta(double a, double b);

/// 3F2(1, 1, 3/2; d/2 + 1, 2; z) for 0 <= z < 1.
///
/// Sums the power series until the estimated remainder (last term times the
/// geometric bound r / (1 - r) on the ratio of successive terms) falls below
/// rel_tol times the partial sum. Throws ConvergenceError when max_terms is
/// exhausted first; a partial sum is never returned.
double hyp3f2_ones(double z, double d, const SeriesControl& ctrl = {});

double beta_pdf(double x, double a, double b);

/// Regularized incomplete beta function I_x(a, b), i.e. the Beta(a, b) CDF.
double beta_cdf(double x, double a, double b);

double normal_cdf(double x);

/// Gamma(shape, 1) variate returned on the log scale, so that very small
/// shapes do not underflow to zero.
double log_gamma_sample(double shape, Rng& rng);

double gamma_sample(double shape, Rng& rng);

double beta_sample(double a, double b, Rng& rng);

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
};

namespace detail {

// Gauss-Kronrod 7/15 nodes and weights on [-1, 1].
inline constexpr double kKronrodNodes[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr double kKronrodWeights[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double kGaussWeights[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class F>
QuadratureResult gauss_kronrod15(F& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double kronrod = fc * kKronrodWeights[7];
  double gauss = fc * kGaussWeights[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kKronrodNodes[j];
    const double pair = f(center - dx) + f(center + dx);
    kronrod += kKronrodWeights[j] * pair;
    if (j % 2 == 1) gauss += kGaussWeights[j / 2] * pair;
  }
  return {kronrod * half, std::abs((kronrod - gauss) * half)};
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod (7/15) quadrature of f over [a, b]: the
/// panel with the largest error estimate is bisected until the summed
/// estimate is within max(abs_tol, rel_tol * |value|). Throws
/// ConvergenceError when max_panels is reached first.
template <class F>
QuadratureResult integrate_adaptive(F&& f, double a, double b,
                                    double abs_tol = 1e-12,
                                    double rel_tol = 1e-12,
                                    std::size_t max_panels = 4000) {
  struct Panel {
    double lo, hi;
    QuadratureResult q;
    bool operator<(const Panel& o) const { return q.error < o.q.error; }
  };
  std::priority_queue<Panel> panels;
  QuadratureResult total = detail::gauss_kronrod15(f, a, b);
  panels.push({a, b, total});
  while (total.error > std::max(abs_tol, rel_tol * std::abs(total.value))) {
    if (panels.size() >= max_panels) {
      throw ConvergenceError("adaptive quadrature did not reach tolerance");
    }
    const Panel worst = panels.top();
    panels.pop();
    const double mid = 0.5 * (worst.lo + worst.hi);
    const Panel left{worst.lo, mid, detail::gauss_kronrod15(f, worst.lo, mid)};
    const Panel right{mid, worst.hi, detail::gauss_kronrod15(f, mid, worst.hi)};
    total.value += left.q.value + right.q.value - worst.q.value;
    total.error += left.q.error + right.q.error - worst.q.error;
    panels.push(left);
    panels.push(right);
  }
  // Re-sum from the panels to shed the drift of the running updates.
  QuadratureResult out;
  while (!panels.empty()) {
    out.value += panels.top().q.value;
    out.error += panels.top().q.error;
    panels.pop();
  }
  return out;
}

}  // namespace slicedmi

namespace slicedmi {

struct GaussLegendreRule {
  std::vector<double> nodes;    // on [-1, 1], ascending
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule by Newton iteration on P_n.
GaussLegendreRule gauss_legendre(int n);

}  // namespace slicedmi
