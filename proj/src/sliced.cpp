#include "slicedmi/sliced.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "slicedmi/errors.hpp"
#include "slicedmi/haar.hpp"
#include "slicedmi/parallel.hpp"
#include "slicedmi/stats.hpp"

namespace slicedmi {

double SliceEstimate::std_error() const {
  return n_slices > 0 ? slice_std / std::sqrt(static_cast<double>(n_slices)) : 0.0;
}

SliceEstimate estimate_smi_mc(const Eigen::Ref<const Eigen::MatrixXd>& x,
                              const Eigen::Ref<const Eigen::MatrixXd>& y, Eigen::Index k,
                              Eigen::Index n_slices, const KsgConfig& cfg, MasterSeed seed,
                              int threads) {
  if (k < 1 || k > x.cols() || k > y.cols()) {
    throw DomainError("estimate_smi_mc: slice dimension " + std::to_string(k) +
                      " exceeds min(d_x, d_y) = " + std::to_string(std::min(x.cols(), y.cols())));
  }
  if (n_slices < 1) throw DomainError("estimate_smi_mc: n_slices must be >= 1");
  if (x.rows() != y.rows()) throw DomainError("estimate_smi_mc: x and y row counts differ");

  SliceEstimate est;
  est.k = k;
  est.n_slices = n_slices;
  est.seed = seed;
  est.per_slice_values.assign(static_cast<std::size_t>(n_slices), 0.0);
  KsgConfig slice_cfg = cfg;
  slice_cfg.threads = 1;
  parallel_for(static_cast<std::size_t>(n_slices), threads, [&](std::size_t j) {
    Rng rng = seed.child(j).rng();
    const Projector theta = sample_stiefel(x.cols(), k, rng);
    const Projector phi = sample_stiefel(y.cols(), k, rng);
    est.per_slice_values[j] = estimate_mi_ksg(theta.project(x), phi.project(y), slice_cfg);
  });
  est.mean = mean(est.per_slice_values);
  est.slice_std = sample_std(est.per_slice_values);
  return est;
}

SliceEstimate estimate_smi_mc(const PairedDataset& dataset, Eigen::Index k, Eigen::Index n_slices,
                              const KsgConfig& cfg, MasterSeed seed, int threads) {
  KsgConfig c = cfg;
  c.jitter_seed = dataset.seed.value;
  return estimate_smi_mc(dataset.x, dataset.y, k, n_slices, c, seed, threads);
}

namespace {

void check_rho(double rho) {
  if (!(std::abs(rho) < 1.0)) throw DomainError("|rho| must be < 1, got " + std::to_string(rho));
}

void check_dim(Eigen::Index d) {
  if (d < 1) throw DomainError("dimension must be >= 1");
}

}  // namespace

double analytic_si_series(Eigen::Index d, double rho, const SeriesControl& ctrl) {
  check_dim(d);
  check_rho(rho);
  const double z = rho * rho;
  const double dd = static_cast<double>(d);
  return z / (2.0 * dd) * hyp3f2_ones(z, dd, ctrl);
}

double analytic_si_quadrature(Eigen::Index d, double rho) {
  check_dim(d);
  check_rho(rho);
  // In one dimension every slice is a sign flip and SI equals MI.
  if (d == 1) return -0.5 * std::log1p(-rho * rho);
  const double z = rho * rho;
  if (z == 0.0) return 0.0;
  const double power = static_cast<double>(d) - 2.0;
  auto integrand = [&](double t) {
    const double s = std::sin(t);
    return std::log1p(-z * s * s) * std::pow(std::cos(t), power);
  };
  // With x = sin^2 t: x^{-1/2} (1 - x)^{(d-3)/2} dx = 2 cos^{d-2} t dt.
  const QuadratureResult q = integrate_adaptive(integrand, 0.0, 0.5 * std::numbers::pi, 1e-15, 1e-13);
  const double log_b = log_beta(0.5, 0.5 * (static_cast<double>(d) - 1.0));
  return -std::exp(-log_b) * q.value;
}

AnalyticSi analytic_si_gaussian_detail(Eigen::Index d, double rho) {
  check_dim(d);
  check_rho(rho);
  try {
    return {analytic_si_series(d, rho), SiPath::series};
  } catch (const ConvergenceError&) {
    return {analytic_si_quadrature(d, rho), SiPath::quadrature};
  }
}

double analytic_si_gaussian(Eigen::Index d, double rho) {
  return analytic_si_gaussian_detail(d, rho).value;
}

double si_saturation_limit(Eigen::Index d) {
  if (d < 2) throw DomainError("si_saturation_limit: d must be >= 2 (SI diverges for d = 1)");
  const double dm1 = static_cast<double>(d) - 1.0;
  return digamma(dm1) - digamma(0.5 * dm1) - std::numbers::ln2;
}

MonteCarloValue analytic_ksmi_gaussian(Eigen::Index d, Eigen::Index k, double rho,
                                       Eigen::Index n_mc, MasterSeed seed) {
  check_rho(rho);
  if (k < 1 || 2 * k > d) {
    throw DomainError("analytic_ksmi_gaussian: need 1 <= k and 2k <= d");
  }
  if (n_mc < 2) throw DomainError("analytic_ksmi_gaussian: n_mc must be >= 2");
  Rng rng = seed.rng();
  const Eigen::MatrixXd lambda = jacobi_eigs_empirical(d, k, n_mc, rng);
  const double z = rho * rho;
  std::vector<double> values(static_cast<std::size_t>(n_mc));
  for (Eigen::Index i = 0; i < n_mc; ++i) {
    double v = 0.0;
    for (Eigen::Index j = 0; j < k; ++j) v -= 0.5 * std::log1p(-z * lambda(i, j));
    values[static_cast<std::size_t>(i)] = v;
  }
  return {mean(values), sample_std(values) / std::sqrt(static_cast<double>(n_mc))};
}

double msmi_gaussian(const GaussianSpec& spec, Eigen::Index k) {
  const Eigen::VectorXd rho = canonical_correlations(spec);
  if (k < 1 || k > rho.size()) {
    throw DomainError("msmi_gaussian: need 1 <= k <= min(d_x, d_y)");
  }
  double mi = 0.0;
  for (Eigen::Index i = 0; i < k; ++i) {
    if (rho(i) >= 1.0 - 1e-12) return std::numeric_limits<double>::infinity();
    mi -= 0.5 * std::log1p(-rho(i) * rho(i));
  }
  return mi;
}

GaussianSpec sample_gaussian_spec(const PairedDataset& dataset) {
  const Eigen::Index dx = dataset.x.cols();
  const Eigen::Index dy = dataset.y.cols();
  Eigen::MatrixXd joint(dataset.size(), dx + dy);
  joint << dataset.x, dataset.y;
  const Eigen::MatrixXd cov = sample_covariance(joint);
  return {cov.topLeftCorner(dx, dx), cov.bottomRightCorner(dy, dy), cov.topRightCorner(dx, dy)};
}

double msmi_plugin(const PairedDataset& dataset, Eigen::Index k) {
  return msmi_gaussian(sample_gaussian_spec(dataset), k);
}

}  // namespace slicedmi
