#include "slicedmi/distributions.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "slicedmi/errors.hpp"
#include "slicedmi/specfun.hpp"

namespace slicedmi {

std::string_view to_string(Family family) {
  switch (family) {
    case Family::correlated_normal: return "correlated_normal";
    case Family::correlated_uniform: return "correlated_uniform";
    case Family::smoothed_uniform: return "smoothed_uniform";
    case Family::log_gamma_exponential: return "log_gamma_exponential";
    case Family::rank_one_normal: return "rank_one_normal";
  }
  throw UnsupportedError("unknown distribution family");
}

std::string_view to_string(Allocation allocation) {
  return allocation == Allocation::equal ? "equal" : "simplex_random";
}

Family parse_family(std::string_view name) {
  for (Family f : {Family::correlated_normal, Family::correlated_uniform, Family::smoothed_uniform,
                   Family::log_gamma_exponential, Family::rank_one_normal}) {
    if (name == to_string(f)) return f;
  }
  throw UnsupportedError("unsupported distribution family '" + std::string(name) + "'");
}

Allocation parse_allocation(std::string_view name) {
  if (name == "equal") return Allocation::equal;
  if (name == "simplex_random") return Allocation::simplex_random;
  throw ConfigError("unknown allocation '" + std::string(name) + "'");
}

void DistributionSpec::validate() const {
  if (d < 1) throw DomainError("DistributionSpec: d must be >= 1");
  const Eigen::Index expected = family == Family::rank_one_normal ? 1 : d;
  if (per_component_mi.size() != expected) {
    throw DomainError("DistributionSpec: per_component_mi has " +
                      std::to_string(per_component_mi.size()) + " entries, expected " +
                      std::to_string(expected));
  }
  if (!per_component_mi.allFinite() || (per_component_mi.array() < 0.0).any()) {
    throw DomainError("DistributionSpec: per-component MI must be finite and >= 0");
  }
  if (allocation == Allocation::equal &&
      (per_component_mi.array() != per_component_mi(0)).any()) {
    throw DomainError("DistributionSpec: equal allocation with unequal components");
  }
}

DistributionSpec DistributionSpec::equal(Family family, Eigen::Index d, double total_mi) {
  DistributionSpec spec;
  spec.family = family;
  spec.d = d;
  if (family == Family::rank_one_normal) {
    spec.per_component_mi = Eigen::VectorXd::Constant(1, total_mi);
  } else {
    spec.per_component_mi = Eigen::VectorXd::Constant(d, total_mi / static_cast<double>(d));
  }
  spec.allocation = Allocation::equal;
  return spec;
}

GaussianSpec GaussianSpec::isotropic(Eigen::Index d, double rho) {
  if (!(std::abs(rho) < 1.0)) throw DomainError("GaussianSpec: |rho| must be < 1");
  if (d < 1) throw DomainError("GaussianSpec: d must be >= 1");
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(d, d);
  return {eye, eye, rho * eye};
}

double ground_truth_mi(const DistributionSpec& spec) {
  spec.validate();
  // Components are independent, so MI adds up. Every family is parameterised
  // directly by its per-component MI.
  return spec.per_component_mi.sum();
}

double mi_to_rho(double mi) {
  if (!(mi >= 0.0)) throw DomainError("mi_to_rho: MI must be >= 0");
  return std::sqrt(-std::expm1(-2.0 * mi));
}

double rho_to_mi(double rho) {
  if (!(std::abs(rho) < 1.0)) throw DomainError("rho_to_mi: |rho| must be < 1");
  return -0.5 * std::log1p(-rho * rho);
}

double smoothed_uniform_width(double mi) {
  if (!(mi >= 0.5) || !std::isfinite(mi)) {
    throw DomainError("smoothed_uniform: per-component MI must be >= 0.5 nats (a = 1), got " +
                      std::to_string(mi));
  }
  // a/2 - ln a is decreasing on (0, 1]; bisect on ln a.
  double lo = -800.0;
  double hi = 0.0;
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double value = 0.5 * std::exp(mid) - mid;
    (value > mi ? lo : hi) = mid;
  }
  return std::exp(0.5 * (lo + hi));
}

double log_gamma_exponential_mi(double shape) {
  if (!(shape > 0.0) || !std::isfinite(shape)) {
    throw DomainError("log_gamma_exponential: shape must be positive");
  }
  // psi(s) + 1/s = psi(s + 1) avoids cancellation for small shapes.
  if (shape < 1e3) return digamma(shape + 1.0) - std::log(shape);
  // Large shapes: expand psi(x) - ln x around x = s + 1 to keep relative accuracy.
  const double x = shape + 1.0;
  const double r = 1.0 / (x * x);
  return std::log1p(1.0 / shape) - 0.5 / x - r * (1.0 / 12 - r * (1.0 / 120 - r / 252));
}

double log_gamma_exponential_shape(double mi) {
  if (!(mi > 0.0) || !std::isfinite(mi)) {
    throw DomainError("log_gamma_exponential: MI must be positive for a dependent pair");
  }
  // MI is decreasing in the shape; bisect on ln(shape).
  double lo = -700.0;
  double hi = 40.0;
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    (log_gamma_exponential_mi(std::exp(mid)) > mi ? lo : hi) = mid;
  }
  return std::exp(0.5 * (lo + hi));
}

double log_gamma_exponential_mi_quadrature(double shape) {
  if (!(shape >= 0.05) || !(shape <= 50.0)) {
    throw DomainError("log_gamma_exponential_mi_quadrature: shape outside [0.05, 50]");
  }
  // Coordinates u = ln G, v = ln E. The joint density factors as
  // p(u) p(v | u) with v + u = ln Exp(1); p(v) is integrated numerically.
  const double log_norm = log_gamma(shape);
  auto log_pu = [&](double u) { return shape * u - std::exp(u) - log_norm; };
  auto log_pv_given_u = [](double v, double u) { return (v + u) - std::exp(v + u); };

  const double u_lo = (-38.0 + log_gamma(shape + 1.0)) / shape;
  const double u_hi = std::log(shape + 45.0 + 10.0 * std::sqrt(shape));
  const double v_lo = -38.0 - u_hi;
  const double v_hi = std::log(45.0) - u_lo;

  const GaussLegendreRule rule = gauss_legendre(10);
  auto grid = [&](double lo, double hi, double width) {
    const int panels = static_cast<int>(std::ceil((hi - lo) / width));
    const double h = (hi - lo) / panels;
    std::vector<double> nodes;
    std::vector<double> weights;
    for (int p = 0; p < panels; ++p) {
      const double c = lo + (p + 0.5) * h;
      for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        nodes.push_back(c + 0.5 * h * rule.nodes[i]);
        weights.push_back(0.5 * h * rule.weights[i]);
      }
    }
    return std::pair{nodes, weights};
  };
  const auto [us, wu] = grid(u_lo, u_hi, 0.5);
  const auto [vs, wv] = grid(v_lo, v_hi, 0.5);

  std::vector<double> pu(us.size());
  for (std::size_t i = 0; i < us.size(); ++i) pu[i] = std::exp(log_pu(us[i]));
  std::vector<double> pv(vs.size(), 0.0);
  for (std::size_t j = 0; j < vs.size(); ++j) {
    for (std::size_t i = 0; i < us.size(); ++i) {
      pv[j] += wu[i] * pu[i] * std::exp(log_pv_given_u(vs[j], us[i]));
    }
  }
  double mi = 0.0;
  for (std::size_t i = 0; i < us.size(); ++i) {
    double inner = 0.0;
    for (std::size_t j = 0; j < vs.size(); ++j) {
      const double lc = log_pv_given_u(vs[j], us[i]);
      const double pc = std::exp(lc);
      if (pc > 0.0 && pv[j] > 0.0) inner += wv[j] * pc * (lc - std::log(pv[j]));
    }
    mi += wu[i] * pu[i] * inner;
  }
  return mi;
}

Eigen::VectorXd canonical_correlations(const GaussianSpec& spec) {
  if (spec.sigma_xy.rows() != spec.sigma_x.rows() || spec.sigma_xy.cols() != spec.sigma_y.rows()) {
    throw DomainError("GaussianSpec: block shapes do not match");
  }
  const Eigen::MatrixXd k =
      inverse_sqrt_spd(spec.sigma_x) * spec.sigma_xy * inverse_sqrt_spd(spec.sigma_y);
  return Eigen::JacobiSVD<Eigen::MatrixXd>(k).singularValues();
}

double gaussian_mi(const GaussianSpec& spec) {
  const Eigen::VectorXd rho = canonical_correlations(spec);
  double mi = 0.0;
  for (double r : rho) {
    if (r >= 1.0 - 1e-12) return std::numeric_limits<double>::infinity();
    mi -= 0.5 * std::log1p(-r * r);
  }
  return mi;
}

Eigen::VectorXd allocate_component_mi(double total_mi, Eigen::Index d, Allocation mode, Rng& rng) {
  if (!(total_mi >= 0.0) || !std::isfinite(total_mi)) {
    throw DomainError("allocate_component_mi: total MI must be finite and >= 0");
  }
  if (d < 1) throw DomainError("allocate_component_mi: d must be >= 1");
  if (mode == Allocation::equal || total_mi == 0.0) {
    return Eigen::VectorXd::Constant(d, total_mi / static_cast<double>(d));
  }
  // Normalised exponential spacings are uniform on the simplex.
  Eigen::VectorXd w(d);
  for (Eigen::Index i = 0; i < d; ++i) w(i) = rng.exponential();
  return total_mi * w / w.sum();
}

namespace {

PairedDataset make_dataset(const DistributionSpec& spec, Eigen::Index n, MasterSeed seed,
                           Eigen::Index dx, Eigen::Index dy) {
  if (n < 1) throw DomainError("sample: n must be >= 1");
  spec.validate();
  return PairedDataset{Eigen::MatrixXd(n, dx), Eigen::MatrixXd(n, dy), spec, seed};
}

void fill_correlated_normal(PairedDataset& ds, const Eigen::VectorXd& mi, Rng& rng) {
  Eigen::VectorXd rho(mi.size());
  Eigen::VectorXd noise(mi.size());
  for (Eigen::Index j = 0; j < mi.size(); ++j) {
    rho(j) = mi_to_rho(mi(j));
    noise(j) = std::sqrt(std::exp(-2.0 * mi(j)));  // sqrt(1 - rho^2)
  }
  for (Eigen::Index i = 0; i < ds.x.rows(); ++i) {
    for (Eigen::Index j = 0; j < mi.size(); ++j) {
      const double a = rng.normal();
      const double b = rng.normal();
      ds.x(i, j) = a;
      ds.y(i, j) = rho(j) * a + noise(j) * b;
    }
  }
}

}  // namespace

PairedDataset sample_correlated_normal(const DistributionSpec& spec, Eigen::Index n,
                                       MasterSeed seed) {
  PairedDataset ds = make_dataset(spec, n, seed, spec.d, spec.d);
  Rng rng = seed.rng();
  fill_correlated_normal(ds, spec.per_component_mi, rng);
  return ds;
}

PairedDataset sample_correlated_uniform(const DistributionSpec& spec, Eigen::Index n,
                                        MasterSeed seed) {
  PairedDataset ds = sample_correlated_normal(spec, n, seed);
  ds.x = ds.x.unaryExpr([](double v) { return normal_cdf(v); });
  ds.y = ds.y.unaryExpr([](double v) { return normal_cdf(v); });
  return ds;
}

PairedDataset sample_smoothed_uniform(const DistributionSpec& spec, Eigen::Index n,
                                      MasterSeed seed) {
  PairedDataset ds = make_dataset(spec, n, seed, spec.d, spec.d);
  Eigen::VectorXd width(spec.d);
  for (Eigen::Index j = 0; j < spec.d; ++j) {
    const double mi = spec.per_component_mi(j);
    width(j) = mi == 0.0 ? 0.0 : smoothed_uniform_width(mi);
  }
  Rng rng = seed.rng();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < spec.d; ++j) {
      const double x = rng.uniform();
      const double u = rng.uniform();
      ds.x(i, j) = x;
      // Zero MI: Y is drawn independently of X.
      ds.y(i, j) = width(j) > 0.0 ? x + width(j) * u : u;
    }
  }
  return ds;
}

PairedDataset sample_log_gamma_exponential(const DistributionSpec& spec, Eigen::Index n,
                                           MasterSeed seed) {
  PairedDataset ds = make_dataset(spec, n, seed, spec.d, spec.d);
  Eigen::VectorXd shape(spec.d);
  for (Eigen::Index j = 0; j < spec.d; ++j) {
    const double mi = spec.per_component_mi(j);
    shape(j) = mi == 0.0 ? 0.0 : log_gamma_exponential_shape(mi);
  }
  Rng rng = seed.rng();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < spec.d; ++j) {
      if (shape(j) > 0.0) {
        const double log_g = log_gamma_sample(shape(j), rng);
        ds.x(i, j) = log_g;
        ds.y(i, j) = std::log(rng.exponential()) - log_g;  // E ~ Exp(rate G)
      } else {
        // Zero MI: independent log-Gamma(1) and log-Exp(1) coordinates.
        ds.x(i, j) = log_gamma_sample(1.0, rng);
        ds.y(i, j) = std::log(rng.exponential());
      }
    }
  }
  return ds;
}

PairedDataset sample_rank_one_normal(Eigen::Index d, double rho, Eigen::Index n, MasterSeed seed) {
  const DistributionSpec spec = DistributionSpec::equal(Family::rank_one_normal, d, rho_to_mi(rho));
  PairedDataset ds = make_dataset(spec, n, seed, d, d);
  const double noise = std::sqrt(1.0 - rho * rho);
  Rng rng = seed.rng();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double a = rng.normal();
    const double b = rho * a + noise * rng.normal();
    ds.x.row(i).setConstant(a);
    ds.y.row(i).setConstant(b);
  }
  return ds;
}

PairedDataset sample(const DistributionSpec& spec, Eigen::Index n, MasterSeed seed) {
  switch (spec.family) {
    case Family::correlated_normal: return sample_correlated_normal(spec, n, seed);
    case Family::correlated_uniform: return sample_correlated_uniform(spec, n, seed);
    case Family::smoothed_uniform: return sample_smoothed_uniform(spec, n, seed);
    case Family::log_gamma_exponential: return sample_log_gamma_exponential(spec, n, seed);
    case Family::rank_one_normal: {
      spec.validate();
      PairedDataset ds = sample_rank_one_normal(spec.d, mi_to_rho(spec.per_component_mi(0)), n, seed);
      ds.spec = spec;
      return ds;
    }
  }
  throw UnsupportedError("sample: unsupported family");
}

Eigen::MatrixXd sample_covariance(const Eigen::Ref<const Eigen::MatrixXd>& data) {
  if (data.rows() < 2) throw DomainError("sample_covariance: need at least two rows");
  const Eigen::MatrixXd centered = data.rowwise() - data.colwise().mean();
  return centered.transpose() * centered / static_cast<double>(data.rows() - 1);
}

Eigen::MatrixXd inverse_sqrt_spd(const Eigen::Ref<const Eigen::MatrixXd>& cov) {
  if (cov.rows() != cov.cols() || cov.rows() < 1) {
    throw DomainError("inverse_sqrt_spd: matrix must be square");
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  if (eig.info() != Eigen::Success) throw SingularityError("inverse_sqrt_spd: eigensolver failed");
  const Eigen::VectorXd& lambda = eig.eigenvalues();
  const double floor = 1e-12 * std::max(lambda.maxCoeff(), 0.0);
  if (!(lambda.minCoeff() > floor)) {
    throw SingularityError("inverse_sqrt_spd: covariance is singular (smallest eigenvalue " +
                           std::to_string(lambda.minCoeff()) + ")");
  }
  return eig.eigenvectors() * lambda.cwiseInverse().cwiseSqrt().asDiagonal() *
         eig.eigenvectors().transpose();
}

Eigen::MatrixXd normalization_matrix(const LinearMap& map, const Eigen::MatrixXd& cov) {
  if (std::holds_alternative<Whitening>(map)) return inverse_sqrt_spd(cov);
  if (std::holds_alternative<Standardization>(map)) {
    const Eigen::VectorXd var = cov.diagonal();
    if (!((var.array() > 0.0).all())) {
      throw SingularityError("standardization: zero variance coordinate");
    }
    return var.cwiseSqrt().cwiseInverse().asDiagonal();
  }
  return std::get<CustomMap>(map).matrix;
}

PairedDataset apply_linear(const PairedDataset& dataset, const LinearMap& map, Side side) {
  auto transform = [&](const Eigen::MatrixXd& data) -> Eigen::MatrixXd {
    if (const auto* custom = std::get_if<CustomMap>(&map)) {
      if (custom->matrix.cols() != data.cols()) {
        throw DomainError("apply_linear: custom map has the wrong number of columns");
      }
      return data * custom->matrix.transpose();
    }
    // Both normalisations are symmetric, so right-multiplying rows is enough.
    return data * normalization_matrix(map, sample_covariance(data));
  };
  PairedDataset out = dataset;
  if (side != Side::y) out.x = transform(dataset.x);
  if (side != Side::x) out.y = transform(dataset.y);
  // A non-invertible map changes the ground truth; drop the generating spec.
  if (std::holds_alternative<CustomMap>(map)) out.spec.reset();
  return out;
}

}  // namespace slicedmi
