#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include <Eigen/Dense>

#include "slicedmi/random.hpp"

namespace slicedmi {

enum class Family {
  correlated_normal,
  correlated_uniform,
  smoothed_uniform,
  log_gamma_exponential,
  rank_one_normal,
};

enum class Allocation { equal, simplex_random };

std::string_view to_string(Family family);
std::string_view to_string(Allocation allocation);
Family parse_family(std::string_view name);
Allocation parse_allocation(std::string_view name);

/// Synthetic pair with independent components and known per-component MI.
/// For rank_one_normal, `per_component_mi` holds a single entry: the MI of
/// the scalar pair that is replicated across all d coordinates.
struct DistributionSpec {
  Family family = Family::correlated_normal;
  Eigen::Index d = 1;
  Eigen::VectorXd per_component_mi;
  Allocation allocation = Allocation::equal;

  /// Throws DomainError if the invariants do not hold.
  void validate() const;

  static DistributionSpec equal(Family family, Eigen::Index d, double total_mi);
};

struct PairedDataset {
  Eigen::MatrixXd x;
  Eigen::MatrixXd y;
  std::optional<DistributionSpec> spec;
  MasterSeed seed;

  Eigen::Index size() const noexcept { return x.rows(); }
};

/// Block covariance of a jointly Gaussian pair.
struct GaussianSpec {
  Eigen::MatrixXd sigma_x;
  Eigen::MatrixXd sigma_y;
  Eigen::MatrixXd sigma_xy;

  /// (X, Y) ~ N(0, [[I, rho I], [rho I, I]]) in dimension d.
  static GaussianSpec isotropic(Eigen::Index d, double rho);
};

// Ground truth.

double ground_truth_mi(const DistributionSpec& spec);

/// Correlation of a bivariate normal pair carrying `mi` nats.
double mi_to_rho(double mi);

/// MI of a Gaussian pair with the given correlation.
double rho_to_mi(double rho);

/// Width a of the smoothed-uniform pair Y = X + a U with a/2 - ln a = mi.
double smoothed_uniform_width(double mi);

/// I(ln G; ln E) for G ~ Gamma(shape, 1), E | G ~ Exp(rate G):
/// psi(shape) - ln(shape) + 1/shape.
double log_gamma_exponential_mi(double shape);

/// Inverse of log_gamma_exponential_mi.
double log_gamma_exponential_shape(double mi);

/// The same MI computed by 2-D quadrature of the joint density against the
/// product of its marginals, without using the closed form.
double log_gamma_exponential_mi_quadrature(double shape);

/// Canonical correlations (singular values of Sx^-1/2 Sxy Sy^-1/2), descending.
Eigen::VectorXd canonical_correlations(const GaussianSpec& spec);

/// -1/2 sum_i ln(1 - rho_i^2); +infinity when some rho_i >= 1 - 1e-12.
double gaussian_mi(const GaussianSpec& spec);

// Sampling.

/// Splits total_mi over d components, evenly or uniformly on the simplex.
Eigen::VectorXd allocate_component_mi(double total_mi, Eigen::Index d, Allocation mode, Rng& rng);

PairedDataset sample_correlated_normal(const DistributionSpec& spec, Eigen::Index n,
                                       MasterSeed seed);
PairedDataset sample_correlated_uniform(const DistributionSpec& spec, Eigen::Index n,
                                        MasterSeed seed);
PairedDataset sample_smoothed_uniform(const DistributionSpec& spec, Eigen::Index n,
                                      MasterSeed seed);
PairedDataset sample_log_gamma_exponential(const DistributionSpec& spec, Eigen::Index n,
                                           MasterSeed seed);
PairedDataset sample_rank_one_normal(Eigen::Index d, double rho, Eigen::Index n, MasterSeed seed);

/// Dispatches on spec.family.
PairedDataset sample(const DistributionSpec& spec, Eigen::Index n, MasterSeed seed);

// Linear maps.

struct Whitening {};
struct Standardization {};
struct CustomMap {
  Eigen::MatrixXd matrix;  // applied as v -> matrix * v
};
using LinearMap = std::variant<Whitening, Standardization, CustomMap>;

enum class Side { x, y, both };

/// Sample covariance with mean removal and n - 1 normalisation.
Eigen::MatrixXd sample_covariance(const Eigen::Ref<const Eigen::MatrixXd>& data);

/// Symmetric inverse square root of an SPD matrix. Eigenvalues at or below
/// 1e-12 (relative to the largest) raise SingularityError.
Eigen::MatrixXd inverse_sqrt_spd(const Eigen::Ref<const Eigen::MatrixXd>& cov);

/// Applies `map` to the rows of the chosen side(s). Whitening and
/// standardization use the sample moments of the data they are applied to.
PairedDataset apply_linear(const PairedDataset& dataset, const LinearMap& map, Side side);

/// Population version of a whitening or standardization map for covariance `cov`.
Eigen::MatrixXd normalization_matrix(const LinearMap& map, const Eigen::MatrixXd& cov);

}  // namespace slicedmi
