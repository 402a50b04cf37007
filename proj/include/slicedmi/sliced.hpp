#pragma once

#include <vector>

#include <Eigen/Dense>

#include "slicedmi/distributions.hpp"
#include "slicedmi/ksg.hpp"
#include "slicedmi/random.hpp"
#include "slicedmi/specfun.hpp"

namespace slicedmi {

/// Monte Carlo k-SMI estimate: KSG on (Theta^T X, Phi^T Y) averaged over
/// independent Haar projector pairs.
struct SliceEstimate {
  double mean = 0.0;
  double slice_std = 0.0;        // spread of per_slice_values
  double std_across_runs = 0.0;  // filled in by multi-run drivers
  std::vector<double> per_slice_values;
  Eigen::Index n_slices = 0;
  Eigen::Index k = 0;
  MasterSeed seed;

  /// Standard error of the slice average.
  double std_error() const;
};

/// Slice j draws (Theta, Phi) from the child stream seed.child(j), so the
/// result is identical for any `threads`. Per-slice values are averaged
/// unclipped, in slice order.
SliceEstimate estimate_smi_mc(const Eigen::Ref<const Eigen::MatrixXd>& x,
                              const Eigen::Ref<const Eigen::MatrixXd>& y, Eigen::Index k,
                              Eigen::Index n_slices, const KsgConfig& cfg, MasterSeed seed,
                              int threads = 1);

SliceEstimate estimate_smi_mc(const PairedDataset& dataset, Eigen::Index k, Eigen::Index n_slices,
                              const KsgConfig& cfg, MasterSeed seed, int threads = 1);

// Closed forms for the isotropic Gaussian pair N(0, [[I, rho I], [rho I, I]]).

/// Series budget used by analytic_si_gaussian before it switches to quadrature.
inline constexpr SeriesControl kAnalyticSeriesControl{1e-12, 500};

/// SI = rho^2 / (2d) * 3F2(1, 1, 3/2; d/2 + 1, 2; rho^2). Throws
/// ConvergenceError if the series does not converge under `ctrl`.
double analytic_si_series(Eigen::Index d, double rho,
                          const SeriesControl& ctrl = kAnalyticSeriesControl);

/// SI = -E ln(1 - rho^2 B) / 2 with B ~ Beta(1/2, (d-1)/2), integrated
/// adaptively after the substitution B = sin^2(t).
double analytic_si_quadrature(Eigen::Index d, double rho);

enum class SiPath { series, quadrature };

struct AnalyticSi {
  double value = 0.0;
  SiPath path = SiPath::series;
};

/// Series first; quadrature when the series reports non-convergence.
AnalyticSi analytic_si_gaussian_detail(Eigen::Index d, double rho);
double analytic_si_gaussian(Eigen::Index d, double rho);

/// lim_{rho^2 -> 1} SI = psi(d - 1) - psi((d - 1)/2) - ln 2, for d >= 2.
double si_saturation_limit(Eigen::Index d);

struct MonteCarloValue {
  double value = 0.0;
  double std_error = 0.0;
};

/// k-SMI of the isotropic pair as the Jacobi-ensemble average of
/// -1/2 sum_i ln(1 - rho^2 lambda_i), with lambda sampled from Haar
/// corner blocks. Requires 2k <= d.
MonteCarloValue analytic_ksmi_gaussian(Eigen::Index d, Eigen::Index k, double rho,
                                       Eigen::Index n_mc, MasterSeed seed);

/// Max-sliced MI of a Gaussian pair: -1/2 sum over the k largest canonical
/// correlations.
double msmi_gaussian(const GaussianSpec& spec, Eigen::Index k);

/// msmi_gaussian on the sample covariance. Exact only for Gaussian data.
double msmi_plugin(const PairedDataset& dataset, Eigen::Index k);

/// GaussianSpec assembled from the sample covariance of a dataset.
GaussianSpec sample_gaussian_spec(const PairedDataset& dataset);

}  // namespace slicedmi
