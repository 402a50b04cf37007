#pragma once

#include <Eigen/Dense>

#include "slicedmi/random.hpp"

namespace slicedmi {

/// Column-orthonormal d x k matrix, i.e. a point of the Stiefel manifold
/// St(k, d). The k = 1 case is a point of the unit sphere.
class Projector {
 public:
  static constexpr double kOrthonormalityTol = 1e-10;

  /// Wraps an existing matrix after checking the orthonormality invariant.
  explicit Projector(Eigen::MatrixXd matrix);

  const Eigen::MatrixXd& matrix() const noexcept { return matrix_; }
  Eigen::Index ambient_dim() const noexcept { return matrix_.rows(); }
  Eigen::Index slice_dim() const noexcept { return matrix_.cols(); }

  /// Rows of `data` are samples in R^d; returns their n x k projections.
  template <typename Derived>
  Eigen::MatrixXd project(const Eigen::MatrixBase<Derived>& data) const {
    return data * matrix_;
  }

 private:
  struct Unchecked {};
  Projector(Eigen::MatrixXd matrix, Unchecked) : matrix_(std::move(matrix)) {}
  friend Projector sample_stiefel(Eigen::Index, Eigen::Index, Rng&);

  Eigen::MatrixXd matrix_;
};

/// max |Q^T Q - I| entrywise.
double orthonormality_defect(const Eigen::MatrixXd& q);

/// Haar-uniform point of St(k, d): QR of a d x k standard normal matrix with
/// the signs fixed so that diag(R) > 0.
Projector sample_stiefel(Eigen::Index d, Eigen::Index k, Rng& rng);

/// Haar-uniform unit vector in R^d (a d x 1 projector).
Projector sample_sphere(Eigen::Index d, Rng& rng);

/// Haar-uniform orthogonal d x d matrix.
Eigen::MatrixXd sample_orthogonal(Eigen::Index d, Rng& rng);

/// |theta^T phi|^2 for independent uniform unit vectors in R^d, d >= 2.
/// Distributed as Beta(1/2, (d - 1)/2).
double squared_inner_product_sample(Eigen::Index d, Rng& rng);

/// Eigenvalues of W11 W11^T where W11 is the top-left k x k block of a Haar
/// orthogonal d x d matrix, one draw per row, sorted ascending. These follow
/// the real Jacobi ensemble with a = 0, b = d - 2k. Requires 2k <= d.
Eigen::MatrixXd jacobi_eigs_empirical(Eigen::Index d, Eigen::Index k, Eigen::Index n_draws,
                                      Rng& rng);

}  // namespace slicedmi
