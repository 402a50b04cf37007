#include "slicedmi/haar.hpp"

#include <algorithm>
#include <string>

#include "slicedmi/errors.hpp"

namespace slicedmi {

double orthonormality_defect(const Eigen::MatrixXd& q) {
  const Eigen::MatrixXd gram = q.transpose() * q;
  return (gram - Eigen::MatrixXd::Identity(q.cols(), q.cols())).cwiseAbs().maxCoeff();
}

Projector::Projector(Eigen::MatrixXd matrix) : matrix_(std::move(matrix)) {
  if (matrix_.cols() < 1 || matrix_.cols() > matrix_.rows()) {
    throw DomainError("Projector: need 1 <= k <= d");
  }
  if (orthonormality_defect(matrix_) >= kOrthonormalityTol) {
    throw DomainError("Projector: columns are not orthonormal");
  }
}

Projector sample_stiefel(Eigen::Index d, Eigen::Index k, Rng& rng) {
  if (d < 1 || k < 1 || k > d) {
    throw DomainError("sample_stiefel: need 1 <= k <= d, got d = " + std::to_string(d) +
                      ", k = " + std::to_string(k));
  }
  Eigen::MatrixXd gaussian(d, k);
  for (Eigen::Index j = 0; j < k; ++j) {
    for (Eigen::Index i = 0; i < d; ++i) gaussian(i, j) = rng.normal();
  }
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(gaussian);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(d, k);
  const auto& r = qr.matrixQR();
  for (Eigen::Index j = 0; j < k; ++j) {
    if (r(j, j) < 0.0) q.col(j) *= -1.0;
  }
  return Projector(std::move(q), Projector::Unchecked{});
}

Projector sample_sphere(Eigen::Index d, Rng& rng) {
  if (d < 1) throw DomainError("sample_sphere: dimension must be >= 1");
  return sample_stiefel(d, 1, rng);
}

Eigen::MatrixXd sample_orthogonal(Eigen::Index d, Rng& rng) {
  return sample_stiefel(d, d, rng).matrix();
}

double squared_inner_product_sample(Eigen::Index d, Rng& rng) {
  if (d < 2) throw DomainError("squared_inner_product_sample: need d >= 2");
  const Projector theta = sample_sphere(d, rng);
  const Projector phi = sample_sphere(d, rng);
  const double dot = theta.matrix().col(0).dot(phi.matrix().col(0));
  return std::min(dot * dot, 1.0);
}

Eigen::MatrixXd jacobi_eigs_empirical(Eigen::Index d, Eigen::Index k, Eigen::Index n_draws,
                                      Rng& rng) {
  if (k < 1 || 2 * k > d) {
    throw DomainError("jacobi_eigs_empirical: need 1 <= k and 2k <= d");
  }
  if (n_draws < 1) throw DomainError("jacobi_eigs_empirical: n_draws must be >= 1");
  Eigen::MatrixXd eigs(n_draws, k);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(k);
  for (Eigen::Index draw = 0; draw < n_draws; ++draw) {
    // The first k columns of a Haar O(d) matrix are Haar on St(k, d), so
    // only those are sampled.
    const Projector w = sample_stiefel(d, k, rng);
    const Eigen::MatrixXd w11 = w.matrix().topRows(k);
    solver.compute(w11 * w11.transpose(), Eigen::EigenvaluesOnly);
    eigs.row(draw) = solver.eigenvalues().cwiseMax(0.0).cwiseMin(1.0).transpose();
  }
  return eigs;
}

}  // namespace slicedmi
