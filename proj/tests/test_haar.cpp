#include <doctest.h>

#include <cmath>
#include <vector>

#include "slicedmi/haar.hpp"
#include "slicedmi/specfun.hpp"
#include "slicedmi/stats.hpp"

using namespace slicedmi;

TEST_CASE("sample_sphere") {
  SUBCASE("S^0 is a fair coin") {
    Rng rng(1);
    int plus = 0;
    const int n = 10000;
    for (int i = 0; i < n; ++i) {
      const double v = sample_sphere(1, rng).matrix()(0, 0);
      REQUIRE(std::abs(std::abs(v) - 1.0) < 1e-15);
      plus += v > 0.0;
    }
    CHECK(std::abs(plus / double(n) - 0.5) < 3.0 * 0.005);
  }
  SUBCASE("unit norm") {
    Rng rng(2);
    for (int d : {1, 2, 3, 7, 50}) {
      for (int i = 0; i < 100; ++i) CHECK(std::abs(sample_sphere(d, rng).matrix().norm() - 1.0) < 1e-12);
    }
  }
  SUBCASE("coordinate moments in d = 3") {
    Rng rng(3);
    const int n = 100000;
    Eigen::Vector3d sum = Eigen::Vector3d::Zero();
    Eigen::Vector3d sq = Eigen::Vector3d::Zero();
    for (int i = 0; i < n; ++i) {
      const Eigen::Vector3d v = sample_sphere(3, rng).matrix().col(0);
      sum += v;
      sq += v.cwiseAbs2();
    }
    for (int j = 0; j < 3; ++j) {
      CHECK(std::abs(sum(j) / n) < 0.01);
      CHECK(std::abs(sq(j) / n - 1.0 / 3.0) < 0.01);
    }
  }
  SUBCASE("d = 0 is rejected") {
    Rng rng(4);
    CHECK_THROWS_AS(sample_sphere(0, rng), DomainError);
  }
}

TEST_CASE("sample_stiefel") {
  Rng rng(10);
  SUBCASE("square case is orthogonal") {
    for (int i = 0; i < 50; ++i) {
      const Projector w = sample_stiefel(5, 5, rng);
      CHECK(std::abs(std::abs(w.matrix().determinant()) - 1.0) < 1e-8);
    }
  }
  SUBCASE("columns are orthonormal") {
    for (auto [d, k] : {std::pair{2, 1}, {4, 2}, {8, 3}, {30, 7}, {6, 6}}) {
      for (int i = 0; i < 20; ++i) CHECK(orthonormality_defect(sample_stiefel(d, k, rng).matrix()) < 1e-10);
    }
  }
  SUBCASE("second moment E[Q Q^T] = (k/d) I") {
    const int d = 4;
    const int k = 2;
    const int n = 10000;
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(d, d);
    for (int i = 0; i < n; ++i) {
      const Projector q = sample_stiefel(d, k, rng);
      acc += q.matrix() * q.matrix().transpose();
    }
    acc /= n;
    const Eigen::MatrixXd expected = (double(k) / d) * Eigen::MatrixXd::Identity(d, d);
    CHECK((acc - expected).cwiseAbs().maxCoeff() < 0.01);
  }
  SUBCASE("k > d is rejected") { CHECK_THROWS_AS(sample_stiefel(3, 4, rng), DomainError); }
  SUBCASE("same seed, same draw") {
    Rng a(77);
    Rng b(77);
    CHECK(sample_stiefel(6, 3, a).matrix() == sample_stiefel(6, 3, b).matrix());
  }
}

TEST_CASE("Projector enforces its invariant") {
  CHECK_THROWS_AS(Projector(Eigen::MatrixXd::Ones(3, 1)), DomainError);
  CHECK_THROWS_AS(Projector(Eigen::MatrixXd::Identity(2, 3)), DomainError);
  CHECK_NOTHROW(Projector(Eigen::MatrixXd::Identity(3, 2)));
}

TEST_CASE("squared inner product follows Beta(1/2, (d-1)/2)") {
  Rng rng(20);
  auto draws = [&](int d, int n) {
    std::vector<double> v(n);
    for (double& s : v) s = squared_inner_product_sample(d, rng);
    return v;
  };
  CHECK(std::abs(mean(draws(4, 100000)) - 0.25) < 0.005);
  CHECK(std::abs(mean(draws(16, 100000)) - 0.0625) < 0.003);
  CHECK(ks_statistic(draws(2, 100000), [](double x) { return beta_cdf(x, 0.5, 0.5); }) < 0.01);
  CHECK_THROWS_AS(squared_inner_product_sample(1, rng), DomainError);
}

TEST_CASE("shifted inner product follows Beta((d-1)/2, (d-1)/2)") {
  Rng rng(21);
  for (int d : {3, 8}) {
    std::vector<double> v(100000);
    for (double& s : v) {
      const double dot = sample_sphere(d, rng).matrix().col(0).dot(sample_sphere(d, rng).matrix().col(0));
      s = 0.5 * (1.0 + dot);
    }
    const double a = 0.5 * (d - 1);
    CHECK(ks_statistic(v, [a](double x) { return beta_cdf(x, a, a); }) < 0.01);
  }
}

TEST_CASE("rotation invariance of the sphere law") {
  Rng rng(22);
  const Eigen::MatrixXd q = sample_orthogonal(5, rng);
  std::vector<double> rotated(10000);
  std::vector<double> plain(10000);
  for (std::size_t i = 0; i < rotated.size(); ++i) {
    rotated[i] = (q * sample_sphere(5, rng).matrix())(0, 0);
    plain[i] = sample_sphere(5, rng).matrix()(0, 0);
  }
  CHECK(ks_two_sample(rotated, plain) < 0.02);
}

TEST_CASE("jacobi_eigs_empirical") {
  Rng rng(30);
  SUBCASE("eigenvalues lie in [0, 1] and are sorted") {
    const Eigen::MatrixXd e = jacobi_eigs_empirical(7, 3, 2000, rng);
    CHECK(e.minCoeff() >= 0.0);
    CHECK(e.maxCoeff() <= 1.0);
    for (Eigen::Index i = 0; i < e.rows(); ++i) {
      CHECK(e(i, 0) <= e(i, 1));
      CHECK(e(i, 1) <= e(i, 2));
    }
  }
  SUBCASE("k = 1 matches the squared inner product law") {
    const Eigen::MatrixXd e = jacobi_eigs_empirical(5, 1, 10000, rng);
    std::vector<double> jac(e.data(), e.data() + e.size());
    std::vector<double> dots(10000);
    for (double& s : dots) s = squared_inner_product_sample(5, rng);
    CHECK(ks_two_sample(jac, dots) < 0.02);
  }
  SUBCASE("E tr(W11 W11^T) = k^2 / d") {
    const Eigen::MatrixXd e = jacobi_eigs_empirical(6, 2, 100000, rng);
    CHECK(std::abs(e.rowwise().sum().mean() - 4.0 / 6.0) < 0.01);
  }
  SUBCASE("2k > d is rejected") { CHECK_THROWS_AS(jacobi_eigs_empirical(5, 3, 10, rng), DomainError); }
}

TEST_CASE("child streams are reproducible and distinct") {
  const MasterSeed root{12345};
  CHECK(root.child(3) == root.child(3));
  CHECK(!(root.child(3) == root.child(4)));
  Rng a = root.child(9).rng();
  Rng b = root.child(9).rng();
  for (int i = 0; i < 10; ++i) CHECK(a.normal() == b.normal());
}
