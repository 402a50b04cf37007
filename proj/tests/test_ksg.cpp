#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "slicedmi/distributions.hpp"
#include "slicedmi/errors.hpp"
#include "slicedmi/ksg.hpp"
#include "slicedmi/specfun.hpp"

using namespace slicedmi;

namespace {

double cheb(const Eigen::MatrixXd& a, Eigen::Index i, Eigen::Index j) {
  return (a.row(i) - a.row(j)).cwiseAbs().maxCoeff();
}

// Direct O(n^2) transcription of the estimator, with a plain running sum.
double ksg_reference(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, int k) {
  const Eigen::Index n = x.rows();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    std::vector<double> dist;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j != i) dist.push_back(std::max(cheb(x, i, j), cheb(y, i, j)));
    }
    std::nth_element(dist.begin(), dist.begin() + (k - 1), dist.end());
    const double eps = dist[k - 1];
    int nx = 0, ny = 0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i) continue;
      if (cheb(x, i, j) < eps) ++nx;
      if (cheb(y, i, j) < eps) ++ny;
    }
    acc += digamma(nx + 1.0) + digamma(ny + 1.0);
  }
  return digamma(k) + digamma(static_cast<double>(n)) - acc / n;
}

PairedDataset gaussian(Eigen::Index d, double rho, Eigen::Index n, std::uint64_t seed) {
  return sample_correlated_normal(DistributionSpec::equal(Family::correlated_normal, d, d * rho_to_mi(rho)), n,
                                  MasterSeed{seed});
}

}  // namespace

TEST_CASE("kd-tree matches brute-force neighbour search") {
  Rng rng(17);
  Eigen::MatrixXd pts(1000, 3);
  for (Eigen::Index i = 0; i < pts.size(); ++i) pts.data()[i] = rng.normal();
  // Some coarse coordinates to create distance ties.
  pts.col(2) = (pts.col(2) * 2.0).array().round() / 2.0;
  const ChebyshevKdTree tree(pts, 4);
  for (int q = 0; q < 200; ++q) {
    const Eigen::Index i = q * 5;
    std::vector<double> d;
    for (Eigen::Index j = 0; j < pts.rows(); ++j) {
      if (j != i) d.push_back(cheb(pts, i, j));
    }
    std::sort(d.begin(), d.end());
    Eigen::RowVector3d row = pts.row(i);
    std::span<const double> s(row.data(), 3);
    for (int k : {1, 2, 5}) CHECK(tree.kth_neighbor_distance(s, k, i) == d[k - 1]);
    for (double r : {0.0, d[0], d[3], 0.7}) {
      const auto expected = std::count_if(d.begin(), d.end(), [r](double v) { return v < r; }) +
                            (r > 0.0 ? 1 : 0);  // the query point itself sits at distance 0
      CHECK(tree.count_within(s, r) == expected);
    }
  }
}

TEST_CASE("count_within with radius zero is empty") {
  Eigen::MatrixXd pts = Eigen::MatrixXd::Zero(5, 2);
  const ChebyshevKdTree tree(pts);
  const double q[2] = {0.0, 0.0};
  CHECK(tree.count_within(q, 0.0) == 0);
  CHECK(tree.count_within(q, 1e-300) == 5);
  CHECK_THROWS_AS(tree.kth_neighbor_distance(q, 5, 0), DomainError);
}

TEST_CASE("a single point has no neighbour") {
  const Eigen::MatrixXd one = Eigen::MatrixXd::Constant(1, 3, 0.5);
  const ChebyshevKdTree tree(one);
  const double q[3] = {0.5, 0.5, 0.5};
  CHECK_THROWS_AS(tree.kth_neighbor_distance(q, 1, 0), DomainError);
  CHECK(tree.kth_neighbor_distance(q, 1) == 0.0);
}

TEST_CASE("tree construction rejects bad input") {
  Eigen::MatrixXd empty(0, 2);
  CHECK_THROWS_AS(ChebyshevKdTree{empty}, DomainError);
  Eigen::MatrixXd nan = Eigen::MatrixXd::Zero(3, 1);
  nan(1, 0) = std::nan("");
  CHECK_THROWS_AS(ChebyshevKdTree{nan}, DomainError);
}

TEST_CASE("estimate agrees with the direct formula") {
  for (std::uint64_t seed : {1, 2, 3}) {
    const PairedDataset ds = gaussian(2, 0.5, 100, seed);
    for (int k : {1, 3}) {
      KsgConfig cfg;
      cfg.neighbors = k;
      CHECK(std::abs(estimate_mi_ksg(ds.x, ds.y, cfg) - ksg_reference(ds.x, ds.y, k)) < 1e-12);
    }
  }
}

TEST_CASE("independent and correlated Gaussian pairs, ten-run means") {
  double indep = 0.0;
  double corr = 0.0;
  for (std::uint64_t r = 0; r < 10; ++r) {
    const PairedDataset a = gaussian(1, 0.0, 10000, 100 + r);
    const PairedDataset b = gaussian(1, 0.6, 10000, 200 + r);
    indep += estimate_mi_ksg(a.x, a.y) / 10.0;
    corr += estimate_mi_ksg(b.x, b.y) / 10.0;
  }
  CHECK(std::abs(indep) < 0.02);
  CHECK(std::abs(corr - 0.2231) < 0.02);
}

TEST_CASE("identical variables give a large estimate") {
  const PairedDataset ds = gaussian(1, 0.0, 10000, 23);
  CHECK(estimate_mi_ksg(ds.x, ds.x) > 5.0);
  const Eigen::MatrixXd head = ds.x.topRows(100);
  const double small = estimate_mi_ksg(head, head);
  CHECK(std::abs(small - ksg_reference(head, head, 1)) < 1e-12);
  // Every marginal ball of radius eps_i is empty, leaving psi(n) - psi(1).
  CHECK(std::abs(small - (digamma(100.0) - digamma(1.0))) < 1e-12);
}

TEST_CASE("invariance to row order and argument order") {
  const PairedDataset ds = gaussian(3, 0.7, 2000, 24);
  const double base = estimate_mi_ksg(ds.x, ds.y);
  std::vector<Eigen::Index> perm(ds.size());
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(5);
  for (Eigen::Index i = ds.size() - 1; i > 0; --i) {
    std::swap(perm[i], perm[static_cast<std::size_t>(rng.next_u64() % (i + 1))]);
  }
  Eigen::MatrixXd px(ds.x.rows(), ds.x.cols()), py(ds.y.rows(), ds.y.cols());
  for (Eigen::Index i = 0; i < ds.size(); ++i) {
    px.row(i) = ds.x.row(perm[i]);
    py.row(i) = ds.y.row(perm[i]);
  }
  CHECK(estimate_mi_ksg(px, py) == base);
  CHECK(estimate_mi_ksg(ds.y, ds.x) == base);
}

TEST_CASE("monotone marginal transforms barely move the estimate") {
  const PairedDataset ds = gaussian(1, 0.8, 5000, 25);
  const double base = estimate_mi_ksg(ds.x, ds.y);
  const Eigen::MatrixXd tx = ds.x.array().exp();
  const Eigen::MatrixXd ty = ds.y.array().cube();
  CHECK(std::abs(estimate_mi_ksg(tx, ty) - base) < 0.05);
}

TEST_CASE("backends and thread counts agree bit for bit") {
  const PairedDataset ds = gaussian(2, 0.5, 500, 26);
  KsgConfig kd;
  KsgConfig bf;
  bf.backend = KsgBackend::brute_force;
  KsgConfig mt;
  mt.threads = 4;
  const double a = estimate_mi_ksg(ds.x, ds.y, kd);
  CHECK(estimate_mi_ksg(ds.x, ds.y, bf) == a);
  CHECK(estimate_mi_ksg(ds.x, ds.y, mt) == a);
}

TEST_CASE("duplicate rows are jittered deterministically") {
  Eigen::MatrixXd x(200, 1), y(200, 1);
  Rng rng(9);
  for (Eigen::Index i = 0; i < 200; ++i) {
    x(i, 0) = std::floor(rng.uniform() * 10.0);
    y(i, 0) = std::floor(rng.uniform() * 10.0);
  }
  CHECK(has_duplicate_rows(x, y));
  const double a = estimate_mi_ksg(x, y);
  CHECK(std::isfinite(a));
  CHECK(estimate_mi_ksg(x, y) == a);
  KsgConfig other;
  other.jitter_seed = 99;
  CHECK(std::isfinite(estimate_mi_ksg(x, y, other)));

  const PairedDataset ds = gaussian(1, 0.3, 100, 27);
  CHECK_FALSE(has_duplicate_rows(ds.x, ds.y));
}

TEST_CASE("input validation") {
  Eigen::MatrixXd one = Eigen::MatrixXd::Zero(1, 1);
  CHECK_THROWS_AS(estimate_mi_ksg(one, one), DomainError);
  Eigen::MatrixXd a = Eigen::MatrixXd::Random(10, 2);
  Eigen::MatrixXd b = Eigen::MatrixXd::Random(9, 2);
  CHECK_THROWS_AS(estimate_mi_ksg(a, b), DomainError);
  Eigen::MatrixXd c = a;
  c(3, 1) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(estimate_mi_ksg(a, c), DomainError);
  KsgConfig cfg;
  cfg.neighbors = 0;
  CHECK_THROWS_AS(estimate_mi_ksg(a, a, cfg), ConfigError);
}
