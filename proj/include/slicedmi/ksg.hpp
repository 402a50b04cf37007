#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace slicedmi {

enum class KsgBackend { kd_tree, brute_force };

struct KsgConfig {
  int neighbors = 1;
  // Duplicate rows get uniform noise of this size times the column range.
  double jitter_scale = 1e-10;
  std::uint64_t jitter_seed = 0;
  KsgBackend backend = KsgBackend::kd_tree;
  int threads = 1;
};

/// Exact k-NN and open-ball counting under the max-coordinate metric.
class ChebyshevKdTree {
 public:
  static constexpr int kDefaultLeafSize = 16;

  /// Rows of `points` are the indexed points. Non-finite entries are rejected.
  explicit ChebyshevKdTree(const Eigen::Ref<const Eigen::MatrixXd>& points,
                           int leaf_size = kDefaultLeafSize);

  Eigen::Index size() const noexcept { return n_; }
  Eigen::Index dim() const noexcept { return dim_; }

  /// Distance from `query` to its k-th nearest indexed point, skipping the
  /// point whose original row index is `exclude` (pass -1 to skip none).
  double kth_neighbor_distance(std::span<const double> query, int k,
                               Eigen::Index exclude = -1) const;

  /// Number of indexed points at distance strictly less than `radius`.
  Eigen::Index count_within(std::span<const double> query, double radius) const;

 private:
  struct Node {
    Eigen::Index begin = 0;
    Eigen::Index end = 0;
    int left = -1;
    int right = -1;
  };

  int build(Eigen::Index begin, Eigen::Index end, std::vector<Eigen::Index>& order,
            const Eigen::MatrixXd& source);
  double min_distance(int node, const double* q) const;
  double max_distance(int node, const double* q) const;
  const double* point(Eigen::Index pos) const { return points_.data() + pos * dim_; }

  Eigen::Index n_ = 0;
  Eigen::Index dim_ = 0;
  int leaf_size_ = kDefaultLeafSize;
  std::vector<double> points_;         // row-major, in tree order
  std::vector<Eigen::Index> original_;  // tree position -> input row
  std::vector<Node> nodes_;
  std::vector<double> bounds_;  // per node: lo[dim], hi[dim]
};

/// Kraskov-Stoegbauer-Grassberger estimator (variant 1) of I(X; Y) in nats:
///   psi(k) + psi(n) - < psi(n_x + 1) + psi(n_y + 1) >
/// with eps_i the joint max-metric distance to the k-th neighbour and
/// n_x, n_y the strict marginal counts within eps_i. The average is reduced
/// through a histogram of counts, so the result does not depend on row
/// order, argument order, or thread count.
double estimate_mi_ksg(const Eigen::Ref<const Eigen::MatrixXd>& x,
                       const Eigen::Ref<const Eigen::MatrixXd>& y, const KsgConfig& cfg = {});

/// True if two rows of [x y] coincide exactly.
bool has_duplicate_rows(const Eigen::Ref<const Eigen::MatrixXd>& x,
                        const Eigen::Ref<const Eigen::MatrixXd>& y);

}  // namespace slicedmi
