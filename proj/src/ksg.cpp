#include "slicedmi/ksg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <string>

#include "slicedmi/errors.hpp"
#include "slicedmi/parallel.hpp"
#include "slicedmi/random.hpp"
#include "slicedmi/specfun.hpp"

namespace slicedmi {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

inline double chebyshev(const double* a, const double* b, Eigen::Index dim) {
  double d = 0.0;
  for (Eigen::Index j = 0; j < dim; ++j) d = std::max(d, std::abs(a[j] - b[j]));
  return d;
}

// Insert `dist` into the ascending array best[0..k).
inline void offer(std::vector<double>& best, double dist) {
  if (dist >= best.back()) return;
  auto pos = std::upper_bound(best.begin(), best.end(), dist);
  std::move_backward(pos, best.end() - 1, best.end());
  *pos = dist;
}

}  // namespace

ChebyshevKdTree::ChebyshevKdTree(const Eigen::Ref<const Eigen::MatrixXd>& points, int leaf_size)
    : n_(points.rows()), dim_(points.cols()), leaf_size_(std::max(leaf_size, 1)) {
  if (n_ < 1 || dim_ < 1) throw DomainError("ChebyshevKdTree: empty point set");
  if (!points.allFinite()) throw DomainError("ChebyshevKdTree: non-finite coordinates");
  const Eigen::MatrixXd source = points;
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n_));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  nodes_.reserve(static_cast<std::size_t>(2 * (n_ / leaf_size_ + 1)));
  build(0, n_, order, source);

  points_.resize(static_cast<std::size_t>(n_ * dim_));
  original_ = order;
  for (Eigen::Index pos = 0; pos < n_; ++pos) {
    for (Eigen::Index j = 0; j < dim_; ++j) {
      points_[static_cast<std::size_t>(pos * dim_ + j)] = source(order[pos], j);
    }
  }
}

int ChebyshevKdTree::build(Eigen::Index begin, Eigen::Index end, std::vector<Eigen::Index>& order,
                           const Eigen::MatrixXd& source) {
  const int id = static_cast<int>(nodes_.size());
  nodes_.push_back(Node{begin, end, -1, -1});
  const std::size_t base = bounds_.size();
  bounds_.resize(base + static_cast<std::size_t>(2 * dim_));
  double* lo = bounds_.data() + base;
  double* hi = lo + dim_;
  for (Eigen::Index j = 0; j < dim_; ++j) {
    lo[j] = kInf;
    hi[j] = -kInf;
  }
  for (Eigen::Index p = begin; p < end; ++p) {
    for (Eigen::Index j = 0; j < dim_; ++j) {
      const double v = source(order[p], j);
      lo[j] = std::min(lo[j], v);
      hi[j] = std::max(hi[j], v);
    }
  }
  if (end - begin <= leaf_size_) return id;

  Eigen::Index split = 0;
  double spread = -1.0;
  for (Eigen::Index j = 0; j < dim_; ++j) {
    if (hi[j] - lo[j] > spread) {
      spread = hi[j] - lo[j];
      split = j;
    }
  }
  if (spread <= 0.0) return id;  // all points identical

  const Eigen::Index mid = begin + (end - begin) / 2;
  std::nth_element(order.begin() + begin, order.begin() + mid, order.begin() + end,
                   [&](Eigen::Index a, Eigen::Index b) {
                     const double va = source(a, split);
                     const double vb = source(b, split);
                     return va < vb || (va == vb && a < b);
                   });
  const int left = build(begin, mid, order, source);
  const int right = build(mid, end, order, source);
  nodes_[static_cast<std::size_t>(id)].left = left;
  nodes_[static_cast<std::size_t>(id)].right = right;
  return id;
}

double ChebyshevKdTree::min_distance(int node, const double* q) const {
  const double* lo = bounds_.data() + static_cast<std::size_t>(node) * 2 * dim_;
  const double* hi = lo + dim_;
  double d = 0.0;
  for (Eigen::Index j = 0; j < dim_; ++j) {
    d = std::max(d, std::max(lo[j] - q[j], q[j] - hi[j]));
  }
  return d;
}

double ChebyshevKdTree::max_distance(int node, const double* q) const {
  const double* lo = bounds_.data() + static_cast<std::size_t>(node) * 2 * dim_;
  const double* hi = lo + dim_;
  double d = 0.0;
  for (Eigen::Index j = 0; j < dim_; ++j) {
    d = std::max(d, std::max(std::abs(q[j] - lo[j]), std::abs(q[j] - hi[j])));
  }
  return d;
}

double ChebyshevKdTree::kth_neighbor_distance(std::span<const double> query, int k,
                                              Eigen::Index exclude) const {
  if (static_cast<Eigen::Index>(query.size()) != dim_) {
    throw DomainError("kth_neighbor_distance: query dimension mismatch");
  }
  const Eigen::Index available = n_ - ((exclude >= 0 && exclude < n_) ? 1 : 0);
  if (k < 1 || k > available) {
    throw DomainError("kth_neighbor_distance: only " + std::to_string(available) +
                      " candidate neighbours for k = " + std::to_string(k));
  }
  const double* q = query.data();
  // Scratch buffers are reused across queries on the same thread.
  thread_local std::vector<double> best;
  best.assign(static_cast<std::size_t>(k), kInf);
  // Explicit stack of (node, lower bound on distance).
  thread_local std::vector<std::pair<int, double>> stack;
  stack.clear();
  stack.emplace_back(0, min_distance(0, q));
  while (!stack.empty()) {
    const auto [id, bound] = stack.back();
    stack.pop_back();
    if (bound > best.back()) continue;
    const Node& node = nodes_[static_cast<std::size_t>(id)];
    if (node.left < 0) {
      for (Eigen::Index pos = node.begin; pos < node.end; ++pos) {
        if (original_[static_cast<std::size_t>(pos)] == exclude) continue;
        offer(best, chebyshev(q, point(pos), dim_));
      }
      continue;
    }
    const double dl = min_distance(node.left, q);
    const double dr = min_distance(node.right, q);
    // Push the farther child first so the nearer one is searched first.
    if (dl <= dr) {
      stack.emplace_back(node.right, dr);
      stack.emplace_back(node.left, dl);
    } else {
      stack.emplace_back(node.left, dl);
      stack.emplace_back(node.right, dr);
    }
  }
  return best.back();
}

Eigen::Index ChebyshevKdTree::count_within(std::span<const double> query, double radius) const {
  if (static_cast<Eigen::Index>(query.size()) != dim_) {
    throw DomainError("count_within: query dimension mismatch");
  }
  const double* q = query.data();
  Eigen::Index count = 0;
  thread_local std::vector<int> stack;
  stack.clear();
  stack.push_back(0);
  while (!stack.empty()) {
    const int id = stack.back();
    stack.pop_back();
    if (min_distance(id, q) >= radius) continue;
    const Node& node = nodes_[static_cast<std::size_t>(id)];
    if (max_distance(id, q) < radius) {
      count += node.end - node.begin;
      continue;
    }
    if (node.left < 0) {
      for (Eigen::Index pos = node.begin; pos < node.end; ++pos) {
        if (chebyshev(q, point(pos), dim_) < radius) ++count;
      }
      continue;
    }
    stack.push_back(node.left);
    stack.push_back(node.right);
  }
  return count;
}

bool has_duplicate_rows(const Eigen::Ref<const Eigen::MatrixXd>& x,
                        const Eigen::Ref<const Eigen::MatrixXd>& y) {
  const Eigen::Index n = x.rows();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  auto row_less = [&](Eigen::Index a, Eigen::Index b) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      if (x(a, j) != x(b, j)) return x(a, j) < x(b, j);
    }
    for (Eigen::Index j = 0; j < y.cols(); ++j) {
      if (y(a, j) != y(b, j)) return y(a, j) < y(b, j);
    }
    return false;
  };
  std::sort(order.begin(), order.end(), row_less);
  for (std::size_t i = 1; i < order.size(); ++i) {
    if (!row_less(order[i - 1], order[i])) return true;
  }
  return false;
}

namespace {

Eigen::MatrixXd jittered(const Eigen::Ref<const Eigen::MatrixXd>& m, double scale, Rng& rng) {
  Eigen::MatrixXd out = m;
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    const double range = m.col(j).maxCoeff() - m.col(j).minCoeff();
    const double amplitude = scale * (range > 0.0 ? range : 1.0);
    for (Eigen::Index i = 0; i < m.rows(); ++i) out(i, j) += amplitude * rng.uniform(-1.0, 1.0);
  }
  return out;
}

// Per-point marginal counts (n_x, n_y) for either backend.
struct Counts {
  std::vector<Eigen::Index> nx;
  std::vector<Eigen::Index> ny;
};

// Open-ball counts on a line. fl(v - q) is monotone in v, so the points
// with fl(|v - q|) < r form a contiguous run of the sorted values and two
// binary searches with the exact predicate give the brute-force count.
class SortedLine {
 public:
  explicit SortedLine(const Eigen::Ref<const Eigen::VectorXd>& v) : values_(v.data(), v.data() + v.size()) {
    std::sort(values_.begin(), values_.end());
  }
  Eigen::Index count_within(double q, double r) const {
    const auto mid = std::lower_bound(values_.begin(), values_.end(), q);
    const auto hi = std::partition_point(mid, values_.end(), [&](double v) { return v - q < r; });
    const auto lo = std::partition_point(values_.begin(), mid, [&](double v) { return !(q - v < r); });
    return hi - lo;
  }

 private:
  std::vector<double> values_;
};

// Marginal counter: a sorted line in one dimension, a kd-tree otherwise.
class MarginalIndex {
 public:
  explicit MarginalIndex(const Eigen::MatrixXd& m) {
    if (m.cols() == 1) {
      line_.emplace(m.col(0));
    } else {
      tree_.emplace(m);
    }
  }
  Eigen::Index count_within(std::span<const double> q, double r) const {
    return line_ ? line_->count_within(q[0], r) : tree_->count_within(q, r);
  }

 private:
  std::optional<SortedLine> line_;
  std::optional<ChebyshevKdTree> tree_;
};

Counts counts_kd_tree(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, int k, int threads) {
  const Eigen::Index n = x.rows();
  Eigen::MatrixXd joint(n, x.cols() + y.cols());
  joint << x, y;
  const ChebyshevKdTree joint_tree(joint);
  const MarginalIndex x_tree(x);
  const MarginalIndex y_tree(y);
  // Row-major copies so each query is a contiguous span.
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> jr = joint;
  const Eigen::Index dx = x.cols();
  const Eigen::Index dy = y.cols();
  Counts c{std::vector<Eigen::Index>(static_cast<std::size_t>(n)),
           std::vector<Eigen::Index>(static_cast<std::size_t>(n))};
  parallel_for(static_cast<std::size_t>(n), threads, [&](std::size_t i) {
    const auto row = static_cast<Eigen::Index>(i);
    const double* p = jr.data() + row * (dx + dy);
    const double eps =
        joint_tree.kth_neighbor_distance(std::span<const double>(p, dx + dy), k, row);
    // Each count includes the query point itself (distance 0 < eps).
    c.nx[i] = std::max<Eigen::Index>(
        x_tree.count_within(std::span<const double>(p, dx), eps) - 1, 0);
    c.ny[i] = std::max<Eigen::Index>(
        y_tree.count_within(std::span<const double>(p + dx, dy), eps) - 1, 0);
  });
  return c;
}

Counts counts_brute_force(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, int k) {
  const Eigen::Index n = x.rows();
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> xr = x;
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> yr = y;
  const Eigen::Index dx = x.cols();
  const Eigen::Index dy = y.cols();
  Counts c{std::vector<Eigen::Index>(static_cast<std::size_t>(n)),
           std::vector<Eigen::Index>(static_cast<std::size_t>(n))};
  std::vector<double> dist_x(static_cast<std::size_t>(n));
  std::vector<double> dist_y(static_cast<std::size_t>(n));
  std::vector<double> joint;
  for (Eigen::Index i = 0; i < n; ++i) {
    joint.clear();
    for (Eigen::Index j = 0; j < n; ++j) {
      dist_x[j] = chebyshev(xr.data() + i * dx, xr.data() + j * dx, dx);
      dist_y[j] = chebyshev(yr.data() + i * dy, yr.data() + j * dy, dy);
      if (j != i) joint.push_back(std::max(dist_x[j], dist_y[j]));
    }
    std::nth_element(joint.begin(), joint.begin() + (k - 1), joint.end());
    const double eps = joint[static_cast<std::size_t>(k - 1)];
    Eigen::Index nx = 0;
    Eigen::Index ny = 0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i) continue;
      nx += dist_x[j] < eps;
      ny += dist_y[j] < eps;
    }
    c.nx[i] = nx;
    c.ny[i] = ny;
  }
  return c;
}

// sum_i psi(counts[i] + 1), accumulated in increasing count order.
double digamma_sum(const std::vector<Eigen::Index>& counts, Eigen::Index n) {
  std::vector<Eigen::Index> histogram(static_cast<std::size_t>(n + 1), 0);
  for (Eigen::Index c : counts) ++histogram[static_cast<std::size_t>(c)];
  double sum = 0.0;
  for (Eigen::Index m = 0; m <= n; ++m) {
    const Eigen::Index h = histogram[static_cast<std::size_t>(m)];
    if (h > 0) sum += static_cast<double>(h) * digamma(static_cast<double>(m + 1));
  }
  return sum;
}

}  // namespace

double estimate_mi_ksg(const Eigen::Ref<const Eigen::MatrixXd>& x,
                       const Eigen::Ref<const Eigen::MatrixXd>& y, const KsgConfig& cfg) {
  if (cfg.neighbors < 1) throw ConfigError("estimate_mi_ksg: neighbors must be >= 1");
  if (!(cfg.jitter_scale >= 0.0)) throw ConfigError("estimate_mi_ksg: jitter_scale must be >= 0");
  if (x.rows() != y.rows()) throw DomainError("estimate_mi_ksg: x and y row counts differ");
  if (x.cols() < 1 || y.cols() < 1) throw DomainError("estimate_mi_ksg: empty dimension");
  const Eigen::Index n = x.rows();
  if (n <= cfg.neighbors + 1) {
    throw DomainError("estimate_mi_ksg: need more than neighbors + 1 samples, got " +
                      std::to_string(n));
  }
  if (!x.allFinite() || !y.allFinite()) throw DomainError("estimate_mi_ksg: non-finite input");

  Eigen::MatrixXd xs = x;
  Eigen::MatrixXd ys = y;
  if (cfg.jitter_scale > 0.0 && has_duplicate_rows(x, y)) {
    Rng rng = MasterSeed{cfg.jitter_seed}.child(0x6A177E5ULL).rng();
    xs = jittered(x, cfg.jitter_scale, rng);
    ys = jittered(y, cfg.jitter_scale, rng);
  }

  const Counts c = cfg.backend == KsgBackend::kd_tree
                       ? counts_kd_tree(xs, ys, cfg.neighbors, cfg.threads)
                       : counts_brute_force(xs, ys, cfg.neighbors);
  const double sx = digamma_sum(c.nx, n);
  const double sy = digamma_sum(c.ny, n);
  return digamma(static_cast<double>(cfg.neighbors)) + digamma(static_cast<double>(n)) -
         (sx + sy) / static_cast<double>(n);
}

}  // namespace slicedmi
