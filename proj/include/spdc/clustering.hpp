#pragma once

// Affinity construction, normalized spectral clustering and k-means.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <set>
#include <vector>

#include "spdc/error.hpp"
#include "spdc/random.hpp"
#include "spdc/solver.hpp"
#include "spdc/spd.hpp"

namespace spdc {

/// Symmetric, nonnegative similarity matrix with a zero diagonal.
class AffinityMatrix {
 public:
  AffinityMatrix() = default;

  static AffinityMatrix from_matrix(Matrix w) {
    if (w.rows() != w.cols() || w.rows() == 0) throw DimensionError("AffinityMatrix: must be square");
    if (!w.allFinite()) throw NumericError("AffinityMatrix: non-finite entries");
    if (!detail::is_symmetric(w)) throw UsageError("AffinityMatrix: must be symmetric");
    if ((w.array() < 0.0).any()) throw UsageError("AffinityMatrix: entries must be nonnegative");
    if (w.diagonal().cwiseAbs().maxCoeff() != 0.0) throw UsageError("AffinityMatrix: diagonal must be zero");
    AffinityMatrix out;
    out.w_ = std::move(w);
    return out;
  }

  Eigen::Index size() const { return w_.rows(); }
  const Matrix& entries() const { return w_; }

 private:
  Matrix w_;
};

struct ClusteringResult {
  std::vector<int> labels;
  int k = 0;
  double inertia = 0.0;
  /// Fewer than k distinct labels survived (e.g. duplicate points).
  bool degenerate = false;
  int iterations = 0;
  /// Inertia after every assignment step of the winning restart.
  std::vector<double> inertia_trace;
};

/// W = (|C| + |C|^T) / 2
inline AffinityMatrix affinity(const CoefficientMatrix& c) {
  const Matrix abs_c = c.entries().cwiseAbs();
  Matrix w = 0.5 * (abs_c + abs_c.transpose());
  w.diagonal().setZero();
  return AffinityMatrix::from_matrix(std::move(w));
}

struct KMeansOptions {
  int restarts = 20;
  int max_iters = 300;
  double tolerance = 1e-9;  // max centroid movement
};

namespace detail {

inline double sq_dist(const Matrix& points, Eigen::Index i, const Matrix& centers, Eigen::Index c) {
  return (points.row(i) - centers.row(c)).squaredNorm();
}

inline Matrix kmeans_pp_seed(const Matrix& points, int k, Rng& rng) {
  const Eigen::Index n = points.rows();
  Matrix centers(k, points.cols());
  centers.row(0) = points.row(static_cast<Eigen::Index>(uniform_index(rng, static_cast<std::uint64_t>(n))));
  Vector best = Vector::Constant(n, std::numeric_limits<double>::infinity());
  for (int c = 1; c < k; ++c) {
    for (Eigen::Index i = 0; i < n; ++i) best(i) = std::min(best(i), sq_dist(points, i, centers, c - 1));
    const double total = best.sum();
    Eigen::Index pick = 0;
    if (total > 0.0) {
      const double target = uniform01(rng) * total;
      double acc = 0.0;
      pick = n - 1;
      for (Eigen::Index i = 0; i < n; ++i) {
        acc += best(i);
        if (acc > target && best(i) > 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = static_cast<Eigen::Index>(uniform_index(rng, static_cast<std::uint64_t>(n)));
    }
    centers.row(c) = points.row(pick);
  }
  return centers;
}

/// One seeded Lloyd run.
inline ClusteringResult lloyd(const Matrix& points, int k, Rng& rng, const KMeansOptions& opt) {
  const Eigen::Index n = points.rows();
  Matrix centers = kmeans_pp_seed(points, k, rng);
  ClusteringResult res;
  res.k = k;
  res.labels.assign(static_cast<std::size_t>(n), 0);
  Vector dist(n);

  for (int it = 0; it < opt.max_iters; ++it) {
    // Assignment.
    std::vector<Eigen::Index> counts(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      int best_c = 0;
      double best_d = sq_dist(points, i, centers, 0);
      for (int c = 1; c < k; ++c) {
        const double dd = sq_dist(points, i, centers, c);
        if (dd < best_d) {
          best_d = dd;
          best_c = c;
        }
      }
      res.labels[static_cast<std::size_t>(i)] = best_c;
      dist(i) = best_d;
      ++counts[static_cast<std::size_t>(best_c)];
    }
    // Empty clusters take over the point farthest from its centroid.
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] != 0) continue;
      Eigen::Index far = 0;
      double far_d = -1.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (counts[static_cast<std::size_t>(res.labels[static_cast<std::size_t>(i)])] > 1 && dist(i) > far_d) {
          far_d = dist(i);
          far = i;
        }
      }
      if (far_d <= 0.0) continue;  // every remaining point sits on its centroid
      --counts[static_cast<std::size_t>(res.labels[static_cast<std::size_t>(far)])];
      res.labels[static_cast<std::size_t>(far)] = c;
      ++counts[static_cast<std::size_t>(c)];
      centers.row(c) = points.row(far);
      dist(far) = 0.0;
    }
    res.inertia_trace.push_back(dist.sum());

    // Update.
    Matrix next = Matrix::Zero(k, points.cols());
    for (Eigen::Index i = 0; i < n; ++i) next.row(res.labels[static_cast<std::size_t>(i)]) += points.row(i);
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0)
        next.row(c) /= static_cast<double>(counts[static_cast<std::size_t>(c)]);
      else
        next.row(c) = centers.row(c);
    }
    const double movement = (next - centers).rowwise().norm().maxCoeff();
    centers = std::move(next);
    res.iterations = it + 1;
    if (movement < opt.tolerance) break;
  }

  // Inertia of the final labels against the final centroids.
  double inertia = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) inertia += sq_dist(points, i, centers, res.labels[static_cast<std::size_t>(i)]);
  res.inertia = inertia;
  const std::set<int> distinct(res.labels.begin(), res.labels.end());
  res.degenerate = static_cast<int>(distinct.size()) < k;
  return res;
}

}  // namespace detail

/// k-means++ seeding followed by Lloyd iterations; the restart with the
/// lowest inertia wins, ties going to the lowest restart index.
inline ClusteringResult kmeans(const Matrix& points, int k, std::uint64_t seed, const KMeansOptions& opt = {}) {
  if (k < 1) throw UsageError("kmeans: k must be positive");
  if (points.rows() == 0) throw UsageError("kmeans: no points");
  if (k > points.rows()) throw UsageError("kmeans: k exceeds the number of points");
  if (opt.restarts < 1 || opt.max_iters < 1) throw UsageError("kmeans: restarts and max_iters must be positive");
  if (!points.allFinite()) throw NumericError("kmeans: non-finite coordinates");

  ClusteringResult best;
  for (int r = 0; r < opt.restarts; ++r) {
    Rng rng = make_rng(seed, static_cast<std::uint64_t>(r));
    ClusteringResult res = detail::lloyd(points, k, rng, opt);
    if (r == 0 || res.inertia < best.inertia) best = std::move(res);
  }
  return best;
}

inline ClusteringResult kmeans(const Matrix& points, int k, std::uint64_t seed, int restarts) {
  KMeansOptions opt;
  opt.restarts = restarts;
  return kmeans(points, k, seed, opt);
}

/// Row-normalized spectral embedding from the k eigenvectors of
/// L_sym = I - D^{-1/2} W D^{-1/2} with the smallest eigenvalues.
inline Matrix spectral_embedding(const AffinityMatrix& w, int k) {
  const Matrix& wm = w.entries();
  const Eigen::Index n = wm.rows();
  if (k < 1 || k > n) throw UsageError("spectral_embedding: k must lie in [1, N]");
  if (wm.cwiseAbs().maxCoeff() == 0.0) throw DegenerateInputError("spectral_cluster: affinity matrix is all zero");

  const Vector degree = wm.rowwise().sum();
  const Vector inv_sqrt = degree.unaryExpr([](double v) { return v > 0.0 ? 1.0 / std::sqrt(v) : 0.0; });
  Matrix laplacian = -(inv_sqrt.asDiagonal() * wm * inv_sqrt.asDiagonal());
  laplacian.diagonal().array() += 1.0;
  laplacian = 0.5 * (laplacian + laplacian.transpose());

  Eigen::SelfAdjointEigenSolver<Matrix> solver(laplacian);
  if (solver.info() != Eigen::Success) throw NumericError("spectral_cluster: eigensolver failed");
  Matrix embedding = solver.eigenvectors().leftCols(k);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double norm = embedding.row(i).norm();
    if (norm > 0.0) embedding.row(i) /= norm;
  }
  return embedding;
}

/// Normalized spectral clustering of an affinity matrix into k groups.
inline ClusteringResult spectral_cluster(const AffinityMatrix& w, int k, std::uint64_t seed,
                                         const KMeansOptions& opt = {}) {
  if (k < 2) throw UsageError("spectral_cluster: k must be at least 2");
  if (k > w.size()) throw UsageError("spectral_cluster: k exceeds the number of points");
  return kmeans(spectral_embedding(w, k), k, seed, opt);
}

}  // namespace spdc
