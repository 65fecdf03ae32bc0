#pragma once

// Symmetric positive definite matrices: construction, matrix functions via
// the symmetric eigendecomposition, and Riemannian (dis)similarities.

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "spdc/error.hpp"

namespace spdc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Eigenvalues in non-increasing order with matching column eigenvectors.
struct EigenPair {
  Vector values;
  Matrix vectors;
};

namespace detail {

inline void require_square(const Matrix& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    std::ostringstream os;
    os << what << ": expected a non-empty square matrix, got " << m.rows() << "x" << m.cols();
    throw DimensionError(os.str());
  }
}

inline void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) throw NumericError(std::string(what) + ": non-finite entries");
}

inline bool is_symmetric(const Matrix& m, double rel_tol = 1e-12) {
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = i + 1; j < m.cols(); ++j)
      if (std::abs(m(i, j) - m(j, i)) > rel_tol * std::max(1.0, std::abs(m(i, j)))) return false;
  return true;
}

inline Matrix symmetric_part(const Matrix& m) { return 0.5 * (m + m.transpose()); }

/// V * diag(f(values)) * V^T
template <typename Fn>
Matrix reassemble(const EigenPair& eig, Fn&& f) {
  const Vector mapped = eig.values.unaryExpr(f);
  Matrix out = eig.vectors * mapped.asDiagonal() * eig.vectors.transpose();
  return symmetric_part(out);
}

}  // namespace detail

/// Eigendecomposition of a symmetric matrix, values sorted descending.
inline EigenPair eigen_sym(const Matrix& sym) {
  detail::require_square(sym, "eigen_sym");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
  if (solver.info() != Eigen::Success) throw NumericError("eigen_sym: eigensolver did not converge");
  // Eigen returns ascending order.
  return {solver.eigenvalues().reverse(), solver.eigenvectors().rowwise().reverse()};
}

/// Immutable d x d symmetric positive definite matrix.
class SpdMatrix {
 public:
  /// Validates symmetry (1e-12 relative) and strict positive definiteness.
  static SpdMatrix from_matrix(const Matrix& m) {
    detail::require_square(m, "SpdMatrix");
    detail::require_finite(m, "SpdMatrix");
    if (!detail::is_symmetric(m)) throw NumericError("SpdMatrix: input is not symmetric");
    Matrix sym = detail::symmetric_part(m);
    Eigen::LLT<Matrix> llt(sym);
    if (llt.info() != Eigen::Success) throw NumericError("SpdMatrix: input is not positive definite");
    return SpdMatrix(std::move(sym));
  }

  static SpdMatrix identity(Eigen::Index d) { return SpdMatrix(Matrix::Identity(d, d)); }

  Eigen::Index dim() const { return m_.rows(); }
  const Matrix& matrix() const { return m_; }
  double operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }

  EigenPair eigen() const { return eigen_sym(m_); }

 private:
  explicit SpdMatrix(Matrix m) : m_(std::move(m)) {}
  friend SpdMatrix make_spd(const Matrix&, double);
  friend SpdMatrix spd_exp(const Matrix&);

  Matrix m_;
};

/// Scale-aware eigenvalue floor: 1e-6 * (trace(sym(raw)) / d + 1).
inline double default_floor(const Matrix& raw) {
  detail::require_square(raw, "default_floor");
  const double mean_diag = raw.trace() / static_cast<double>(raw.rows());
  return 1e-6 * (std::abs(mean_diag) + 1.0);
}

/// Symmetrizes raw, then clamps every eigenvalue from below at `floor`.
inline SpdMatrix make_spd(const Matrix& raw, double floor) {
  detail::require_square(raw, "make_spd");
  detail::require_finite(raw, "make_spd");
  if (!(floor > 0.0) || !std::isfinite(floor)) throw UsageError("make_spd: floor must be positive");
  const EigenPair eig = eigen_sym(detail::symmetric_part(raw));
  return SpdMatrix(detail::reassemble(eig, [floor](double v) { return std::max(v, floor); }));
}

inline SpdMatrix make_spd(const Matrix& raw) { return make_spd(raw, default_floor(raw)); }

/// Principal matrix logarithm. The result is symmetric but generally not SPD.
inline Matrix spd_log(const SpdMatrix& x) {
  const EigenPair eig = x.eigen();
  if (!(eig.values.minCoeff() > 0.0)) throw NumericError("spd_log: non-positive eigenvalue");
  return detail::reassemble(eig, [](double v) { return std::log(v); });
}

/// Matrix exponential of a symmetric matrix; always SPD.
inline SpdMatrix spd_exp(const Matrix& sym) {
  detail::require_square(sym, "spd_exp");
  detail::require_finite(sym, "spd_exp");
  const EigenPair eig = eigen_sym(detail::symmetric_part(sym));
  Matrix out = detail::reassemble(eig, [](double v) { return std::exp(v); });
  if (!out.allFinite()) throw NumericError("spd_exp: overflow");
  return SpdMatrix(std::move(out));
}

/// log|X| through the Cholesky factor.
inline double log_det(const Matrix& spd) {
  Eigen::LLT<Matrix> llt(spd);
  if (llt.info() != Eigen::Success) throw NumericError("log_det: matrix is not positive definite");
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

inline void require_same_dim(const SpdMatrix& x, const SpdMatrix& y, const char* what) {
  if (x.dim() != y.dim()) {
    std::ostringstream os;
    os << what << ": dimension mismatch (" << x.dim() << " vs " << y.dim() << ")";
    throw DimensionError(os.str());
  }
}

/// Affine-invariant geodesic distance ||log(X^{-1/2} Y X^{-1/2})||_F.
inline double geodesic_airm(const SpdMatrix& x, const SpdMatrix& y) {
  require_same_dim(x, y, "geodesic_airm");
  const EigenPair ex = x.eigen();
  const Matrix inv_sqrt = detail::reassemble(ex, [](double v) { return 1.0 / std::sqrt(v); });
  const Matrix inner = detail::symmetric_part(inv_sqrt * y.matrix() * inv_sqrt);
  Eigen::SelfAdjointEigenSolver<Matrix> solver(inner, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericError("geodesic_airm: eigensolver failed");
  const Vector& lambda = solver.eigenvalues();
  if (!(lambda.minCoeff() > 0.0)) throw NumericError("geodesic_airm: non-positive eigenvalue");
  return std::sqrt(lambda.array().log().square().sum());
}

/// Jensen-Bregman LogDet (Stein) divergence log|(X+Y)/2| - 0.5 log|XY|.
inline double stein_divergence(const SpdMatrix& x, const SpdMatrix& y) {
  require_same_dim(x, y, "stein_divergence");
  const Matrix mid = 0.5 * (x.matrix() + y.matrix());
  const double value = log_det(mid) - 0.5 * (log_det(x.matrix()) + log_det(y.matrix()));
  // Exact zero at X == Y; clamp round-off below zero elsewhere.
  return std::max(value, 0.0);
}

}  // namespace spdc
