#pragma once

// ADMM solver for the kernelized sparse self-expression problem
//
//   min_C  lambda * ||C||_1 - 2 tr(K C) + tr(C K C^T)   s.t. diag(C) = 0
//
// split as A = C - diag(C) with multiplier Delta and penalty rho.

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <cmath>
#include <sstream>
#include <utility>
#include <vector>

#include "spdc/error.hpp"
#include "spdc/kernels.hpp"
#include "spdc/spd.hpp"

namespace spdc {

struct SolverConfig {
  double lambda = 0.04;
  double rho = 1.0;
  double epsilon = 1e-4;
  int max_iters = 500;

  void validate() const {
    auto positive = [](double v) { return v > 0.0 && std::isfinite(v); };
    if (!positive(lambda)) throw UsageError("solver: lambda must be positive");
    if (!positive(rho)) throw UsageError("solver: rho must be positive");
    if (!positive(epsilon)) throw UsageError("solver: epsilon must be positive");
    if (max_iters < 1) throw UsageError("solver: max_iters must be at least 1");
  }
};

/// N x N self-expression coefficients with an exactly zero diagonal.
class CoefficientMatrix {
 public:
  CoefficientMatrix() = default;

  /// Rejects any nonzero diagonal entry.
  explicit CoefficientMatrix(Matrix entries) : entries_(std::move(entries)) {
    if (entries_.rows() != entries_.cols()) throw DimensionError("CoefficientMatrix: must be square");
    for (Eigen::Index i = 0; i < entries_.rows(); ++i)
      if (entries_(i, i) != 0.0) throw UsageError("CoefficientMatrix: diagonal must be zero");
  }

  static CoefficientMatrix zero(Eigen::Index n) { return CoefficientMatrix(Matrix::Zero(n, n)); }

  /// Copies `m` with its diagonal overwritten by zeros.
  static CoefficientMatrix strip_diagonal(Matrix m) {
    m.diagonal().setZero();
    return CoefficientMatrix(std::move(m));
  }

  Eigen::Index size() const { return entries_.rows(); }
  const Matrix& entries() const { return entries_; }

 private:
  Matrix entries_;
};

/// The ADMM triple plus the residuals of the most recent iteration.
struct SolverState {
  Matrix A;
  CoefficientMatrix C;
  Matrix Delta;
  int iter = 0;
  double primal_residual = 0.0;  // ||A - C||_inf
  double step_residual = 0.0;    // ||A_{t+1} - A_t||_inf
};

struct ResidualPair {
  double primal = 0.0;
  double step = 0.0;
};

struct SolveReport {
  CoefficientMatrix C;
  bool converged = false;
  int iters_used = 0;
  std::vector<double> objective_trace;
  std::vector<ResidualPair> residual_trace;
  SolverState final_state;
};

/// Elementwise max-absolute norm.
inline double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

/// Soft thresholding sgn(v) * max(|v| - eta, 0).
inline double shrink(double v, double eta) {
  const double mag = std::abs(v) - eta;
  if (mag <= 0.0) return 0.0;
  return v > 0.0 ? mag : -mag;
}

inline Matrix shrink(const Matrix& m, double eta) {
  return m.unaryExpr([eta](double v) { return shrink(v, eta); });
}

inline void require_same_size(const Matrix& a, const Matrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    std::ostringstream os;
    os << what << ": size mismatch (" << a.rows() << "x" << a.cols() << " vs " << b.rows() << "x"
       << b.cols() << ")";
    throw DimensionError(os.str());
  }
}

/// lambda * ||C||_1 - 2 tr(K C) + tr(C K C^T). The constant tr(K) of the
/// feature-space residual is omitted.
inline double objective(const CoefficientMatrix& c, const Matrix& k, double lambda) {
  require_same_size(c.entries(), k, "objective");
  const Matrix& cm = c.entries();
  const double l1 = cm.cwiseAbs().sum();
  const double linear = (k * cm).trace();
  const double quadratic = (cm * k).cwiseProduct(cm).sum();  // tr(C K C^T)
  return lambda * l1 - 2.0 * linear + quadratic;
}

inline double objective(const CoefficientMatrix& c, const KernelGram& k, double lambda) {
  return objective(c, k.entries, lambda);
}

/// Cholesky factor of (2K + rho I), computed once per solve.
class AUpdateFactor {
 public:
  AUpdateFactor(const Matrix& k, double rho) : rho_(rho) {
    if (k.rows() != k.cols()) throw DimensionError("AUpdateFactor: K must be square");
    Matrix system = 2.0 * k;
    system.diagonal().array() += rho;
    llt_.compute(system);
    if (llt_.info() != Eigen::Success)
      throw NumericError("A-update: 2K + rho*I is not positive definite (indefinite Gram?)");
  }

  double rho() const { return rho_; }
  Eigen::Index size() const { return llt_.rows(); }

  /// X such that X (2K + rho I) = rhs.
  Matrix right_solve(const Matrix& rhs) const {
    // The system matrix is symmetric, so X^T = M^{-1} rhs^T.
    return llt_.solve(rhs.transpose()).transpose();
  }

 private:
  double rho_;
  Eigen::LLT<Matrix> llt_;
};

/// A = (2K + rho*C~ - Delta)(2K + rho*I)^{-1}, where C~ = C - diag(C).
inline Matrix update_A(const Matrix& k, const Matrix& c_tilde, const Matrix& delta,
                       const AUpdateFactor& factor) {
  require_same_size(k, c_tilde, "update_A");
  require_same_size(k, delta, "update_A");
  if (factor.size() != k.rows()) throw DimensionError("update_A: factor size mismatch");
  Matrix c_off = c_tilde;
  c_off.diagonal().setZero();
  return factor.right_solve(2.0 * k + factor.rho() * c_off - delta);
}

/// C = J - diag(J) with J = S_{lambda/rho}(A + Delta/rho).
inline CoefficientMatrix update_C(const Matrix& a, const Matrix& delta, double lambda, double rho) {
  require_same_size(a, delta, "update_C");
  if (!(rho > 0.0)) throw UsageError("update_C: rho must be positive");
  return CoefficientMatrix::strip_diagonal(shrink(a + delta / rho, lambda / rho));
}

/// Delta + rho * (A - C + diag(C)).
inline Matrix update_Delta(const Matrix& delta, const Matrix& a, const CoefficientMatrix& c, double rho) {
  require_same_size(delta, a, "update_Delta");
  require_same_size(a, c.entries(), "update_Delta");
  Matrix constraint = a - c.entries();
  constraint.diagonal() += c.entries().diagonal();
  return delta + rho * constraint;
}

/// Runs ADMM from A = C = Delta = 0 until both ||A - C||_inf <= epsilon and
/// ||A_{t+1} - A_t||_inf <= epsilon, or max_iters is reached.
inline SolveReport solve(const Matrix& k, const SolverConfig& config) {
  config.validate();
  if (k.rows() != k.cols() || k.rows() == 0) throw DimensionError("solve: K must be square and non-empty");
  if (!k.allFinite()) throw NumericError("solve: K has non-finite entries");
  if (!detail::is_symmetric(k)) throw UsageError("solve: K must be symmetric");

  const Eigen::Index n = k.rows();
  const AUpdateFactor factor(k, config.rho);

  SolverState state{Matrix::Zero(n, n), CoefficientMatrix::zero(n), Matrix::Zero(n, n)};
  SolveReport report;
  report.objective_trace.reserve(static_cast<std::size_t>(config.max_iters));
  report.residual_trace.reserve(static_cast<std::size_t>(config.max_iters));

  for (int t = 0; t < config.max_iters; ++t) {
    Matrix a_next = update_A(k, state.C.entries(), state.Delta, factor);
    CoefficientMatrix c_next = update_C(a_next, state.Delta, config.lambda, config.rho);
    state.Delta = update_Delta(state.Delta, a_next, c_next, config.rho);

    state.step_residual = max_abs(a_next - state.A);
    state.primal_residual = max_abs(a_next - c_next.entries());
    state.A = std::move(a_next);
    state.C = std::move(c_next);
    state.iter = t + 1;

    report.objective_trace.push_back(objective(state.C, k, config.lambda));
    report.residual_trace.push_back({state.primal_residual, state.step_residual});

    if (state.primal_residual <= config.epsilon && state.step_residual <= config.epsilon) {
      report.converged = true;
      break;
    }
  }

  report.iters_used = state.iter;
  report.C = state.C;
  report.final_state = std::move(state);
  return report;
}

inline SolveReport solve(const KernelGram& k, const SolverConfig& config) { return solve(k.entries, config); }

}  // namespace spdc
