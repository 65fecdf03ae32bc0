#pragma once

// Kernels on SPD matrices and Gram-matrix assembly.

#include <cmath>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spdc/error.hpp"
#include "spdc/parallel.hpp"
#include "spdc/spd.hpp"

namespace spdc {

enum class KernelKind { log_euclidean_gaussian, stein, euclidean_gaussian };

inline std::string_view to_string(KernelKind kind) {
  switch (kind) {
    case KernelKind::log_euclidean_gaussian:
      return "log_euclidean_gaussian";
    case KernelKind::stein:
      return "stein";
    case KernelKind::euclidean_gaussian:
      return "euclidean_gaussian";
  }
  return "unknown";
}

inline KernelKind parse_kernel_kind(std::string_view name) {
  if (name == "log_euclidean_gaussian") return KernelKind::log_euclidean_gaussian;
  if (name == "stein") return KernelKind::stein;
  if (name == "euclidean_gaussian") return KernelKind::euclidean_gaussian;
  throw UsageError("unknown kernel kind '" + std::string(name) + "'");
}

struct KernelSpec {
  KernelKind kind = KernelKind::log_euclidean_gaussian;
  double gamma = 0.5;  // Gaussian width
  double beta = 1.0;   // Stein exponent

  void validate() const {
    if (kind == KernelKind::stein) {
      if (!(beta > 0.0) || !std::isfinite(beta)) throw UsageError("kernel: beta must be positive");
    } else if (!(gamma > 0.0) || !std::isfinite(gamma)) {
      throw UsageError("kernel: gamma must be positive");
    }
  }
};

/// True when the Stein kernel with exponent beta is known positive definite
/// on d x d matrices: beta in {1/2, 1, ..., (d-1)/2} or beta > (d-1)/2.
inline bool stein_beta_is_pd(double beta, Eigen::Index d) {
  const double upper = 0.5 * static_cast<double>(d - 1);
  if (beta > upper) return true;
  const double twice = 2.0 * beta;
  return beta >= 0.5 && std::abs(twice - std::round(twice)) < 1e-12;
}

struct KernelGram {
  Matrix entries;
  KernelSpec spec;
  /// Set for Stein kernels whose beta is outside the known-PD set.
  bool indefinite_warning = false;

  Eigen::Index size() const { return entries.rows(); }
};

inline double kernel_log_euclidean_gaussian(const SpdMatrix& x, const SpdMatrix& y, double gamma) {
  require_same_dim(x, y, "kernel_log_euclidean_gaussian");
  return std::exp(-gamma * (spd_log(x) - spd_log(y)).squaredNorm());
}

inline double kernel_stein(const SpdMatrix& x, const SpdMatrix& y, double beta) {
  require_same_dim(x, y, "kernel_stein");
  return std::exp(-beta * stein_divergence(x, y));
}

inline double kernel_euclidean_gaussian(const SpdMatrix& x, const SpdMatrix& y, double gamma) {
  require_same_dim(x, y, "kernel_euclidean_gaussian");
  return std::exp(-gamma * (x.matrix() - y.matrix()).squaredNorm());
}

inline double kernel_value(const SpdMatrix& x, const SpdMatrix& y, const KernelSpec& spec) {
  switch (spec.kind) {
    case KernelKind::log_euclidean_gaussian:
      return kernel_log_euclidean_gaussian(x, y, spec.gamma);
    case KernelKind::stein:
      return kernel_stein(x, y, spec.beta);
    case KernelKind::euclidean_gaussian:
      return kernel_euclidean_gaussian(x, y, spec.gamma);
  }
  throw UsageError("kernel_value: unknown kernel kind");
}

/// Gram matrix K with K(i, j) = kappa(X_j, X_i). Log-Euclidean logs are
/// computed once per point. Rows are distributed over `threads` workers;
/// every entry is computed by the same expression regardless of the split,
/// so the result does not depend on the thread count.
inline KernelGram gram(std::span<const SpdMatrix> data, const KernelSpec& spec, unsigned threads = 1) {
  spec.validate();
  const auto n = static_cast<Eigen::Index>(data.size());
  if (n < 2) throw UsageError("gram: need at least two points");
  const Eigen::Index d = data[0].dim();
  for (const auto& x : data)
    if (x.dim() != d) throw DimensionError("gram: points have differing dimensions");

  KernelGram out;
  out.spec = spec;
  out.indefinite_warning = spec.kind == KernelKind::stein && !stein_beta_is_pd(spec.beta, d);
  out.entries = Matrix::Identity(n, n);

  switch (spec.kind) {
    case KernelKind::log_euclidean_gaussian: {
      std::vector<Matrix> logs(data.size());
      parallel_for(data.size(), threads, [&](std::size_t i) { logs[i] = spd_log(data[i]); });
      parallel_for(data.size(), threads, [&](std::size_t i) {
        const auto ii = static_cast<Eigen::Index>(i);
        for (Eigen::Index j = ii + 1; j < n; ++j) {
          const double k = std::exp(-spec.gamma * (logs[j] - logs[i]).squaredNorm());
          out.entries(ii, j) = k;
          out.entries(j, ii) = k;
        }
      });
      break;
    }
    case KernelKind::stein: {
      std::vector<double> half_logdet(data.size());
      parallel_for(data.size(), threads,
                   [&](std::size_t i) { half_logdet[i] = 0.5 * log_det(data[i].matrix()); });
      parallel_for(data.size(), threads, [&](std::size_t i) {
        const auto ii = static_cast<Eigen::Index>(i);
        for (Eigen::Index j = ii + 1; j < n; ++j) {
          const Matrix mid = 0.5 * (data[j].matrix() + data[i].matrix());
          const double div = std::max(log_det(mid) - half_logdet[i] - half_logdet[j], 0.0);
          const double k = std::exp(-spec.beta * div);
          out.entries(ii, j) = k;
          out.entries(j, ii) = k;
        }
      });
      break;
    }
    case KernelKind::euclidean_gaussian: {
      parallel_for(data.size(), threads, [&](std::size_t i) {
        const auto ii = static_cast<Eigen::Index>(i);
        for (Eigen::Index j = ii + 1; j < n; ++j) {
          const double k = std::exp(-spec.gamma * (data[j].matrix() - data[i].matrix()).squaredNorm());
          out.entries(ii, j) = k;
          out.entries(j, ii) = k;
        }
      });
      break;
    }
  }
  // The solver assumes K == K^T.
  out.entries = 0.5 * (out.entries + out.entries.transpose());
  return out;
}

/// Smallest eigenvalue of a Gram matrix.
inline double min_eigenvalue(const Matrix& sym) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericError("min_eigenvalue: eigensolver failed");
  return solver.eigenvalues()(0);
}

}  // namespace spdc
