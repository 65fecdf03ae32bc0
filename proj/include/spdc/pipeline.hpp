#pragma once

// Kernel subspace clustering end to end: Gram -> ADMM -> affinity ->
// spectral clustering, plus the k-means baselines.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spdc/clustering.hpp"
#include "spdc/error.hpp"
#include "spdc/kernels.hpp"
#include "spdc/solver.hpp"
#include "spdc/spd.hpp"

namespace spdc {

enum class Method { ksscr, kssce, kmeans_log, kmeans_raw };

inline std::string_view to_string(Method m) {
  switch (m) {
    case Method::ksscr:
      return "ksscr";
    case Method::kssce:
      return "kssce";
    case Method::kmeans_log:
      return "kmeans_log";
    case Method::kmeans_raw:
      return "kmeans_raw";
  }
  return "unknown";
}

inline Method parse_method(std::string_view name) {
  if (name == "ksscr") return Method::ksscr;
  if (name == "kssce") return Method::kssce;
  if (name == "kmeans_log") return Method::kmeans_log;
  if (name == "kmeans_raw") return Method::kmeans_raw;
  throw UsageError("unknown method '" + std::string(name) + "'");
}

inline bool uses_solver(Method m) { return m == Method::ksscr || m == Method::kssce; }

/// ksscr takes a Riemannian kernel, kssce the Euclidean one.
inline bool kernel_matches(Method m, KernelKind k) {
  switch (m) {
    case Method::ksscr:
      return k == KernelKind::log_euclidean_gaussian || k == KernelKind::stein;
    case Method::kssce:
      return k == KernelKind::euclidean_gaussian;
    default:
      return true;
  }
}

/// Rows are the flattened matrices, optionally after the matrix logarithm.
inline Matrix vectorize(std::span<const SpdMatrix> data, bool take_log) {
  if (data.empty()) throw UsageError("vectorize: empty dataset");
  const Eigen::Index d = data[0].dim();
  Matrix rows(static_cast<Eigen::Index>(data.size()), d * d);
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data[i].dim() != d) throw DimensionError("vectorize: points have differing dimensions");
    const Matrix m = take_log ? spd_log(data[i]) : data[i].matrix();
    rows.row(static_cast<Eigen::Index>(i)) = m.reshaped().transpose();
  }
  return rows;
}

/// Names the step that failed so callers can report it.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::exception& cause)
      : Error(stage + ": " + cause.what()), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

struct PipelineOptions {
  KernelSpec kernel;
  SolverConfig solver;
  KMeansOptions kmeans;
  unsigned threads = 1;
};

struct PipelineResult {
  ClusteringResult clustering;
  std::optional<SolveReport> report;       // solver methods only
  std::optional<AffinityMatrix> affinity;  // solver methods only
};

/// Kernel sparse subspace clustering of `data` into k groups.
inline PipelineResult subspace_cluster(std::span<const SpdMatrix> data, int k, const PipelineOptions& opt,
                                       std::uint64_t seed) {
  PipelineResult out;
  KernelGram g;
  try {
    g = gram(data, opt.kernel, opt.threads);
  } catch (const NumericError& e) {
    throw StageError("gram", e);
  }
  try {
    out.report = solve(g, opt.solver);
  } catch (const NumericError& e) {
    throw StageError("solver", e);
  }
  out.affinity = affinity(out.report->C);
  if (out.affinity->entries().cwiseAbs().maxCoeff() == 0.0) {
    // Shrinkage removed every coefficient (e.g. a saturated Gram): there is
    // no graph to cut, so every point lands in one cluster.
    out.clustering.k = k;
    out.clustering.labels.assign(data.size(), 0);
    out.clustering.degenerate = true;
    return out;
  }
  try {
    out.clustering = spectral_cluster(*out.affinity, k, seed, opt.kmeans);
  } catch (const NumericError& e) {
    throw StageError("spectral clustering", e);
  }
  return out;
}

/// Dispatches on `method`; kernel-method consistency is checked by callers.
inline PipelineResult cluster_with(Method method, std::span<const SpdMatrix> data, int k,
                                   const PipelineOptions& opt, std::uint64_t seed) {
  if (k < 2 || k > static_cast<int>(data.size())) throw UsageError("cluster count must lie in [2, N]");
  if (uses_solver(method)) return subspace_cluster(data, k, opt, seed);
  PipelineResult out;
  out.clustering = kmeans(vectorize(data, method == Method::kmeans_log), k, seed, opt.kmeans);
  return out;
}

}  // namespace spdc
