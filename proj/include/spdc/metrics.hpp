#pragma once

// External clustering quality indices: matched accuracy and NMI.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <span>
#include <vector>

#include "spdc/error.hpp"

namespace spdc {

/// Contingency table between two labelings. Rows index the distinct values
/// of `a` in ascending order, columns those of `b`.
struct Contingency {
  std::vector<std::vector<long>> counts;
  std::vector<long> row_sums;
  std::vector<long> col_sums;
  long total = 0;
};

inline Contingency contingency(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) throw UsageError("metrics: label vectors differ in length");
  if (a.empty()) throw UsageError("metrics: label vectors are empty");
  std::map<int, std::size_t> ra, rb;
  for (int v : a) ra.emplace(v, 0);
  for (int v : b) rb.emplace(v, 0);
  std::size_t idx = 0;
  for (auto& [v, i] : ra) i = idx++;
  idx = 0;
  for (auto& [v, i] : rb) i = idx++;

  Contingency t;
  t.counts.assign(ra.size(), std::vector<long>(rb.size(), 0));
  t.row_sums.assign(ra.size(), 0);
  t.col_sums.assign(rb.size(), 0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const std::size_t r = ra[a[i]], c = rb[b[i]];
    ++t.counts[r][c];
    ++t.row_sums[r];
    ++t.col_sums[c];
  }
  t.total = static_cast<long>(a.size());
  return t;
}

/// Minimum-cost perfect assignment on an n x m cost matrix (n <= m), by the
/// shortest augmenting path form of the Hungarian method. Returns the
/// column assigned to each row.
inline std::vector<int> hungarian_min(const std::vector<std::vector<double>>& cost) {
  const int n = static_cast<int>(cost.size());
  if (n == 0) return {};
  const int m = static_cast<int>(cost[0].size());
  if (m < n) throw UsageError("hungarian_min: need at least as many columns as rows");
  const double inf = std::numeric_limits<double>::infinity();
  // 1-based potentials; p[j] is the row matched to column j.
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<int> p(m + 1, 0), way(m + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(m + 1, inf);
    std::vector<char> used(m + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> assignment(n, -1);
  for (int j = 1; j <= m; ++j)
    if (p[j] != 0) assignment[p[j] - 1] = j - 1;
  return assignment;
}

/// Fraction of points that agree under the best one-to-one matching of
/// predicted to true cluster ids.
inline double accuracy(std::span<const int> pred, std::span<const int> truth) {
  const Contingency t = contingency(pred, truth);
  const std::size_t rows = t.counts.size(), cols = t.col_sums.size();
  const std::size_t side = std::max(rows, cols);
  // Square, zero-padded, negated counts: minimizing cost maximizes agreement.
  std::vector<std::vector<double>> cost(side, std::vector<double>(side, 0.0));
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) cost[r][c] = -static_cast<double>(t.counts[r][c]);
  const std::vector<int> match = hungarian_min(cost);
  long agree = 0;
  for (std::size_t r = 0; r < rows; ++r) {
    const auto c = static_cast<std::size_t>(match[r]);
    if (c < cols) agree += t.counts[r][c];
  }
  return static_cast<double>(agree) / static_cast<double>(t.total);
}

/// True when the two labelings are the same partition up to renaming.
inline bool is_bijective(const Contingency& t) {
  if (t.row_sums.size() != t.col_sums.size()) return false;
  for (const auto& row : t.counts)
    if (std::count_if(row.begin(), row.end(), [](long v) { return v != 0; }) != 1) return false;
  return true;
}

/// I(pred; truth) / sqrt(H(pred) H(truth)), natural logarithms.
inline double nmi(std::span<const int> pred, std::span<const int> truth) {
  const Contingency t = contingency(pred, truth);
  const double n = static_cast<double>(t.total);
  auto entropy = [n](const std::vector<long>& sums) {
    double h = 0.0;
    for (long s : sums)
      if (s > 0) {
        const double p = static_cast<double>(s) / n;
        h -= p * std::log(p);
      }
    return h;
  };
  const double ha = entropy(t.row_sums);
  const double hb = entropy(t.col_sums);
  if (t.row_sums.size() == 1 && t.col_sums.size() == 1) return 1.0;
  if (ha <= 0.0 || hb <= 0.0) return 0.0;
  if (is_bijective(t)) return 1.0;  // I == H(pred) == H(truth)

  double mi = 0.0;
  for (std::size_t r = 0; r < t.counts.size(); ++r)
    for (std::size_t c = 0; c < t.col_sums.size(); ++c) {
      const long nij = t.counts[r][c];
      if (nij == 0) continue;
      const double joint = static_cast<double>(nij);
      mi += joint / n *
            std::log(joint * n / (static_cast<double>(t.row_sums[r]) * static_cast<double>(t.col_sums[c])));
    }
  const double value = mi / std::sqrt(ha * hb);
  return std::clamp(value, 0.0, 1.0);
}

}  // namespace spdc
