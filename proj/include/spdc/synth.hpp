#pragma once

// Labeled synthetic SPD datasets: clusters are drawn around random
// log-domain centers and mapped back with the symmetric exponential.

#include <cstdint>
#include <vector>

#include "spdc/error.hpp"
#include "spdc/random.hpp"
#include "spdc/spd.hpp"

namespace spdc {

struct SynthSpec {
  int clusters = 2;
  int points_per_cluster = 10;
  int dim = 3;
  double center_spread = 1.0;
  double noise = 0.05;
  std::uint64_t seed = 0;

  void validate() const {
    if (clusters < 2) throw UsageError("synth: clusters must be at least 2");
    if (points_per_cluster < 2) throw UsageError("synth: points_per_cluster must be at least 2");
    if (dim < 2) throw UsageError("synth: dim must be at least 2");
    if (!(center_spread > 0.0)) throw UsageError("synth: center_spread must be positive");
    if (!(noise >= 0.0)) throw UsageError("synth: noise must be nonnegative");
  }
};

struct LabeledDataset {
  std::vector<SpdMatrix> points;
  std::vector<int> labels;
};

/// Symmetric matrix whose entries are (U + U^T)/2 with U uniform in [-1, 1].
inline Matrix random_symmetric(int d, Rng& rng) {
  Matrix u(d, d);
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < d; ++i) u(i, j) = uniform(rng, -1.0, 1.0);
  return 0.5 * (u + u.transpose());
}

/// Points are exp(S_c + noise * E) for a center S_c per cluster. Labels are
/// cluster-major: cluster c occupies rows [c*m, (c+1)*m).
inline LabeledDataset generate(const SynthSpec& spec) {
  spec.validate();
  Rng rng = make_rng(spec.seed, 0x5eed);
  std::vector<Matrix> centers;
  centers.reserve(static_cast<std::size_t>(spec.clusters));
  for (int c = 0; c < spec.clusters; ++c) centers.push_back(spec.center_spread * random_symmetric(spec.dim, rng));

  LabeledDataset out;
  out.points.reserve(static_cast<std::size_t>(spec.clusters * spec.points_per_cluster));
  for (int c = 0; c < spec.clusters; ++c) {
    for (int i = 0; i < spec.points_per_cluster; ++i) {
      const Matrix e = random_symmetric(spec.dim, rng);
      out.points.push_back(spd_exp(centers[static_cast<std::size_t>(c)] + spec.noise * e));
      out.labels.push_back(c);
    }
  }
  return out;
}

}  // namespace spdc
