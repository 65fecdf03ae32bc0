#include <gtest/gtest.h>

#include <vector>

#include "oracles.hpp"
#include "spdc/metrics.hpp"
#include "spdc/random.hpp"

using namespace spdc;

namespace {

std::vector<int> random_labels(std::size_t n, int k, Rng& rng) {
  std::vector<int> out(n);
  for (auto& v : out) v = static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(k)));
  return out;
}

}  // namespace

TEST(Accuracy, Examples) {
  const std::vector<int> a{0, 1, 2, 1, 0};
  EXPECT_EQ(accuracy(a, a), 1.0);
  EXPECT_EQ(accuracy(std::vector<int>{1, 1, 0, 0}, std::vector<int>{0, 0, 1, 1}), 1.0);
  EXPECT_DOUBLE_EQ(accuracy(std::vector<int>{0, 0, 1, 1, 1}, std::vector<int>{0, 1, 1, 0, 0}), 0.6);
}

TEST(Accuracy, NonContiguousAndUnequalClusterCounts) {
  EXPECT_EQ(accuracy(std::vector<int>{7, 7, 42, 42}, std::vector<int>{0, 0, 1, 1}), 1.0);
  EXPECT_DOUBLE_EQ(accuracy(std::vector<int>{0, 0, 0, 0}, std::vector<int>{0, 0, 1, 2}), 0.5);
  EXPECT_DOUBLE_EQ(accuracy(std::vector<int>{0, 1, 2, 3}, std::vector<int>{0, 0, 1, 1}), 0.5);
}

TEST(Accuracy, MatchesExhaustivePermutation) {
  Rng rng = make_rng(41);
  for (int t = 0; t < 1000; ++t) {
    const int ka = 1 + static_cast<int>(uniform_index(rng, 6));
    const int kb = 1 + static_cast<int>(uniform_index(rng, 6));
    const std::size_t n = 1 + uniform_index(rng, 40);
    const auto pred = random_labels(n, ka, rng), truth = random_labels(n, kb, rng);
    const double expected = oracle::exhaustive_accuracy(pred, truth);
    EXPECT_DOUBLE_EQ(accuracy(pred, truth), expected);
    EXPECT_DOUBLE_EQ(accuracy(truth, pred), expected);
  }
}

TEST(Nmi, Examples) {
  const std::vector<int> a{0, 1, 2, 1, 0, 2};
  EXPECT_EQ(nmi(a, a), 1.0);
  EXPECT_EQ(nmi(std::vector<int>{0, 0, 1, 1}, std::vector<int>{0, 1, 0, 1}), 0.0);
}

TEST(Nmi, IndependentLabelsNearZero) {
  Rng rng = make_rng(42);
  const auto a = random_labels(10000, 2, rng), b = random_labels(10000, 2, rng);
  EXPECT_LE(nmi(a, b), 0.1);
}

TEST(Metrics, RelabelingInvariance) {
  Rng rng = make_rng(43);
  for (int t = 0; t < 100; ++t) {
    const auto a = random_labels(30, 4, rng), b = random_labels(30, 3, rng);
    std::vector<int> a2(a);
    for (auto& v : a2) v = 10 - 3 * v;
    EXPECT_DOUBLE_EQ(accuracy(a2, b), accuracy(a, b));
    EXPECT_NEAR(nmi(a2, b), nmi(a, b), 1e-15);
    const double v = nmi(a, b);
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
}

TEST(Metrics, Errors) {
  EXPECT_THROW(accuracy(std::vector<int>{0, 1}, std::vector<int>{0}), UsageError);
  EXPECT_THROW(nmi(std::vector<int>{0, 1}, std::vector<int>{0}), UsageError);
}

TEST(Hungarian, RectangularAssignment) {
  const std::vector<std::vector<double>> cost{{4, 1, 3}, {2, 0, 5}};
  const auto m = hungarian_min(cost);
  EXPECT_EQ(cost[0][m[0]] + cost[1][m[1]], 3.0);
}
