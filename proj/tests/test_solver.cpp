#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "solver_checks.hpp"
#include "spdc/kernels.hpp"
#include "spdc/solver.hpp"
#include "test_util.hpp"

using namespace spdc;
using spdc::testing::expect_stopping_contract;
using spdc::testing::random_dataset;
using spdc::testing::random_gaussian;

namespace {

Matrix random_gram(int n, Rng& rng) {
  const auto data = random_dataset(n, 3, rng);
  return gram(data, KernelSpec{KernelKind::log_euclidean_gaussian, 0.3, 1.0}).entries;
}

Matrix two_block_gram(int m) {
  Matrix k = Matrix::Constant(2 * m, 2 * m, 0.01);
  k.topLeftCorner(m, m).setConstant(0.99);
  k.bottomRightCorner(m, m).setConstant(0.99);
  k.diagonal().setOnes();
  return k;
}

}  // namespace

TEST(Shrink, Scalar) {
  EXPECT_DOUBLE_EQ(shrink(1.2, 0.5), 0.7);
  EXPECT_EQ(shrink(-0.3, 0.5), 0.0);
  EXPECT_DOUBLE_EQ(shrink(-2.0, 0.5), -1.5);
  EXPECT_EQ(shrink(0.5, 0.5), 0.0);
}

TEST(Objective, ZeroCoefficients) {
  EXPECT_EQ(objective(CoefficientMatrix::zero(3), Matrix::Identity(3, 3), 0.1), 0.0);
}

TEST(Objective, TwoPointClosedForm) {
  const double k = 0.3, c = -0.7, lambda = 0.2;
  Matrix km(2, 2);
  km << 1, k, k, 1;
  Matrix cm(2, 2);
  cm << 0, c, c, 0;
  EXPECT_NEAR(objective(CoefficientMatrix(cm), km, lambda), 2 * lambda * std::abs(c) - 4 * k * c + 2 * c * c, 1e-14);
}

TEST(Objective, MatchesExplicitFeatureResidual) {
  Rng rng = make_rng(21);
  for (int t = 0; t < 20; ++t) {
    const Matrix phi = random_gaussian(4, 3, rng);
    const Matrix k = phi.transpose() * phi;
    Matrix c = random_gaussian(3, 3, rng);
    c.diagonal().setZero();
    EXPECT_NEAR(objective(CoefficientMatrix(c), k, 0.1), oracle::feature_objective(phi, c, 0.1), 1e-10);
    EXPECT_NEAR(objective(CoefficientMatrix(c), k, 0.1), oracle::plain_objective(c, k, 0.1), 1e-10);
  }
}

TEST(Objective, SizeMismatch) {
  EXPECT_THROW(objective(CoefficientMatrix::zero(2), Matrix::Identity(3, 3), 0.1), DimensionError);
}

TEST(CoefficientMatrix, DiagonalMustBeZero) {
  EXPECT_THROW(CoefficientMatrix(Matrix::Identity(2, 2)), UsageError);
  const CoefficientMatrix c = CoefficientMatrix::strip_diagonal(Matrix::Ones(3, 3));
  EXPECT_EQ(c.entries().diagonal(), Vector::Zero(3));
  EXPECT_EQ(c.entries()(0, 1), 1.0);
}

TEST(UpdateA, IdentityKernel) {
  const Matrix k = Matrix::Identity(3, 3);
  const AUpdateFactor f(k, 2.0);
  const Matrix a = update_A(k, Matrix::Zero(3, 3), Matrix::Zero(3, 3), f);
  EXPECT_LT((a - 0.5 * Matrix::Identity(3, 3)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(UpdateA, VanishingNumerator) {
  Rng rng = make_rng(22);
  const Matrix k = random_gram(5, rng);
  Matrix ct = random_gaussian(5, 5, rng);
  ct.diagonal().setZero();
  const double rho = 1.5;
  const Matrix delta = 2.0 * k + rho * ct;
  EXPECT_LT(update_A(k, ct, delta, AUpdateFactor(k, rho)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(UpdateA, MatchesDenseSolveAndIsStationary) {
  Rng rng = make_rng(23);
  for (int t = 0; t < 20; ++t) {
    const int n = 2 + t % 7;
    const Matrix k = random_gram(n, rng);
    Matrix ct = random_gaussian(n, n, rng);
    ct.diagonal().setZero();
    const Matrix delta = random_gaussian(n, n, rng);
    const double rho = 0.5 + t * 0.1;
    const Matrix a = update_A(k, ct, delta, AUpdateFactor(k, rho));
    EXPECT_LT((a - oracle::a_update_dense(k, ct, delta, rho)).norm(), 1e-9);
    const Matrix stationarity = -2.0 * k + 2.0 * a * k + rho * (a - ct) + delta;
    EXPECT_LE(stationarity.norm(), 1e-8 * (k.norm() + rho));
  }
}

TEST(UpdateA, IndefiniteSystemFails) {
  Matrix k(2, 2);
  k << 1, 5, 5, 1;
  EXPECT_THROW(AUpdateFactor(k, 1.0), NumericError);
}

TEST(UpdateC, ShrinksAndZeroesDiagonal) {
  EXPECT_EQ(update_C(Matrix::Zero(2, 2), Matrix::Zero(2, 2), 0.5, 1.0).entries(), Matrix::Zero(2, 2));
  Matrix a(2, 2);
  a << 3, 1.2, -0.3, 3;
  const Matrix c = update_C(a, Matrix::Zero(2, 2), 0.5, 1.0).entries();
  EXPECT_EQ(c(0, 0), 0.0);
  EXPECT_EQ(c(1, 1), 0.0);
  EXPECT_NEAR(c(0, 1), 0.7, 1e-15);
  EXPECT_EQ(c(1, 0), 0.0);
  // Same through a nonzero multiplier: A + Delta/rho is what counts.
  const Matrix c2 = update_C(a - Matrix::Ones(2, 2), 2.0 * Matrix::Ones(2, 2), 1.0, 2.0).entries();
  EXPECT_LT((c2 - c).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(UpdateC, EntrywiseProximalOptimality) {
  Rng rng = make_rng(24);
  const double lambda = 0.3, rho = 1.7;
  for (int t = 0; t < 20; ++t) {
    const Matrix a = random_gaussian(4, 4, rng), delta = random_gaussian(4, 4, rng);
    const Matrix c = update_C(a, delta, lambda, rho).entries();
    const Matrix v = a + delta / rho;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        if (i == j) continue;
        auto f = [&](double x) { return lambda * std::abs(x) + 0.5 * rho * (x - v(i, j)) * (x - v(i, j)); };
        EXPECT_LE(f(c(i, j)), f(c(i, j) + 1e-4));
        EXPECT_LE(f(c(i, j)), f(c(i, j) - 1e-4));
      }
  }
}

TEST(UpdateDelta, Examples) {
  Rng rng = make_rng(25);
  const Matrix delta = random_gaussian(3, 3, rng);
  Matrix cm = random_gaussian(3, 3, rng);
  cm.diagonal().setZero();
  const CoefficientMatrix c(cm);
  EXPECT_EQ(update_Delta(delta, cm, c, 1.3), delta);
  const Matrix m = random_gaussian(3, 3, rng);
  EXPECT_LT((update_Delta(Matrix::Zero(3, 3), cm + m, c, 1.0) - m).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Solve, AllOnesGramGivesUniformRows) {
  const int n = 6;
  SolverConfig cfg;
  cfg.epsilon = 1e-9;
  cfg.max_iters = 20000;
  const SolveReport r = solve(Matrix::Ones(n, n), cfg);
  ASSERT_TRUE(r.converged);
  expect_stopping_contract(r, cfg);
  for (int i = 0; i < n; ++i) {
    double lo = 1e300, hi = -1e300;
    for (int j = 0; j < n; ++j)
      if (i != j) {
        lo = std::min(lo, r.C.entries()(i, j));
        hi = std::max(hi, r.C.entries()(i, j));
      }
    EXPECT_LE(hi - lo, 1e-6);
  }
}

TEST(Solve, LargeLambdaKillsEverything) {
  SolverConfig cfg;
  cfg.lambda = 10.0;
  const SolveReport r = solve(Matrix::Identity(2, 2), cfg);
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.C.entries(), Matrix::Zero(2, 2));
  expect_stopping_contract(r, cfg);
}

TEST(Solve, BlockGramConcentratesWithinBlocks) {
  const int m = 5;
  const SolverConfig cfg;
  const SolveReport r = solve(two_block_gram(m), cfg);
  expect_stopping_contract(r, cfg);
  const Matrix a = r.C.entries().cwiseAbs();
  const double cross = a.topRightCorner(m, m).sum() + a.bottomLeftCorner(m, m).sum();
  ASSERT_GT(a.sum(), 0.0);
  EXPECT_LT(cross, 0.05 * a.sum());
}

TEST(Solve, MatchesProximalGradientOracle) {
  Rng rng = make_rng(26);
  SolverConfig cfg;
  cfg.epsilon = 1e-8;
  cfg.max_iters = 100000;
  for (int t = 0; t < 8; ++t) {
    const int n = 3 + t % 4;
    const Matrix k = random_gram(n, rng);
    const SolveReport r = solve(k, cfg);
    expect_stopping_contract(r, cfg);
    const Matrix c_star = oracle::proximal_gradient(k, cfg.lambda);
    const double f_star = oracle::plain_objective(c_star, k, cfg.lambda);
    const double f = objective(r.C, k, cfg.lambda);
    EXPECT_LE(std::abs(f - f_star), 1e-4 * std::abs(f_star));
  }
}

TEST(Solve, TracesAndDeterminism) {
  Rng rng = make_rng(27);
  const Matrix k = random_gram(8, rng);
  const SolverConfig cfg;
  const SolveReport a = solve(k, cfg), b = solve(k, cfg);
  expect_stopping_contract(a, cfg);
  EXPECT_EQ(a.C.entries(), b.C.entries());
  EXPECT_EQ(a.objective_trace, b.objective_trace);
  EXPECT_EQ(a.iters_used, b.iters_used);
  EXPECT_EQ(a.residual_trace.size(), a.objective_trace.size());
  for (const auto& rp : a.residual_trace) {
    EXPECT_GE(rp.primal, 0.0);
    EXPECT_GE(rp.step, 0.0);
  }
}

TEST(Solve, IterationCap) {
  Rng rng = make_rng(28);
  SolverConfig cfg;
  cfg.max_iters = 2;
  cfg.epsilon = 1e-14;
  const SolveReport r = solve(random_gram(6, rng), cfg);
  EXPECT_FALSE(r.converged);
  EXPECT_EQ(r.iters_used, 2);
  expect_stopping_contract(r, cfg);
}

TEST(Solve, Errors) {
  Matrix asym = Matrix::Identity(3, 3);
  asym(0, 1) = 0.2;
  EXPECT_THROW(solve(asym, SolverConfig{}), UsageError);
  Matrix indefinite(2, 2);
  indefinite << 1, 5, 5, 1;
  EXPECT_THROW(solve(indefinite, SolverConfig{}), NumericError);
  SolverConfig bad;
  bad.lambda = 0.0;
  EXPECT_THROW(solve(Matrix::Identity(2, 2), bad), UsageError);
  bad = SolverConfig{};
  bad.max_iters = 0;
  EXPECT_THROW(bad.validate(), UsageError);
}
