#include <cmath>
#include <complex>
#include <random>

#include <gtest/gtest.h>

#include "previewctl/errors.hpp"
#include "previewctl/linalg.hpp"
#include "previewctl/riccati.hpp"
#include "test_util.hpp"

namespace previewctl {
namespace {

using testing::RandomMatrix;
using testing::RandomPlant;
using testing::ReferencePlant;

// Riccati difference iteration from X = Q; converges to the stabilizing
// solution for stabilizable and detectable data.
Eigen::MatrixXd IterateRiccati(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                               const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R) {
  Eigen::MatrixXd X = Q;
  for (int k = 0; k < 100000; ++k) {
    const Eigen::MatrixXd H = R + B.transpose() * X * B;
    const Eigen::MatrixXd next =
        Q + A.transpose() * X * A -
        A.transpose() * X * B * H.ldlt().solve(B.transpose() * X * A);
    const double change = (next - X).norm();
    X = 0.5 * (next + next.transpose());
    if (change <= 1e-14 * (1.0 + X.norm())) break;
  }
  return X;
}

TEST(SolveDare, ScalarClosedForm) {
  // a = 0.5, b = q = r = 1 reduces to x^2 - a^2 x - 1 = 0.
  const Eigen::MatrixXd a = Eigen::MatrixXd::Constant(1, 1, 0.5);
  const Eigen::MatrixXd one = Eigen::MatrixXd::Ones(1, 1);
  const DareSolution sol = SolveDare(a, one, one, one);
  const double root = (0.25 + std::sqrt(0.0625 + 4.0)) / 2.0;
  EXPECT_NEAR(sol.X(0, 0), root, 1e-9);
  EXPECT_NEAR(sol.X(0, 0), 1.132782218537, 1e-9);
  EXPECT_NEAR(sol.gain(0, 0), 0.5 * root / (1.0 + root), 1e-9);
}

TEST(SolveDare, ReferencePlantMatchesIteration) {
  const Plant p = ReferencePlant();
  const DareSolution sol = SolveDare(p.A, p.B_u, p.Q, p.R);
  const Eigen::MatrixXd X_iter = IterateRiccati(p.A, p.B_u, p.Q, p.R);
  EXPECT_LE((sol.X - X_iter).norm(), 1e-8 * (1.0 + X_iter.norm()));
  EXPECT_LE(DareResidual(p.A, p.B_u, p.Q, p.R, sol.X), 1e-9 * (1.0 + sol.X.norm()));
  EXPECT_LT(SpectralRadius(p.A - p.B_u * sol.gain), 1.0);
}

TEST(SolveDare, RandomSystemsAreSound) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 40; ++trial) {
    const int nx = 1 + trial % 6;
    const int nu = 1 + trial % 2;
    const Plant p = RandomPlant(rng, nx, nu, 1);
    const DareSolution sol = SolveDare(p.A, p.B_u, p.Q, p.R);
    EXPECT_LE(DareResidual(p.A, p.B_u, p.Q, p.R, sol.X), 1e-9 * (1.0 + sol.X.norm()))
        << "trial " << trial;
    EXPECT_LT(SpectralRadius(p.A - p.B_u * sol.gain), 1.0) << "trial " << trial;
    EXPECT_GE(MinEigenvalue(sol.X), -1e-9 * (1.0 + sol.X.norm()));
    const Eigen::MatrixXd X_iter = IterateRiccati(p.A, p.B_u, p.Q, p.R);
    EXPECT_LE((sol.X - X_iter).norm(), 1e-6 * (1.0 + X_iter.norm())) << "trial " << trial;
  }
}

TEST(SolveDare, CrossWeightMatchesShiftedProblem) {
  std::mt19937_64 rng(5);
  const Plant p = RandomPlant(rng, 3, 1, 1);
  const Eigen::MatrixXd S = 0.1 * RandomMatrix(rng, 3, 1);
  // x'Qx + 2x'Su + u'Ru equals the problem with A - B R^{-1} S' and
  // Q - S R^{-1} S' after the change of input u -> u + R^{-1} S' x.
  const Eigen::MatrixXd Rinv_St = p.R.ldlt().solve(S.transpose());
  const Eigen::MatrixXd A2 = p.A - p.B_u * Rinv_St;
  const Eigen::MatrixXd Q2 = p.Q - S * Rinv_St;
  ASSERT_GE(MinEigenvalue(Q2), 0.0);
  const DareSolution with_s = SolveDare(p.A, p.B_u, p.Q, p.R, S, 1e-9);
  const DareSolution shifted = SolveDare(A2, p.B_u, Q2, p.R);
  EXPECT_LE((with_s.X - shifted.X).norm(), 1e-8 * (1.0 + shifted.X.norm()));
}

TEST(SolveDare, UncontrollableUnitCircleModeHasNoSolution) {
  const Eigen::MatrixXd A = Eigen::MatrixXd::Identity(1, 1);
  const Eigen::MatrixXd B = Eigen::MatrixXd::Zero(1, 1);
  const Eigen::MatrixXd one = Eigen::MatrixXd::Ones(1, 1);
  EXPECT_THROW(SolveDare(A, B, one, one), NoStabilizingSolution);
}

// Dense frequency sweep of sigma_max(D + C (zI - A)^{-1} B); a lower bound
// on the H-infinity norm that becomes tight as the grid is refined.
double GridNorm(const StateSpace& sys, int points) {
  double best = 0.0;
  const auto n = sys.A.rows();
  for (int k = 0; k <= points; ++k) {
    const double w = M_PI * k / points;
    const Eigen::MatrixXcd zI =
        std::polar(1.0, w) * Eigen::MatrixXcd::Identity(n, n) - sys.A.cast<std::complex<double>>();
    const Eigen::MatrixXcd G =
        sys.D.cast<std::complex<double>>() +
        sys.C.cast<std::complex<double>>() * zI.partialPivLu().solve(sys.B.cast<std::complex<double>>());
    best = std::max(best, SpectralNorm(G));
  }
  return best;
}

TEST(HinfNorm, MatchesDenseFrequencyGrid) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 1 + trial % 4;
    StateSpace sys;
    sys.A = RandomMatrix(rng, n, n);
    sys.A *= 0.9 / std::max(SpectralRadius(sys.A), 1e-3);
    sys.B = RandomMatrix(rng, n, 2);
    sys.C = RandomMatrix(rng, 2, n);
    sys.D = 0.1 * RandomMatrix(rng, 2, 2);
    const double norm = HinfNorm(sys, 1e-10);
    const double grid = GridNorm(sys, 200000);
    EXPECT_GE(norm, grid - 1e-9) << "trial " << trial;
    EXPECT_LE(norm, grid * (1.0 + 1e-4) + 1e-9) << "trial " << trial;
  }
}

TEST(HinfNorm, ScalarFirstOrderClosedForm) {
  // |1 / (z - a)| peaks at z = 1 for a > 0: 1 / (1 - a).
  StateSpace sys;
  sys.A = Eigen::MatrixXd::Constant(1, 1, 0.5);
  sys.B = Eigen::MatrixXd::Ones(1, 1);
  sys.C = Eigen::MatrixXd::Ones(1, 1);
  sys.D = Eigen::MatrixXd::Zero(1, 1);
  EXPECT_NEAR(HinfNorm(sys, 1e-12), 2.0, 1e-9);
  EXPECT_TRUE(BoundedRealFeasible(sys, 2.0 + 1e-6));
  EXPECT_FALSE(BoundedRealFeasible(sys, 2.0 - 1e-6));
}

TEST(HinfFeasibility, LevelIsMonotone) {
  const Plant p = ReferencePlant();
  bool seen_feasible = false;
  for (double g = 1.0; g <= 40.0; g *= 1.5) {
    const Feasibility f = HinfFeasibility(p.A, p.B_u, p.B_d, p.Q, p.R, g);
    if (seen_feasible) {
      EXPECT_TRUE(f.feasible) << "gamma " << g;
    }
    if (f.feasible) {
      seen_feasible = true;
      EXPECT_TRUE(f.reason.empty());
      EXPECT_GT(f.H_min_eig, 0.0);
      EXPECT_GT(f.Delta_min_eig, 0.0);
    } else {
      EXPECT_FALSE(f.reason.empty());
    }
  }
  EXPECT_TRUE(seen_feasible);
}

}  // namespace
}  // namespace previewctl
