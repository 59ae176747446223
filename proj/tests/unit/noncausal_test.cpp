#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "previewctl/errors.hpp"
#include "previewctl/finite_horizon.hpp"
#include "previewctl/linalg.hpp"
#include "previewctl/noncausal.hpp"
#include "previewctl/preview.hpp"
#include "test_util.hpp"

namespace previewctl {
namespace {

using testing::RandomMatrix;
using testing::RandomPlant;
using testing::RandomSignal;
using testing::ReferencePlant;

// Brute-force non-causal optimum: least squares over the whole input
// sequence u(0..N-1) on a horizon long enough for the tail to vanish,
// starting from x(0) = 0, with terminal weight from the LQR Riccati solution.
double BruteForceNoncausal(const Plant& p, const Signal& d, int N) {
  const int nx = p.nx(), nu = p.nu();
  const Eigen::MatrixXd X = BuildNoncausal(p).X;
  // x(t) = sum_s A^{t-1-s} (B_u u(s) + B_d d(s)); stack weighted outputs.
  const Eigen::MatrixXd Qh = SymmetricSqrt(p.Q), Rh = SymmetricSqrt(p.R), Xh = SymmetricSqrt(X);
  const int rows = (N - 1) * nx + nx + N * nu;
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(rows, N * nu);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(rows);
  std::vector<Eigen::MatrixXd> powers(N + 1, Eigen::MatrixXd::Identity(nx, nx));
  for (int k = 1; k <= N; ++k) powers[k] = p.A * powers[k - 1];
  for (int t = 1; t <= N; ++t) {
    const Eigen::MatrixXd& W = t < N ? Qh : Xh;
    const int r = (t - 1) * nx;
    Eigen::VectorXd free = Eigen::VectorXd::Zero(nx);
    for (int s = 0; s < t; ++s) {
      M.block(r, s * nu, nx, nu) = W * powers[t - 1 - s] * p.B_u;
      free += powers[t - 1 - s] * p.B_d * d.At(s);
    }
    c.segment(r, nx) = W * free;
  }
  for (int t = 0; t < N; ++t) M.block(N * nx + t * nu, t * nu, nu, nu) = Rh;
  const Eigen::VectorXd u = M.colPivHouseholderQr().solve(-c);
  return (M * u + c).squaredNorm();
}

TEST(Noncausal, CostMatchesBruteForceLeastSquares) {
  // A short horizon keeps the stacked powers of the unstable A well scaled.
  const Plant p = ReferencePlant();
  const Signal d(Eigen::MatrixXd((Eigen::MatrixXd(1, 3) << 1.0, -0.5, 0.25).finished()));
  const NoncausalController nc = BuildNoncausal(p);
  const double j_nc = NoncausalCost(p, nc, d);
  const double brute = BruteForceNoncausal(p, d, 6);
  EXPECT_NEAR(j_nc, brute, 1e-8 * brute);
}

TEST(Noncausal, CostMatchesFiniteHorizonQuadraticForm) {
  const Plant p = ReferencePlant();
  std::mt19937_64 rng(12);
  const Signal d = RandomSignal(rng, 1, 20);
  const NoncausalController nc = BuildNoncausal(p);
  const FiniteHorizonOperators ops = BuildFiniteHorizon(p, nc, 200);
  const Eigen::VectorXd dv = StackSignal(d, 200);
  const double quad = dv.dot(ops.W * dv);
  const double j_nc = NoncausalCost(p, nc, d);
  EXPECT_NEAR(j_nc, quad, 1e-6 * (1.0 + j_nc));
  const Trajectory traj = SimulateNoncausal(p, nc, d);
  EXPECT_NEAR(Cost(traj) + traj.truncation_bound, j_nc, 1e-9 * j_nc);
}

TEST(Noncausal, FeedforwardMatchesDirectSum) {
  const Plant p = ReferencePlant();
  std::mt19937_64 rng(13);
  const Signal d = RandomSignal(rng, 1, 9);
  const NoncausalController nc = BuildNoncausal(p);
  const Eigen::MatrixXd s = NoncausalFeedforward(p, nc, d);
  const Eigen::MatrixXd At_t = nc.A_tilde.transpose();
  for (int t = 0; t < d.length(); ++t) {
    Eigen::VectorXd direct = Eigen::VectorXd::Zero(2);
    Eigen::MatrixXd power = Eigen::MatrixXd::Identity(2, 2);
    for (int j = t; j < d.length(); ++j) {
      direct += power * nc.X * p.B_d * d.At(j);
      power = At_t * power;
    }
    EXPECT_LE((s.col(t) - direct).norm(), 1e-12 * (1.0 + direct.norm())) << "t = " << t;
  }
}

TEST(Noncausal, GainsMatchDefinitions) {
  const Plant p = ReferencePlant();
  const NoncausalController nc = BuildNoncausal(p);
  const Eigen::MatrixXd H = p.R + p.B_u.transpose() * nc.X * p.B_u;
  EXPECT_LE((nc.H - H).norm(), 1e-12 * H.norm());
  EXPECT_LE((nc.K_x - H.inverse() * p.B_u.transpose() * nc.X * p.A).norm(), 1e-10);
  EXPECT_LE((nc.A_tilde - (p.A - p.B_u * nc.K_x)).norm(), 1e-12);
  EXPECT_LT(SpectralRadius(nc.A_tilde), 1.0);
}

TEST(Noncausal, IsALowerBoundOnEveryController) {
  std::mt19937_64 rng(14);
  const Plant p = ReferencePlant();
  const NoncausalController nc = BuildNoncausal(p);
  for (int trial = 0; trial < 20; ++trial) {
    const Signal d = RandomSignal(rng, 1, 15);
    PreviewController k = H2Preview(p, nc, trial % 4);
    for (auto& tap : k.taps) tap += 0.3 * RandomMatrix(rng, 1, 1);
    const Trajectory traj = Simulate(p, k, d);
    EXPECT_LE(NoncausalCost(p, nc, d),
              Cost(traj) + traj.truncation_bound + 1e-8 * (1.0 + d.SquaredNorm()));
  }
}

// sigma_max of the non-causal response over a dense uniform grid.
double GridGammaNc(const Plant& p, int points) {
  const NoncausalController nc = BuildNoncausal(p);
  const NoncausalResponse r = ComputeNoncausalResponse(p, nc, HalfCircleGrid(points));
  double best = 0.0;
  for (const auto& T : r.T_nc) best = std::max(best, SpectralNorm(T));
  return best;
}

TEST(GammaNc, ReferencePlantMatchesDenseGrid) {
  const Plant p = ReferencePlant();
  const GammaNc g = ComputeGammaNc(p);
  const double grid = GridGammaNc(p, 100000);
  EXPECT_GE(g.value, grid - 1e-12);
  EXPECT_NEAR(g.value, grid, 1e-6);
  EXPECT_NEAR(g.value, 3.1024184114977138, 1e-9);
}

TEST(GammaNc, StableUnderGridDoubling) {
  const Plant p = ReferencePlant();
  EXPECT_NEAR(ComputeGammaNc(p, 1e-10, 4096).value, ComputeGammaNc(p, 1e-10, 8192).value, 1e-6);
}

TEST(GammaNc, ZeroWithoutDisturbanceInput) {
  Plant p = ReferencePlant();
  p.B_d.setZero();
  EXPECT_EQ(ComputeGammaNc(p).value, 0.0);
}

TEST(GammaNc, RandomPlantsMatchDenseGrid) {
  std::mt19937_64 rng(15);
  for (int trial = 0; trial < 5; ++trial) {
    const Plant p = RandomPlant(rng, 2 + trial % 3, 1, 1 + trial % 2);
    const double g = ComputeGammaNc(p).value;
    const double grid = GridGammaNc(p, 20000);
    EXPECT_GE(g, grid - 1e-10);
    EXPECT_LE(g, grid * (1.0 + 1e-5)) << "trial " << trial;
  }
}

TEST(NoncausalResponse, SymbolIsGramOfResponse) {
  const Plant p = ReferencePlant();
  const NoncausalResponse r = ComputeNoncausalResponse(p, BuildNoncausal(p), HalfCircleGrid(16));
  for (std::size_t k = 0; k < r.omega.size(); ++k) {
    const Eigen::MatrixXcd W = r.T_nc[k].adjoint() * r.T_nc[k];
    EXPECT_LE((W - r.W[k]).norm(), 1e-12 * (1.0 + W.norm()));
  }
}

}  // namespace
}  // namespace previewctl
