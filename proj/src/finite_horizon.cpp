#include "previewctl/finite_horizon.hpp"

#include <sstream>
#include <vector>

#include "previewctl/errors.hpp"
#include "previewctl/linalg.hpp"

namespace previewctl {
namespace {

// Lower block-Toeplitz map from an input sequence to x(1..N) under
// x(t+1) = A_tilde x(t) + B w(t).
Eigen::MatrixXd StateMap(const Eigen::MatrixXd& A_tilde, const Eigen::MatrixXd& B, int N) {
  const auto nx = A_tilde.rows();
  const auto m = B.cols();
  std::vector<Eigen::MatrixXd> powers;
  powers.reserve(N);
  powers.push_back(B);
  for (int k = 1; k < N; ++k) powers.push_back(A_tilde * powers.back());
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(N * nx, N * m);
  for (int t = 1; t <= N; ++t)
    for (int s = 0; s < t; ++s) M.block((t - 1) * nx, s * m, nx, m) = powers[t - 1 - s];
  return M;
}

}  // namespace

FiniteHorizonOperators BuildFiniteHorizon(const Plant& plant, const NoncausalController& nc,
                                          int N, const HorizonLimits& limits) {
  if (N < 1) throw InvalidInput("horizon must be at least 1");
  if (N > limits.max_horizon || plant.nx() + plant.nd() > limits.max_dimension) {
    std::ostringstream msg;
    msg << "finite-horizon operators limited to N <= " << limits.max_horizon
        << " and nx + nd <= " << limits.max_dimension << " (requested N = " << N
        << ", nx + nd = " << plant.nx() + plant.nd() << ")";
    throw ResourceLimit(msg.str());
  }
  const int nx = plant.nx(), nd = plant.nd(), nu = plant.nu();
  const Eigen::MatrixXd Fx = StateMap(nc.A_tilde, plant.B_u, N);
  const Eigen::MatrixXd Gx = StateMap(nc.A_tilde, plant.B_d, N);

  // u(t) = v(t) - K_x x(t); x(0) = 0.
  Eigen::MatrixXd Fu = Eigen::MatrixXd::Identity(N * nu, N * nu);
  Eigen::MatrixXd Gu = Eigen::MatrixXd::Zero(N * nu, N * nd);
  for (int t = 1; t < N; ++t) {
    Fu.middleRows(t * nu, nu) -= nc.K_x * Fx.middleRows((t - 1) * nx, nx);
    Gu.middleRows(t * nu, nu) -= nc.K_x * Gx.middleRows((t - 1) * nx, nx);
  }

  FiniteHorizonOperators ops;
  ops.N = N;
  ops.F.resize(N * (nx + nu), N * nu);
  ops.F << Fx, Fu;
  ops.G.resize(N * (nx + nu), N * nd);
  ops.G << Gx, Gu;
  ops.Lambda = Eigen::MatrixXd::Zero(N * (nx + nu), N * (nx + nu));
  Eigen::MatrixXd half = Eigen::MatrixXd::Zero(N * (nx + nu), N * (nx + nu));
  const Eigen::MatrixXd q_half = SymmetricSqrt(plant.Q);
  const Eigen::MatrixXd x_half = SymmetricSqrt(nc.X);
  const Eigen::MatrixXd r_half = SymmetricSqrt(plant.R);
  for (int t = 0; t < N; ++t) {
    const bool terminal = t == N - 1;
    ops.Lambda.block(t * nx, t * nx, nx, nx) = terminal ? nc.X : plant.Q;
    half.block(t * nx, t * nx, nx, nx) = terminal ? x_half : q_half;
    const int r0 = N * nx + t * nu;
    ops.Lambda.block(r0, r0, nu, nu) = plant.R;
    half.block(r0, r0, nu, nu) = r_half;
  }

  // W = E_d' (I - Pi) E_d with Pi the projector onto range(E_u).
  const Eigen::MatrixXd Eu = half * ops.F;
  const Eigen::MatrixXd Ed = half * ops.G;
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(Eu);
  const Eigen::MatrixXd basis =
      qr.householderQ() * Eigen::MatrixXd::Identity(Eu.rows(), Eu.cols());
  const Eigen::MatrixXd residual = Ed - basis * (basis.transpose() * Ed);
  ops.W = Symmetrize(residual.transpose() * residual);
  return ops;
}

FiniteHorizonOperators BuildFiniteHorizon(const Plant& plant, int N,
                                          const HorizonLimits& limits) {
  return BuildFiniteHorizon(plant, BuildNoncausal(plant), N, limits);
}

Eigen::VectorXd StackSignal(const Signal& d, int N) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(N) * d.dim());
  for (int t = 0; t < N; ++t) out.segment(t * d.dim(), d.dim()) = d.At(t);
  return out;
}

}  // namespace previewctl
