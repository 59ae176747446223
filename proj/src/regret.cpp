#include "previewctl/regret.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "previewctl/errors.hpp"
#include "previewctl/linalg.hpp"

namespace previewctl {
namespace {

constexpr int kMaxDoublings = 60;

struct Candidate {
  SpectralFactor factor;
  std::optional<PreviewController> controller;
};

Candidate TryLevel(const Plant& plant, const NoncausalResponse& response, int p, double gamma,
                   const RegretOptions& options) {
  Candidate c;
  c.factor = SpectralFactorize(response, gamma, options.factorization);
  const Plant filtered = FilteredPlant(plant, c.factor);
  const PreviewFeasibility feas = HinfPreviewFeasible(filtered, Augment(filtered, p), 1.0);
  if (feas.synthesis) c.controller = MapFilteredController(plant, c.factor, feas.synthesis->controller);
  return c;
}

}  // namespace

Eigen::MatrixXd ControllerCostOperator(const Plant& plant, const PreviewController& ctrl,
                                       int N) {
  if (N < 1) throw InvalidInput("horizon must be at least 1");
  const StateSpace sys = ClosedLoop(plant, ctrl);
  const double rho = SpectralRadius(sys.A);
  if (!(rho < 1.0)) {
    std::ostringstream msg;
    msg << "controller is not stabilizing (closed-loop spectral radius " << rho << ")";
    throw PreconditionViolated(msg.str());
  }
  const int nd = plant.nd();
  const int p = ctrl.preview();
  const int n = sys.states();
  const int ny = static_cast<int>(sys.C.rows());
  const int steps = N + p;
  const int cols = N * nd;

  // Step s feeds d(s) into the tail of the preview buffer, so the loop
  // starts at rest and sees d(0) p steps before it reaches the plant.
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(steps * ny + n, cols);
  Eigen::MatrixXd Z = Eigen::MatrixXd::Zero(n, cols);
  for (int s = 0; s < steps; ++s) {
    // Columns of samples that have not entered the loop yet are still zero.
    const int active = std::min(cols, s * nd);
    T.block(s * ny, 0, ny, active).noalias() = sys.C * Z.leftCols(active);
    Eigen::MatrixXd next = sys.A * Z.leftCols(std::min(cols, (s + 1) * nd));
    if (s < N) {
      T.block(s * ny, s * nd, ny, nd) += sys.D;
      next.middleCols(s * nd, nd) += sys.B;
    }
    Z.leftCols(next.cols()) = next;
  }
  const Eigen::MatrixXd gramian = SolveStein(sys.A, sys.C.transpose() * sys.C);
  T.bottomRows(n) = SymmetricSqrt(gramian) * Z;
  return T;
}

RegretEstimate RegretEval(const Plant& plant, const NoncausalController& nc,
                          const PreviewController& ctrl, int N, const HorizonLimits& limits) {
  const int p = ctrl.preview();
  const int nd = plant.nd();
  const FiniteHorizonOperators ops = BuildFiniteHorizon(plant, nc, N + p, limits);
  const Eigen::MatrixXd T = ControllerCostOperator(plant, ctrl, N);
  // Baseline for the same p-step delayed disturbance.
  Eigen::MatrixXd M =
      Eigen::MatrixXd(T.transpose() * T) - ops.W.bottomRightCorner(N * nd, N * nd);
  M = Symmetrize(M);
  RegretEstimate est;
  est.horizon = N;
  est.value = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(M, Eigen::EigenvaluesOnly)
                  .eigenvalues()
                  .maxCoeff();
  est.doubling_delta = std::numeric_limits<double>::quiet_NaN();
  return est;
}

RegretEstimate RegretEval(const Plant& plant, const PreviewController& ctrl, int N,
                          const HorizonLimits& limits) {
  return RegretEval(plant, BuildNoncausal(plant), ctrl, N, limits);
}

RegretEstimate ConvergedRegret(const Plant& plant, const PreviewController& ctrl, int start,
                               int cap, double rel_tol) {
  if (start < 1 || cap < start) throw InvalidInput("invalid horizon range");
  const NoncausalController nc = BuildNoncausal(plant);
  RegretEstimate est = RegretEval(plant, nc, ctrl, start);
  while (est.horizon * 2 <= cap) {
    RegretEstimate next = RegretEval(plant, nc, ctrl, est.horizon * 2);
    const double scale = std::max(std::abs(next.value), std::numeric_limits<double>::min());
    next.doubling_delta = std::abs(next.value - est.value) / scale;
    est = next;
    if (est.doubling_delta < rel_tol) break;
  }
  return est;
}

Plant FilteredPlant(const Plant& plant, const SpectralFactor& factor) {
  RequireConsistentDimensions(plant);
  const int nx = plant.nx(), nd = plant.nd(), nu = plant.nu();
  const int L = factor.order_used();
  if (L < 0 || factor.coeffs[0].rows() != nd) throw InvalidInput("factor does not match plant");
  const Eigen::MatrixXd D_i = factor.coeffs[0].partialPivLu().inverse();
  Eigen::MatrixXd C_i(nd, L * nd);
  for (int k = 1; k <= L; ++k) C_i.middleCols((k - 1) * nd, nd) = -D_i * factor.coeffs[k];

  const int n = nx + L * nd;
  Plant out;
  out.A = Eigen::MatrixXd::Zero(n, n);
  out.B_d = Eigen::MatrixXd::Zero(n, nd);
  out.B_u = Eigen::MatrixXd::Zero(n, nu);
  out.Q = Eigen::MatrixXd::Zero(n, n);
  out.R = plant.R;
  out.A.topLeftCorner(nx, nx) = plant.A;
  out.B_u.topRows(nx) = plant.B_u;
  out.Q.topLeftCorner(nx, nx) = plant.Q;
  out.B_d.topRows(nx) = plant.B_d * D_i;
  if (L > 0) {
    out.A.block(0, nx, nx, L * nd) = plant.B_d * C_i;
    // xi+ = [d(t); d(t-1); ...; d(t-L+1)] with d(t) = C_i xi + D_i v.
    out.A.block(nx, nx, nd, L * nd) = C_i;
    for (int k = 1; k < L; ++k) out.A.block(nx + k * nd, nx + (k - 1) * nd, nd, nd).setIdentity();
    out.B_d.middleRows(nx, nd) = D_i;
  }
  return out;
}

PreviewController MapFilteredController(const Plant& plant, const SpectralFactor& factor,
                                        const PreviewController& filtered) {
  const int nx = plant.nx(), nd = plant.nd(), nu = plant.nu();
  const int L = factor.order_used();
  const int p = filtered.preview();
  PreviewController ctrl;
  ctrl.K_x = filtered.K_x.leftCols(nx);
  ctrl.taps.assign(p + 1, Eigen::MatrixXd::Zero(nu, nd));
  ctrl.memory.assign(L, Eigen::MatrixXd::Zero(nu, nd));
  for (int m = 1; m <= L; ++m) ctrl.memory[m - 1] = filtered.K_x.middleCols(nx + (m - 1) * nd, nd);
  // sum_j N_j v(t+j) = sum_j sum_k N_j Delta_k d(t+j-k).
  for (int j = 0; j <= p; ++j) {
    for (int k = 0; k <= L; ++k) {
      const Eigen::MatrixXd term = filtered.taps[j] * factor.coeffs[k];
      const int lag = j - k;
      if (lag >= 0) {
        ctrl.taps[lag] += term;
      } else {
        ctrl.memory[-lag - 1] += term;
      }
    }
  }
  return ctrl;
}

RegretSynthesis RegretPreviewBisect(const Plant& plant, const NoncausalController& nc,
                                    const NoncausalResponse& response, int p,
                                    const RegretOptions& options) {
  if (p < 0) throw InvalidInput("preview length must be nonnegative");
  if (!(options.tol > 0.0)) throw InvalidInput("bisection tolerance must be positive");
  RegretSynthesis out;
  if (plant.B_d.norm() == 0.0) {
    out.controller = H2Preview(plant, nc, p);
    return out;
  }

  double lo = 0.0, hi = 1.0;
  std::optional<Candidate> best;
  for (int k = 0;; ++k) {
    Candidate c = TryLevel(plant, response, p, hi, options);
    if (c.controller) {
      best = std::move(c);
      break;
    }
    if (k >= kMaxDoublings) {
      std::ostringstream msg;
      msg << "no feasible regret level found up to " << hi << " (p = " << p << ")";
      throw SynthesisFailure(msg.str());
    }
    lo = hi;
    hi *= 2.0;
  }
  while (hi - lo > options.tol) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    Candidate c = TryLevel(plant, response, p, mid, options);
    if (c.controller) {
      hi = mid;
      best = std::move(c);
    } else {
      lo = mid;
    }
  }
  out.gamma = hi;
  out.gamma_lo = lo;
  out.controller = std::move(*best->controller);
  out.factor = std::move(best->factor);
  return out;
}

RegretSynthesis RegretPreviewBisect(const Plant& plant, int p, const RegretOptions& options) {
  const NoncausalController nc = BuildNoncausal(plant);
  const NoncausalResponse response =
      ComputeNoncausalResponse(plant, nc, HalfCircleGrid(options.grid_size));
  return RegretPreviewBisect(plant, nc, response, p, options);
}

}  // namespace previewctl
