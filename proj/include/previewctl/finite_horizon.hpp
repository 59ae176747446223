#pragma once

// Finite-horizon stacked operators used as brute-force oracles for costs,
// the non-causal optimum and regret.

#include <Eigen/Dense>

#include "previewctl/lti.hpp"
#include "previewctl/noncausal.hpp"

namespace previewctl {

/// Horizon-N model with x(0) = 0, disturbance d(0..N-1) and the
/// prestabilized input v(t) = u(t) + K_x x(t), where K_x is the LQR gain.
/// Stacked output y = [x(1); ...; x(N); u(0); ...; u(N-1)] = F v + G d and
/// cost y' Lambda y with Lambda = blkdiag(Q, ..., Q, X, R, ..., R). The
/// terminal weight X is the optimal cost-to-go, so for d supported on
/// [0, N) the minimum over v equals the infinite-horizon non-causal cost:
/// d' W d = J(K_nc, d).
struct FiniteHorizonOperators {
  int N = 0;
  Eigen::MatrixXd F;
  Eigen::MatrixXd G;
  Eigen::MatrixXd Lambda;
  /// Symmetric PSD (N nd x N nd).
  Eigen::MatrixXd W;
};

struct HorizonLimits {
  int max_horizon = 2000;
  int max_dimension = 10;
};

/// Throws ResourceLimit when N or nx + nd exceed `limits`.
FiniteHorizonOperators BuildFiniteHorizon(const Plant& plant, const NoncausalController& nc,
                                          int N, const HorizonLimits& limits = {});
FiniteHorizonOperators BuildFiniteHorizon(const Plant& plant, int N,
                                          const HorizonLimits& limits = {});

/// Stacks d(0..N-1) into one vector (zeros beyond the signal support).
Eigen::VectorXd StackSignal(const Signal& d, int N);

}  // namespace previewctl
