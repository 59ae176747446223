#pragma once

// Regret against the non-causal baseline: evaluation by the finite-horizon
// oracle and regret-optimal preview synthesis by spectral factorization.

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "previewctl/finite_horizon.hpp"
#include "previewctl/lti.hpp"
#include "previewctl/noncausal.hpp"
#include "previewctl/preview.hpp"
#include "previewctl/spectral.hpp"

namespace previewctl {

/// Stacked map from d(0..N-1) to the closed-loop cost output
/// [Q^{1/2}x; R^{1/2}u] when the loop starts at rest and d(0) enters the
/// preview window p steps before it reaches the plant (the plant sees the
/// p-step delayed disturbance). Rows cover N + p steps, followed by
/// P^{1/2} z(N + p) where P is the output Gramian of the closed loop, so
/// |T d|^2 is the exact infinite-horizon cost. Throws PreconditionViolated
/// for non-Schur loops.
Eigen::MatrixXd ControllerCostOperator(const Plant& plant, const PreviewController& ctrl,
                                       int N);

struct RegretEstimate {
  /// lambda_max(T'T - W) with W the non-causal optimum for the same delayed
  /// disturbance: estimate of the squared regret level.
  double value = 0.0;
  int horizon = 0;
  /// |value(N) - value(N/2)| / max(|value(N)|, tiny); NaN for one horizon.
  double doubling_delta = 0.0;
};

/// Regret estimate at a single horizon N.
RegretEstimate RegretEval(const Plant& plant, const PreviewController& ctrl, int N,
                          const HorizonLimits& limits = {});
RegretEstimate RegretEval(const Plant& plant, const NoncausalController& nc,
                          const PreviewController& ctrl, int N,
                          const HorizonLimits& limits = {});

/// Doubles N from `start` until the relative change is below `rel_tol`
/// (at most `cap`).
RegretEstimate ConvergedRegret(const Plant& plant, const PreviewController& ctrl,
                               int start = 200, int cap = 1600, double rel_tol = 1e-4);

struct RegretSynthesis {
  /// Achieved level gamma_R,p (upper end of the bracket).
  double gamma = 0.0;
  double gamma_lo = 0.0;
  /// Controller acting on d: preview taps plus memory taps on past d.
  PreviewController controller;
  /// Factor used at the accepted level.
  SpectralFactor factor;
  std::vector<std::string> diagnostics;
};

struct RegretOptions {
  double tol = 1e-10;
  int grid_size = 4096;
  FactorizationOptions factorization;
};

/// Regret-optimal p-preview synthesis: for each candidate gamma, factor
/// gamma^2 I + W = Delta^* Delta, append the exact inverse of the FIR factor
/// to the disturbance channel, and test the unit-level H-infinity preview
/// problem. Throws SynthesisFailure when no feasible level is found within
/// 60 doublings; factorization errors propagate.
RegretSynthesis RegretPreviewBisect(const Plant& plant, int p, const RegretOptions& options = {});
RegretSynthesis RegretPreviewBisect(const Plant& plant, const NoncausalController& nc,
                                    const NoncausalResponse& response, int p,
                                    const RegretOptions& options = {});

/// Plant driven by v = Delta d: state [x; d(t-1); ...; d(t-L)], with the
/// disturbance recovered as d = C_i xi + Delta_0^{-1} v.
Plant FilteredPlant(const Plant& plant, const SpectralFactor& factor);

/// Re-expresses a controller of the filtered plant (taps on v) as taps on
/// d(t..t+p) plus memory taps on d(t-1..t-L).
PreviewController MapFilteredController(const Plant& plant, const SpectralFactor& factor,
                                        const PreviewController& filtered);

}  // namespace previewctl
