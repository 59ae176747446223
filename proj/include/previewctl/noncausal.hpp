#pragma once

// The optimal non-causal controller: it sees the whole disturbance signal in
// advance and is the baseline against which regret is measured.

#include <vector>

#include <Eigen/Dense>

#include "previewctl/lti.hpp"
#include "previewctl/riccati.hpp"

namespace previewctl {

/// u(t) = -K_x x(t) - K_v s(t), with the feedforward state
/// s(t) = sum_{j>=t} (A_tilde')^{j-t} X B_d d(j).
struct NoncausalController {
  Eigen::MatrixXd X;
  Eigen::MatrixXd K_x;      // H^{-1} B_u' X A
  Eigen::MatrixXd K_v;      // H^{-1} B_u'
  Eigen::MatrixXd K_d;      // H^{-1} B_u' X B_d
  Eigen::MatrixXd A_tilde;  // A - B_u K_x
  Eigen::MatrixXd H;        // R + B_u' X B_u
  DareSolution dare;
};

/// Throws InvalidInput for inadmissible plants and propagates Riccati errors.
NoncausalController BuildNoncausal(const Plant& plant);

/// Feedforward s(0..T-1) as columns (T = d.length()), by the backward
/// recursion s(t) = A_tilde' s(t+1) + X B_d d(t), s(T) = 0.
Eigen::MatrixXd NoncausalFeedforward(const Plant& plant, const NoncausalController& ctrl,
                                     const Signal& d);

/// Closed-loop trajectory of the non-causal controller from x(0) = 0; the
/// horizon rule matches Simulate().
Trajectory SimulateNoncausal(const Plant& plant, const NoncausalController& ctrl,
                             const Signal& d, double decay_tol = 1e-13);

/// J(K_nc, d), including the exact cost of the decaying tail.
double NoncausalCost(const Plant& plant, const NoncausalController& ctrl, const Signal& d);

/// Frequency response of d -> [Q^{1/2} x; R^{1/2} u] under the non-causal
/// controller and its cost symbol W = T_nc^* T_nc.
struct NoncausalResponse {
  std::vector<double> omega;
  std::vector<Eigen::MatrixXcd> T_nc;
  std::vector<Eigen::MatrixXcd> W;
};

/// Grid values must lie in [0, pi]. Each point is one joint linear solve in
/// (x, u).
NoncausalResponse ComputeNoncausalResponse(const Plant& plant, const NoncausalController& ctrl,
                                           const std::vector<double>& omega);

struct GammaNc {
  double value = 0.0;
  /// Width of the final golden-section interval in omega.
  double tol = 0.0;
  int grid_size = 0;
  double omega_peak = 0.0;
};

/// max_omega sigma_max(T_nc): grid search on [0, pi] followed by
/// golden-section refinement around the three largest local maxima.
GammaNc ComputeGammaNc(const Plant& plant, const NoncausalController& ctrl, double tol = 1e-10,
                       int grid_size = 4096);
GammaNc ComputeGammaNc(const Plant& plant, double tol = 1e-10, int grid_size = 4096);

}  // namespace previewctl
