#pragma once

// Uniform bound on the cost gap between the H2 preview controller and the
// non-causal controller:
//   0 <= J(K_2p, d) - J(K_nc, d) <= (4a + 2bc) alpha^{p+1} / (1 - alpha) |d|^2.

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "previewctl/lti.hpp"
#include "previewctl/noncausal.hpp"

namespace previewctl {

struct GapBound {
  double a = 0.0;
  double b = 0.0;
  /// sum_k |A_tilde^k| including a certified geometric tail.
  double c = 0.0;
  double alpha = 0.0;
  /// |A_tilde^j| <= alpha^j holds for every j >= t_cut.
  int t_cut = 0;
  /// Every alpha tried, in order (the last one was accepted).
  std::vector<double> alpha_trace;

  double Bound(int p) const;
  bool ValidFor(int p) const { return p >= t_cut; }
};

/// Throws BoundUnavailable when no alpha below 1 - 1e-6 can be certified,
/// or when a supplied alpha is outside (rho(A_tilde), 1) or fails the
/// envelope check.
GapBound H2GapBound(const Plant& plant, const NoncausalController& nc,
                    std::optional<double> alpha = std::nullopt);
GapBound H2GapBound(const Plant& plant, std::optional<double> alpha = std::nullopt);

/// Same constants from raw parts (X, B_d, K_v, H, A_tilde).
GapBound H2GapBoundFromParts(const Eigen::MatrixXd& X, const Eigen::MatrixXd& B_d,
                             const Eigen::MatrixXd& K_v, const Eigen::MatrixXd& H,
                             const Eigen::MatrixXd& A_tilde,
                             std::optional<double> alpha = std::nullopt);

}  // namespace previewctl
