#pragma once

// p-step preview synthesis: delay-chain augmentation, H-infinity preview
// controllers by gamma bisection, and the H2 preview controller.

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "previewctl/lti.hpp"
#include "previewctl/noncausal.hpp"
#include "previewctl/riccati.hpp"

namespace previewctl {

/// State [x(t); d(t); ...; d(t+p-1)] driven by u(t) and the newest preview
/// sample d(t+p).
struct AugmentedPlant {
  Eigen::MatrixXd A_hat;
  Eigen::MatrixXd B_u_hat;
  Eigen::MatrixXd B_d_hat;
  Eigen::MatrixXd Q_hat;
  Eigen::MatrixXd R;
  int p = 0;
  int nx = 0;
  int nd = 0;
};

/// Only dimensions are checked, so the same routine serves derived plants
/// (e.g. disturbance-filtered plants) whose A is singular.
AugmentedPlant Augment(const Plant& plant, int p);

struct SynthesisResult {
  /// Achieved level (upper end of the bisection bracket).
  double gamma = 0.0;
  /// Largest level found infeasible (lower end of the bracket).
  double gamma_lo = 0.0;
  PreviewController controller;
  Feasibility feasibility;
  /// First nx rows of the augmented Riccati solution split into
  /// [X^0 (nx x nx), X^1, ..., X^p (nx x nd)].
  std::vector<Eigen::MatrixXd> X_hat_blocks;
  /// Augmented-form gains: u = -K_hat_x xhat - K_hat_d d(t+p).
  Eigen::MatrixXd K_hat_x;
  Eigen::MatrixXd K_hat_d;
  /// Non-fatal anomalies noticed during synthesis (e.g. non-monotone
  /// feasibility above the bracket).
  std::vector<std::string> diagnostics;
};

struct PreviewFeasibility {
  Feasibility feasibility;
  std::optional<SynthesisResult> synthesis;
};

/// Full-information H-infinity test on the augmented plant at level gamma.
/// `plant` supplies the unaugmented (A, B_d, B_u) used for the tap form.
PreviewFeasibility HinfPreviewFeasible(const Plant& plant, const AugmentedPlant& aug,
                                       double gamma);

/// u = -K x - M_0 d(t) - sum_j M_j d(t+j) with K = H^{-1}B_u'X^0 A,
/// M_0 = H^{-1}B_u'X^0 B_d, M_j = H^{-1}B_u'X^j, H = R + B_u'X^0 B_u.
PreviewController ToTapForm(const SynthesisResult& result, const Plant& plant);

/// Minimal H-infinity level gamma_inf,p by bisection to width `tol`. The
/// lower bracket starts at gamma_nc (computed when not supplied).
/// Throws SynthesisFailure when no feasible upper bracket is found.
SynthesisResult HinfPreviewBisect(const Plant& plant, int p, double tol = 1e-10,
                                  std::optional<double> gamma_nc = std::nullopt);

/// Same bisection without validating `plant` against the standing
/// assumptions; the lower bracket is `gamma_lo`, assumed infeasible. If it
/// tests feasible while gamma_lo (1 - 1e-6) does not, the optimum is taken
/// to sit on the bracket and gamma_lo is returned; if both are feasible the
/// bracket is wrong and the search restarts from 0 with a diagnostic.
SynthesisResult HinfPreviewBisectRaw(const Plant& plant, int p, double gamma_lo, double tol);

/// H2 preview controller: taps M_j = K_v (A_tilde')^j X B_d, j = 0..p.
PreviewController H2Preview(const Plant& plant, const NoncausalController& nc, int p);
PreviewController H2Preview(const Plant& plant, int p);

}  // namespace previewctl
