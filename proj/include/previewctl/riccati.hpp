#pragma once

// Stabilizing solutions of discrete algebraic Riccati equations
//
//   X = A'XA + Q - (A'XB + S)(R + B'XB)^{-1}(B'XA + S'),
//
// for definite R (LQR) and indefinite R (H-infinity games), plus the
// bounded-real H-infinity norm of causal systems.

#include <optional>
#include <string>

#include <Eigen/Dense>

#include "previewctl/lti.hpp"

namespace previewctl {

struct DareSolution {
  Eigen::MatrixXd X;
  /// K = (R + B'XB)^{-1}(B'XA + S'); the closed loop is A - B K.
  Eigen::MatrixXd gain;
  Eigen::MatrixXd closed_loop_matrix;
  /// Frobenius norm of the DARE defect at X.
  double residual = 0.0;
  double spectral_radius = 0.0;
  /// Condition number of the basis block inverted to form X.
  double basis_condition = 1.0;
  bool used_iteration = false;
};

/// Unit-circle band for rejecting symplectic-pencil eigenvalues.
inline constexpr double kUnitCircleBand = 1e-9;
/// A solution is "stabilizing" when rho(A - BK) < 1 - kStabilityMargin.
inline constexpr double kStabilityMargin = 1e-9;

/// Stabilizing DARE solution via the ordered generalized Schur form of the
/// extended symplectic pencil. `tol` is relative: the residual must satisfy
/// residual <= tol * (1 + |X|_F). Falls back to Riccati-difference iteration
/// when the subspace basis has condition number above 1e12.
///
/// Throws NoStabilizingSolution or DegeneratePencil.
DareSolution SolveDare(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                       const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R_hat,
                       double tol = 1e-9);

/// Variant with a cross-weight S (n x m).
DareSolution SolveDare(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                       const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R_hat,
                       const Eigen::MatrixXd& S, double tol);

/// Frobenius norm of the DARE defect of X.
double DareResidual(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                    const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R_hat,
                    const Eigen::MatrixXd& X);

/// Result of the full-information H-infinity test at level gamma.
struct Feasibility {
  bool feasible = false;
  /// lambda_min(R + B_u'XB_u).
  double H_min_eig = 0.0;
  /// lambda_min(gamma^2 I - B_d'XB_d + B_d'XB_u H^{-1} B_u'XB_d).
  double Delta_min_eig = 0.0;
  /// lambda_min(X); the test requires X >= 0.
  double X_min_eig = 0.0;
  std::optional<DareSolution> solution;
  /// Why the level was rejected (empty when feasible).
  std::string reason;
};

/// Full-information H-infinity feasibility for x+ = Ax + B_u u + B_d w with
/// cost x'Qx + u'Ru: solves the DARE with B = [B_u B_d],
/// R_hat = diag(R, -gamma^2 I) and checks H > 0, Delta > 0, X >= 0.
/// Infeasibility is a normal return, never an exception. Because X grows
/// without bound as gamma approaches the optimal level, the residual
/// allowance here is multiplied by the condition number of the subspace
/// basis; within about 1e-8 (relative) of the optimum the sign tests are no
/// longer reliable, and callers should certify the resulting controller.
Feasibility HinfFeasibility(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B_u,
                            const Eigen::MatrixXd& B_d, const Eigen::MatrixXd& Q,
                            const Eigen::MatrixXd& R, double gamma);

/// H-infinity norm of a Schur system to absolute accuracy `tol`, by
/// bisection on the bounded-real Riccati test.
double HinfNorm(const StateSpace& sys, double tol = 1e-9);

/// True when |sys|_inf < gamma according to the bounded-real Riccati test.
bool BoundedRealFeasible(const StateSpace& sys, double gamma);

}  // namespace previewctl
