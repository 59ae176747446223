#pragma once

// Small dense linear-algebra helpers shared by the solver modules.

#include <Eigen/Dense>

namespace previewctl {

double SpectralRadius(const Eigen::MatrixXd& A);

/// Largest singular value (spectral norm); 0 for empty matrices.
double SpectralNorm(const Eigen::MatrixXd& M);
double SpectralNorm(const Eigen::MatrixXcd& M);

/// Smallest eigenvalue of the symmetric part of S; +inf for empty S.
double MinEigenvalue(const Eigen::MatrixXd& S);
double MaxEigenvalue(const Eigen::MatrixXd& S);

Eigen::MatrixXd Symmetrize(const Eigen::MatrixXd& S);

/// Principal square root of a symmetric PSD matrix. Eigenvalues in
/// [-1e-12 * scale, 0) are clamped to zero; anything more negative throws
/// InvalidInput.
Eigen::MatrixXd SymmetricSqrt(const Eigen::MatrixXd& S);

/// Solves the Stein equation X = A' X A + Q by squared Smith iteration.
/// Requires rho(A) < 1; throws PreconditionViolated otherwise.
Eigen::MatrixXd SolveStein(const Eigen::MatrixXd& A, const Eigen::MatrixXd& Q);

/// Block-diagonal concatenation.
Eigen::MatrixXd BlockDiagonal(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

}  // namespace previewctl
