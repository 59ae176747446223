#include "previewctl/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "previewctl/errors.hpp"

namespace previewctl {

double SpectralRadius(const Eigen::MatrixXd& A) {
  if (A.size() == 0) return 0.0;
  Eigen::EigenSolver<Eigen::MatrixXd> es(A, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double SpectralNorm(const Eigen::MatrixXd& M) {
  if (M.size() == 0) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
  return svd.singularValues()(0);
}

double SpectralNorm(const Eigen::MatrixXcd& M) {
  if (M.size() == 0) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(M);
  return svd.singularValues()(0);
}

double MinEigenvalue(const Eigen::MatrixXd& S) {
  if (S.size() == 0) return std::numeric_limits<double>::infinity();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Symmetrize(S),
                                                    Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

double MaxEigenvalue(const Eigen::MatrixXd& S) {
  if (S.size() == 0) return -std::numeric_limits<double>::infinity();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Symmetrize(S),
                                                    Eigen::EigenvaluesOnly);
  return es.eigenvalues()(es.eigenvalues().size() - 1);
}

Eigen::MatrixXd Symmetrize(const Eigen::MatrixXd& S) {
  return 0.5 * (S + S.transpose());
}

Eigen::MatrixXd SymmetricSqrt(const Eigen::MatrixXd& S) {
  if (S.size() == 0) return S;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Symmetrize(S));
  Eigen::VectorXd lambda = es.eigenvalues();
  const double scale = std::max(1.0, lambda.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    if (lambda(i) < -1e-12 * scale) {
      std::ostringstream msg;
      msg << "matrix square root: eigenvalue " << lambda(i)
          << " is negative beyond tolerance";
      throw InvalidInput(msg.str());
    }
    lambda(i) = std::sqrt(std::max(lambda(i), 0.0));
  }
  return es.eigenvectors() * lambda.asDiagonal() *
         es.eigenvectors().transpose();
}

Eigen::MatrixXd SolveStein(const Eigen::MatrixXd& A, const Eigen::MatrixXd& Q) {
  if (A.size() == 0) return Q;
  const double rho = SpectralRadius(A);
  if (!(rho < 1.0)) {
    std::ostringstream msg;
    msg << "Stein equation requires a Schur matrix, spectral radius " << rho;
    throw PreconditionViolated(msg.str());
  }
  // X = sum_k (A^k)' Q A^k, accumulated in doubling steps.
  Eigen::MatrixXd X = Q;
  Eigen::MatrixXd Ak = A;
  for (int iter = 0; iter < 200; ++iter) {
    const Eigen::MatrixXd increment = Ak.transpose() * X * Ak;
    X += increment;
    Ak = (Ak * Ak).eval();
    const double x_norm = X.norm();
    if (increment.norm() <= 1e-17 * (1.0 + x_norm) ||
        Ak.norm() <= 1e-300) {
      break;
    }
  }
  return X;
}

Eigen::MatrixXd BlockDiagonal(const Eigen::MatrixXd& a,
                              const Eigen::MatrixXd& b) {
  Eigen::MatrixXd out =
      Eigen::MatrixXd::Zero(a.rows() + b.rows(), a.cols() + b.cols());
  out.topLeftCorner(a.rows(), a.cols()) = a;
  out.bottomRightCorner(b.rows(), b.cols()) = b;
  return out;
}

}  // namespace previewctl
