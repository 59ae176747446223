#include "previewctl/riccati.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#define LAPACK_COMPLEX_CPP
#include <lapacke.h>

#include "previewctl/errors.hpp"
#include "previewctl/linalg.hpp"

namespace previewctl {
namespace {

constexpr double kBasisConditionLimit = 1e12;
constexpr int kMaxDifferenceIterations = 100'000;

lapack_logical SelectInsideUnitCircle(const double* alpha_re, const double* alpha_im,
                                      const double* beta) {
  return std::hypot(*alpha_re, *alpha_im) < std::abs(*beta);
}

struct Problem {
  const Eigen::MatrixXd& A;
  const Eigen::MatrixXd& B;
  const Eigen::MatrixXd& Q;
  const Eigen::MatrixXd& R;
  const Eigen::MatrixXd& S;
};

void CheckDimensions(const Problem& pr) {
  const auto n = pr.A.rows();
  const auto m = pr.B.cols();
  if (pr.A.cols() != n || pr.B.rows() != n || pr.Q.rows() != n || pr.Q.cols() != n ||
      pr.R.rows() != m || pr.R.cols() != m || pr.S.rows() != n || pr.S.cols() != m) {
    throw InvalidInput("DARE data has inconsistent dimensions");
  }
}

// A'XA - X + Q - (A'XB + S)(R + B'XB)^{-1}(B'XA + S').
Eigen::MatrixXd Defect(const Problem& pr, const Eigen::MatrixXd& X) {
  const Eigen::MatrixXd G = pr.R + pr.B.transpose() * X * pr.B;
  const Eigen::MatrixXd F = pr.B.transpose() * X * pr.A + pr.S.transpose();
  return pr.A.transpose() * X * pr.A - X + pr.Q - F.transpose() * G.fullPivLu().solve(F);
}

// Reciprocal condition estimate of the (small) matrix R + B'XB.
double InverseCondition(const Eigen::MatrixXd& G) {
  if (G.size() == 0) return 1.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(G);
  const auto& s = svd.singularValues();
  if (s(0) == 0.0) return 0.0;
  return s(s.size() - 1) / s(0);
}

// Residual of the pencil equations for the pair (X, K):
//   X = Q - S K + A'X Acl   and   S' - R K + B'X Acl = 0,   Acl = A - B K.
// Eliminating K gives the Riccati equation, but no inverse of R + B'XB is
// formed, so the measure stays meaningful when that matrix is ill
// conditioned (large X near the H-infinity optimum).
double PencilResidual(const Problem& pr, const Eigen::MatrixXd& X, const Eigen::MatrixXd& K,
                      const Eigen::MatrixXd& Acl) {
  const Eigen::MatrixXd XAcl = X * Acl;
  const double r1 = (pr.Q - pr.S * K + pr.A.transpose() * XAcl - X).norm();
  const double r2 = (pr.S.transpose() - pr.R * K + pr.B.transpose() * XAcl).norm();
  return std::hypot(r1, r2);
}

DareSolution AssembleWithGain(const Problem& pr, const Eigen::MatrixXd& X, Eigen::MatrixXd K) {
  DareSolution sol;
  sol.X = Symmetrize(X);
  const Eigen::MatrixXd G = pr.R + pr.B.transpose() * sol.X * pr.B;
  if (InverseCondition(G) < 1e-17) {
    throw DegeneratePencil("R + B'XB is singular at the Riccati solution");
  }
  sol.gain = std::move(K);
  sol.closed_loop_matrix = pr.A - pr.B * sol.gain;
  sol.spectral_radius = SpectralRadius(sol.closed_loop_matrix);
  sol.residual = PencilResidual(pr, sol.X, sol.gain, sol.closed_loop_matrix);
  return sol;
}

DareSolution Assemble(const Problem& pr, const Eigen::MatrixXd& X) {
  const Eigen::MatrixXd Xs = Symmetrize(X);
  const Eigen::MatrixXd G = pr.R + pr.B.transpose() * Xs * pr.B;
  return AssembleWithGain(
      pr, Xs, G.fullPivLu().solve(pr.B.transpose() * Xs * pr.A + pr.S.transpose()));
}

// Newton correction: solve E = Acl' E Acl + F(X) and set X <- X + E.
DareSolution Refine(const Problem& pr, DareSolution sol) {
  for (int step = 0; step < 3; ++step) {
    if (sol.residual <= 1e-14 * (1.0 + sol.X.norm())) break;
    if (!(sol.spectral_radius < 1.0)) break;
    DareSolution next;
    try {
      const Eigen::MatrixXd E = SolveStein(sol.closed_loop_matrix, Defect(pr, sol.X));
      next = Assemble(pr, sol.X + E);
    } catch (const Error&) {
      break;
    }
    if (!(next.residual < sol.residual) || !(next.spectral_radius < 1.0)) break;
    next.basis_condition = sol.basis_condition;
    next.used_iteration = sol.used_iteration;
    sol = std::move(next);
  }
  return sol;
}

Eigen::MatrixXd DifferenceIteration(const Problem& pr) {
  const auto n = pr.A.rows();
  Eigen::MatrixXd X = Eigen::MatrixXd::Zero(n, n);
  for (int k = 0; k < kMaxDifferenceIterations; ++k) {
    const Eigen::MatrixXd G = pr.R + pr.B.transpose() * X * pr.B;
    const Eigen::MatrixXd F = pr.B.transpose() * X * pr.A + pr.S.transpose();
    Eigen::MatrixXd next =
        Symmetrize(pr.A.transpose() * X * pr.A + pr.Q - F.transpose() * G.fullPivLu().solve(F));
    if (!next.allFinite() || next.norm() > 1e15) {
      throw NoStabilizingSolution("Riccati difference iteration diverged");
    }
    const double change = (next - X).norm();
    X = std::move(next);
    if (change <= 1e-14 * (1.0 + X.norm())) return X;
  }
  throw NoStabilizingSolution("Riccati difference iteration did not converge in 10^5 steps");
}

DareSolution Solve(const Problem& pr, double tol, bool condition_scaled) {
  CheckDimensions(pr);
  const int n = static_cast<int>(pr.A.rows());
  const int m = static_cast<int>(pr.B.cols());
  if (n == 0) {
    DareSolution sol;
    sol.X = Eigen::MatrixXd::Zero(0, 0);
    sol.gain = Eigen::MatrixXd::Zero(m, 0);
    sol.closed_loop_matrix = Eigen::MatrixXd::Zero(0, 0);
    return sol;
  }

  // Extended pencil M - z N acting on [x; costate; u]:
  //   x+ = A x + B u,  costate = Q x + S u + A' costate+,  0 = S'x + R u + B' costate+.
  const int N = 2 * n + m;
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(N, N);
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(N, N);
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  M.block(0, 0, n, n) = pr.A;
  M.block(0, 2 * n, n, m) = pr.B;
  M.block(n, 0, n, n) = pr.Q;
  M.block(n, n, n, n) = -I;
  M.block(n, 2 * n, n, m) = pr.S;
  M.block(2 * n, 0, m, n) = pr.S.transpose();
  M.block(2 * n, 2 * n, m, m) = pr.R;
  L.block(0, 0, n, n) = I;
  L.block(n, n, n, n) = -pr.A.transpose();
  L.block(2 * n, n, m, n) = -pr.B.transpose();

  std::vector<double> alpha_re(N), alpha_im(N), beta(N);
  Eigen::MatrixXd Z(N, N);
  double unused_vsl = 0.0;
  lapack_int sdim = 0;
  const lapack_int info =
      LAPACKE_dgges(LAPACK_COL_MAJOR, 'N', 'V', 'S', SelectInsideUnitCircle, N, M.data(), N,
                    L.data(), N, &sdim, alpha_re.data(), alpha_im.data(), beta.data(),
                    &unused_vsl, 1, Z.data(), N);
  if (info != 0) {
    std::ostringstream msg;
    msg << "generalized Schur decomposition failed (LAPACK info " << info << ")";
    throw NoStabilizingSolution(msg.str());
  }
  for (int i = 0; i < N; ++i) {
    const double a = std::hypot(alpha_re[i], alpha_im[i]);
    const double b = std::abs(beta[i]);
    const double scale = std::max(a, b);
    if (scale == 0.0) throw DegeneratePencil("symplectic pencil is singular");
    if (std::abs(a - b) <= kUnitCircleBand * scale) {
      throw NoStabilizingSolution("symplectic pencil has an eigenvalue on the unit circle");
    }
  }
  if (sdim != n) {
    std::ostringstream msg;
    msg << "stable deflating subspace has dimension " << sdim << ", expected " << n;
    throw NoStabilizingSolution(msg.str());
  }

  const Eigen::MatrixXd U1 = Z.topLeftCorner(n, n);
  const Eigen::MatrixXd U2 = Z.block(n, 0, n, n);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(U1);
  const auto& s = svd.singularValues();
  const double condition = s(n - 1) > 0.0 ? s(0) / s(n - 1) : std::numeric_limits<double>::infinity();

  DareSolution sol;
  if (condition > kBasisConditionLimit) {
    sol = Assemble(pr, DifferenceIteration(pr));
    sol.used_iteration = true;
  } else {
    // X = U2 U1^{-1} and u = U3 U1^{-1} x on the stable subspace.
    const Eigen::MatrixXd U3 = Z.block(2 * n, 0, m, n);
    const auto U1t = U1.transpose().partialPivLu();
    const Eigen::MatrixXd X = U1t.solve(U2.transpose()).transpose();
    const Eigen::MatrixXd K = -U1t.solve(U3.transpose()).transpose();
    sol = AssembleWithGain(pr, X, K);
  }
  sol.basis_condition = condition;
  sol = Refine(pr, std::move(sol));

  if (!(sol.spectral_radius < 1.0 - kStabilityMargin)) {
    std::ostringstream msg;
    msg << "Riccati solution is not stabilizing (spectral radius " << sol.spectral_radius << ")";
    throw NoStabilizingSolution(msg.str());
  }
  const double allowed = tol * (1.0 + sol.X.norm()) *
                         (condition_scaled ? std::max(1.0, sol.basis_condition) : 1.0);
  if (!(sol.residual <= allowed)) {
    std::ostringstream msg;
    msg << "Riccati residual " << sol.residual << " exceeds tolerance";
    throw NoStabilizingSolution(msg.str());
  }
  if (MinEigenvalue(pr.R) > 0.0 && pr.S.norm() == 0.0 && MinEigenvalue(pr.Q) >= 0.0 &&
      MinEigenvalue(sol.X) < -1e-10 * std::max(1.0, sol.X.norm())) {
    throw NoStabilizingSolution("definite Riccati solution is not positive semidefinite");
  }
  return sol;
}

}  // namespace

DareSolution SolveDare(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                       const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R_hat, double tol) {
  const Eigen::MatrixXd S = Eigen::MatrixXd::Zero(A.rows(), B.cols());
  return Solve(Problem{A, B, Q, R_hat, S}, tol, false);
}

DareSolution SolveDare(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                       const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R_hat,
                       const Eigen::MatrixXd& S, double tol) {
  return Solve(Problem{A, B, Q, R_hat, S}, tol, false);
}

double DareResidual(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                    const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R_hat,
                    const Eigen::MatrixXd& X) {
  const Eigen::MatrixXd S = Eigen::MatrixXd::Zero(A.rows(), B.cols());
  const Problem pr{A, B, Q, R_hat, S};
  CheckDimensions(pr);
  return Defect(pr, X).norm();
}

Feasibility HinfFeasibility(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B_u,
                            const Eigen::MatrixXd& B_d, const Eigen::MatrixXd& Q,
                            const Eigen::MatrixXd& R, double gamma) {
  if (!(gamma > 0.0)) throw InvalidInput("gamma must be positive");
  const auto n = A.rows();
  const auto nu = B_u.cols();
  const auto nd = B_d.cols();
  Eigen::MatrixXd B(n, nu + nd);
  B << B_u, B_d;
  const Eigen::MatrixXd R_hat =
      BlockDiagonal(R, -gamma * gamma * Eigen::MatrixXd::Identity(nd, nd));

  Feasibility result;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  result.H_min_eig = result.Delta_min_eig = result.X_min_eig = nan;
  DareSolution sol;
  try {
    // X grows without bound as gamma approaches the optimal level, so the
    // residual allowance scales with the subspace basis condition number.
    const Eigen::MatrixXd S = Eigen::MatrixXd::Zero(n, nu + nd);
    sol = Solve(Problem{A, B, Q, R_hat, S}, 1e-9, true);
  } catch (const NoStabilizingSolution& e) {
    result.reason = e.what();
    return result;
  } catch (const DegeneratePencil& e) {
    result.reason = e.what();
    return result;
  }

  const Eigen::MatrixXd& X = sol.X;
  const Eigen::MatrixXd H = R + B_u.transpose() * X * B_u;
  result.H_min_eig = MinEigenvalue(H);
  result.X_min_eig = MinEigenvalue(X);
  if (result.H_min_eig > 0.0) {
    const Eigen::MatrixXd XBd = X * B_d;
    const Eigen::MatrixXd cross = B_u.transpose() * XBd;
    const Eigen::MatrixXd Delta = gamma * gamma * Eigen::MatrixXd::Identity(nd, nd) -
                                  B_d.transpose() * XBd +
                                  cross.transpose() * H.llt().solve(cross);
    result.Delta_min_eig = MinEigenvalue(Delta);
  }
  const bool x_psd = result.X_min_eig >= -1e-9 * (1.0 + X.norm());
  if (!(result.H_min_eig > 0.0)) {
    result.reason = "R + B_u'XB_u is not positive definite";
  } else if (!(result.Delta_min_eig > 0.0)) {
    result.reason = "Delta is not positive definite";
  } else if (!x_psd) {
    result.reason = "Riccati solution is not positive semidefinite";
  } else {
    result.feasible = true;
  }
  result.solution = std::move(sol);
  return result;
}

bool BoundedRealFeasible(const StateSpace& sys, double gamma) {
  if (!(gamma > 0.0)) return false;
  const int n = sys.states();
  if (n == 0) return SpectralNorm(sys.D) < gamma;
  const auto m = sys.B.cols();
  const Eigen::MatrixXd R_hat =
      sys.D.transpose() * sys.D - gamma * gamma * Eigen::MatrixXd::Identity(m, m);
  const Eigen::MatrixXd S = sys.C.transpose() * sys.D;
  const Eigen::MatrixXd Q = sys.C.transpose() * sys.C;
  try {
    // Near gamma = |sys|_inf the solution grows without bound, as in
    // HinfFeasibility, so the residual allowance is condition scaled.
    const DareSolution sol = Solve(Problem{sys.A, sys.B, Q, R_hat, S}, 1e-9, true);
    const Eigen::MatrixXd margin = -(R_hat + sys.B.transpose() * sol.X * sys.B);
    return MinEigenvalue(margin) > 0.0 &&
           MinEigenvalue(sol.X) >= -1e-9 * (1.0 + sol.X.norm());
  } catch (const NoStabilizingSolution&) {
    return false;
  } catch (const DegeneratePencil&) {
    return false;
  }
}

double HinfNorm(const StateSpace& sys, double tol) {
  if (!(tol > 0.0)) throw InvalidInput("tolerance must be positive");
  const int n = sys.states();
  if (n == 0) return SpectralNorm(sys.D);
  const double rho = SpectralRadius(sys.A);
  if (!(rho < 1.0)) {
    std::ostringstream msg;
    msg << "H-infinity norm requires a Schur system (spectral radius " << rho << ")";
    throw PreconditionViolated(msg.str());
  }
  double lo = 0.0;
  for (const auto& G : FreqResponse(sys, HalfCircleGrid(256))) lo = std::max(lo, SpectralNorm(G));
  if (lo == 0.0) return 0.0;
  double hi = 2.0 * lo;
  int doublings = 0;
  while (!BoundedRealFeasible(sys, hi)) {
    if (++doublings > 60) throw SynthesisFailure("H-infinity norm bracket escalation failed");
    lo = hi;
    hi *= 2.0;
  }
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (BoundedRealFeasible(sys, mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

}  // namespace previewctl
