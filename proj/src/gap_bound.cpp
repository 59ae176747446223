#include "previewctl/gap_bound.hpp"

#include <cmath>
#include <sstream>

#include "previewctl/errors.hpp"
#include "previewctl/linalg.hpp"

namespace previewctl {
namespace {

constexpr double kAlphaCeiling = 1.0 - 1e-6;
constexpr long kMaxEnvelopeSteps = 1000000;
constexpr double kTailRelTol = 1e-12;

struct Envelope {
  double c = 0.0;
  int t_cut = 0;
};

// Certifies |A^j| <= alpha^j for j >= t_cut and bounds sum_k |A^k| using a
// Lyapunov-weighted norm for the tail. Returns nullopt when the envelope
// cannot be certified within the step budget.
std::optional<Envelope> Certify(const Eigen::MatrixXd& A, double rho, double alpha) {
  const auto n = A.rows();
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  const double beta = 0.5 * (rho + alpha);
  const Eigen::MatrixXd P = SolveStein(A / beta, I);
  if (!P.allFinite()) return std::nullopt;
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(Symmetrize(P));
  const double kappa = eig.eigenvalues().maxCoeff() / eig.eigenvalues().minCoeff();
  if (!(kappa >= 1.0) || !std::isfinite(kappa)) return std::nullopt;
  const Eigen::MatrixXd P_inv_half =
      eig.eigenvectors() * eig.eigenvalues().cwiseInverse().cwiseSqrt().asDiagonal() *
      eig.eigenvectors().transpose();
  const Eigen::MatrixXd P_half = SymmetricSqrt(P);
  // Induced P-norm of A, so |A^k| <= sqrt(kappa) q^k.
  const double q = SpectralNorm(Eigen::MatrixXd(P_half * A * P_inv_half));
  if (!(q < alpha)) return std::nullopt;
  const double root_kappa = std::sqrt(kappa);
  const double j0_real = q == 0.0 ? 1.0 : std::log(root_kappa) / std::log(alpha / q);
  if (!(j0_real < static_cast<double>(kMaxEnvelopeSteps))) return std::nullopt;
  const long J0 = std::max(0L, static_cast<long>(std::ceil(j0_real)));

  Envelope env;
  Eigen::MatrixXd power = I;
  double sum = 0.0;
  int last_violation = -1;
  for (long j = 0;; ++j) {
    const double norm = SpectralNorm(power);
    if (j < J0 && norm > std::pow(alpha, static_cast<double>(j)) * (1.0 + 1e-12))
      last_violation = static_cast<int>(j);
    sum += norm;
    const double tail = root_kappa * std::pow(q, static_cast<double>(j + 1)) / (1.0 - q);
    if (j + 1 >= J0 && (tail <= kTailRelTol * sum || norm == 0.0)) {
      env.c = sum + (norm == 0.0 ? 0.0 : tail);
      break;
    }
    if (j >= kMaxEnvelopeSteps) return std::nullopt;
    power = A * power;
  }
  env.t_cut = last_violation + 1;
  return env;
}

}  // namespace

double GapBound::Bound(int p) const {
  if (p < 0) throw InvalidInput("preview length must be nonnegative");
  return (4.0 * a + 2.0 * b * c) * std::pow(alpha, p + 1) / (1.0 - alpha);
}

GapBound H2GapBoundFromParts(const Eigen::MatrixXd& X, const Eigen::MatrixXd& B_d,
                             const Eigen::MatrixXd& K_v, const Eigen::MatrixXd& H,
                             const Eigen::MatrixXd& A_tilde, std::optional<double> alpha) {
  GapBound g;
  const double nB = SpectralNorm(B_d), nX = SpectralNorm(X);
  g.a = nB * nB * nX;
  g.b = nB * nX * SpectralNorm(K_v) * SpectralNorm(H) * nX * nB;
  const double rho = SpectralRadius(A_tilde);
  if (!(rho < 1.0)) throw BoundUnavailable("closed-loop matrix is not Schur stable");

  if (alpha) {
    g.alpha_trace.push_back(*alpha);
    if (!(*alpha > rho && *alpha < 1.0)) {
      std::ostringstream msg;
      msg << "alpha = " << *alpha << " must lie in (" << rho << ", 1)";
      throw BoundUnavailable(msg.str());
    }
    const auto env = Certify(A_tilde, rho, *alpha);
    if (!env) {
      std::ostringstream msg;
      msg << "could not certify the decay envelope for alpha = " << *alpha;
      throw BoundUnavailable(msg.str());
    }
    g.alpha = *alpha;
    g.c = env->c;
    g.t_cut = env->t_cut;
    return g;
  }

  for (int k = 0;; ++k) {
    const double a_k = 1.0 - (1.0 - rho) / std::ldexp(1.0, k + 1);
    if (a_k > kAlphaCeiling) {
      std::ostringstream msg;
      msg << "no decay envelope certified; alphas tried:";
      for (double t : g.alpha_trace) msg << " " << t;
      throw BoundUnavailable(msg.str());
    }
    g.alpha_trace.push_back(a_k);
    if (const auto env = Certify(A_tilde, rho, a_k)) {
      g.alpha = a_k;
      g.c = env->c;
      g.t_cut = env->t_cut;
      return g;
    }
  }
}

GapBound H2GapBound(const Plant& plant, const NoncausalController& nc,
                    std::optional<double> alpha) {
  return H2GapBoundFromParts(nc.X, plant.B_d, nc.K_v, nc.H, nc.A_tilde, alpha);
}

GapBound H2GapBound(const Plant& plant, std::optional<double> alpha) {
  RequireValidPlant(plant);
  return H2GapBound(plant, BuildNoncausal(plant), alpha);
}

}  // namespace previewctl
