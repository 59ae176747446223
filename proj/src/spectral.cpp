#include "previewctl/spectral.hpp"

#include <cmath>
#include <complex>
#include <limits>
#include <sstream>

#include <unsupported/Eigen/FFT>

#include "previewctl/errors.hpp"
#include "previewctl/linalg.hpp"

namespace previewctl {
namespace {

using cd = std::complex<double>;
using Samples = std::vector<Eigen::MatrixXcd>;

constexpr double kTrimFraction = 1e-2;

// Entry-wise transforms of a matrix-valued sequence. Forward maps
// coefficients c_k (of e^{-ik omega}) to samples; inverse maps back.
Samples Transform(const Samples& in, bool forward) {
  const int M = static_cast<int>(in.size());
  const auto rows = in[0].rows(), cols = in[0].cols();
  Samples out(M, Eigen::MatrixXcd::Zero(rows, cols));
  Eigen::FFT<double> fft;
  std::vector<cd> src(M), dst(M);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      for (int k = 0; k < M; ++k) src[k] = in[k](i, j);
      if (forward) {
        fft.fwd(dst, src);
      } else {
        fft.inv(dst, src);
      }
      for (int k = 0; k < M; ++k) out[k](i, j) = dst[k];
    }
  }
  return out;
}

// Wilson's iteration for S = psi psi^* on the full circle; returns psi
// samples with psi causal and psi_0 lower triangular.
Samples Wilson(const Samples& S, int max_iterations, int& iterations) {
  const int M = static_cast<int>(S.size());
  const auto n = S[0].rows();
  Eigen::MatrixXcd mean = Eigen::MatrixXcd::Zero(n, n);
  for (const auto& s : S) mean += s;
  mean /= static_cast<double>(M);
  Eigen::LLT<Eigen::MatrixXcd> llt(0.5 * (mean + mean.adjoint()));
  if (llt.info() != Eigen::Success)
    throw FactorizationFailure("spectrum mean is not positive definite");
  Samples psi(M, llt.matrixL().toDenseMatrix());
  const Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(n, n);

  std::ostringstream trace;
  double previous = std::numeric_limits<double>::infinity();
  for (iterations = 1; iterations <= max_iterations; ++iterations) {
    Samples g(M);
    for (int k = 0; k < M; ++k) {
      const Eigen::MatrixXcd P = psi[k].partialPivLu().inverse();
      g[k] = P * S[k] * P.adjoint() + I;
    }
    Samples c = Transform(g, false);
    // Causal projection: strictly positive lags, half of lag 0 split so that
    // the product stays lower triangular at lag 0, nothing for negative lags.
    Eigen::MatrixXcd c0 = 0.5 * (c[0] + c[0].adjoint());
    Eigen::MatrixXcd lower = c0.triangularView<Eigen::Lower>();
    lower.diagonal() *= 0.5;
    c[0] = lower;
    c[M / 2] *= 0.5;
    for (int k = M / 2 + 1; k < M; ++k) c[k].setZero();
    const Samples gp = Transform(c, true);

    double change = 0.0, scale = 0.0;
    for (int k = 0; k < M; ++k) {
      Eigen::MatrixXcd next = psi[k] * gp[k];
      change = std::max(change, (next - psi[k]).norm());
      scale = std::max(scale, next.norm());
      psi[k] = std::move(next);
    }
    trace << " " << change / scale;
    if (!std::isfinite(change)) break;
    const double relative = change / scale;
    // Quadratic convergence ends at the rounding floor; stop there.
    if (relative <= 1e-14 || (relative <= 1e-10 && relative >= previous)) return psi;
    previous = relative;
  }
  throw FactorizationFailure("Wilson iteration did not converge; relative updates:" +
                             trace.str());
}

std::vector<Eigen::MatrixXd> InverseTaps(const std::vector<Eigen::MatrixXd>& delta, int count,
                                         double& tail) {
  const int L = static_cast<int>(delta.size()) - 1;
  const auto lu0 = delta[0].partialPivLu();
  std::vector<Eigen::MatrixXd> gamma;
  gamma.push_back(lu0.inverse());
  const double scale = gamma[0].norm();
  tail = 0.0;
  int quiet = 0;
  for (int k = 1; k <= 16 * std::max(count, 1); ++k) {
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(delta[0].rows(), delta[0].cols());
    for (int j = 1; j <= std::min(k, L); ++j) acc += delta[j] * gamma[k - j];
    gamma.push_back(-lu0.solve(acc));
    const double norm = gamma.back().norm();
    if (k > count) {
      tail += SpectralNorm(gamma.back());
      quiet = norm <= 1e-20 * scale ? quiet + 1 : 0;
      if (quiet > L) break;
    }
    if (!std::isfinite(norm)) {
      tail = std::numeric_limits<double>::infinity();
      break;
    }
  }
  gamma.resize(count + 1);
  return gamma;
}

// Fit error on the grid and inverse taps for the current coefficients.
void Evaluate(const Samples& phi_half, int M, SpectralFactor& f) {
  const int G = M / 2;
  const auto n = phi_half[0].rows();
  const int L = f.order_used();
  Samples padded(M, Eigen::MatrixXcd::Zero(n, n));
  for (int k = 0; k <= L; ++k) padded[k] = f.coeffs[k].cast<cd>();
  const Samples delta = Transform(padded, true);
  f.fit_error = 0.0;
  for (int k = 0; k <= G; ++k) {
    const Eigen::MatrixXcd err = delta[k].adjoint() * delta[k] - phi_half[k];
    f.fit_error = std::max(f.fit_error, SpectralNorm(err) / SpectralNorm(phi_half[k]));
  }
  f.inv_coeffs = InverseTaps(f.coeffs, f.order, f.inverse_tail);
}

}  // namespace

Eigen::MatrixXcd EvaluateFir(const std::vector<Eigen::MatrixXd>& coeffs, double omega) {
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(coeffs.at(0).rows(), coeffs.at(0).cols());
  for (std::size_t k = 0; k < coeffs.size(); ++k)
    out += std::polar(1.0, -omega * static_cast<double>(k)) * coeffs[k].cast<cd>();
  return out;
}

SpectralFactor FactorSpectrum(const Samples& phi_half, const FactorizationOptions& options) {
  const int G = static_cast<int>(phi_half.size()) - 1;
  if (G < 1) throw InvalidInput("spectrum needs at least two grid points");
  if (options.order < 1 || options.max_order < options.order)
    throw InvalidInput("invalid FIR order range");
  const int M = 2 * G;

  Samples S(M);
  for (int k = 0; k <= G; ++k) S[k] = phi_half[k].transpose();
  for (int k = G + 1; k < M; ++k) S[k] = phi_half[M - k].conjugate().transpose();

  SpectralFactor f;
  f.grid_size = G;
  const Samples psi = Wilson(S, options.max_iterations, f.iterations);
  const Samples psi_coeffs = Transform(psi, false);

  for (int L = options.order;; L *= 2) {
    if (2 * L >= M) {
      std::ostringstream msg;
      msg << "FIR order " << L << " needs a grid finer than " << G << " points";
      throw OrderTooSmall(msg.str());
    }
    f.order = L;
    f.coeffs.clear();
    for (int k = 0; k <= L; ++k) f.coeffs.push_back(psi_coeffs[k].real().transpose());
    Evaluate(phi_half, M, f);
    if (f.fit_error <= options.threshold && f.inverse_tail <= options.threshold) {
      // Taps at the rounding floor add nearly unobservable filter states that
      // spoil the downstream Riccati pencils, so trim them.
      const double trim = kTrimFraction * options.threshold * SpectralNorm(f.coeffs[0]);
      int keep = L;
      double tail = 0.0;
      while (keep > 0 && tail + SpectralNorm(f.coeffs[keep]) <= trim)
        tail += SpectralNorm(f.coeffs[keep--]);
      if (keep < L) {
        SpectralFactor trimmed = f;
        trimmed.coeffs.resize(keep + 1);
        Evaluate(phi_half, M, trimmed);
        if (trimmed.fit_error <= options.threshold && trimmed.inverse_tail <= options.threshold)
          return trimmed;
      }
      return f;
    }
    if (2 * L > options.max_order) {
      std::ostringstream msg;
      msg << "spectral factor of order " << L << " has fit error " << f.fit_error
          << " and inverse tail " << f.inverse_tail << " (threshold " << options.threshold
          << "); increase the FIR order";
      throw OrderTooSmall(msg.str());
    }
  }
}

SpectralFactor SpectralFactorize(const NoncausalResponse& response, double gamma,
                                 const FactorizationOptions& options) {
  if (!(gamma > 0.0)) throw InvalidInput("gamma must be positive");
  Samples phi;
  phi.reserve(response.W.size());
  for (const auto& W : response.W) {
    phi.push_back(W + gamma * gamma * Eigen::MatrixXcd::Identity(W.rows(), W.cols()));
  }
  SpectralFactor f = FactorSpectrum(phi, options);
  f.gamma = gamma;
  return f;
}

SpectralFactor SpectralFactorize(const Plant& plant, double gamma, int order, int grid_size) {
  const NoncausalController nc = BuildNoncausal(plant);
  const NoncausalResponse response =
      ComputeNoncausalResponse(plant, nc, HalfCircleGrid(grid_size));
  FactorizationOptions options;
  options.order = order;
  options.max_order = std::max(order, options.max_order);
  return SpectralFactorize(response, gamma, options);
}

}  // namespace previewctl
