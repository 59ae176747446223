#pragma once

// Canonical spectral factorization of gamma^2 I + W(omega), where W is the
// non-causal cost symbol: Phi = Delta^* Delta with Delta(omega) =
// sum_k Delta_k e^{-ik omega} causal and causally invertible.

#include <vector>

#include <Eigen/Dense>

#include "previewctl/lti.hpp"
#include "previewctl/noncausal.hpp"

namespace previewctl {

struct SpectralFactor {
  double gamma = 0.0;
  /// Delta_0 ... Delta_L (nd x nd); Delta_0 is upper triangular with a
  /// positive diagonal.
  std::vector<Eigen::MatrixXd> coeffs;
  /// Gamma_0 ... Gamma_L of the causal inverse Delta^{-1} (long division).
  std::vector<Eigen::MatrixXd> inv_coeffs;
  /// max over the grid of |Delta^* Delta - Phi| / |Phi| (spectral norms).
  double fit_error = 0.0;
  /// sum_{k > L} |Gamma_k|: what truncating the inverse at L discards.
  double inverse_tail = 0.0;
  int iterations = 0;
  /// FIR order that met the threshold; `coeffs` may be shorter because
  /// taps at the rounding floor are trimmed.
  int order = 0;
  int grid_size = 0;

  int order_used() const { return static_cast<int>(coeffs.size()) - 1; }
};

struct FactorizationOptions {
  int order = 64;
  int max_order = 512;
  double threshold = 1e-8;
  int max_iterations = 200;
};

/// Factors a Hermitian positive definite spectrum sampled on the half-circle
/// grid omega_k = pi k / G, k = 0..G (real-coefficient symmetry supplies the
/// other half). Wilson's iteration runs on 2G points; the FIR order doubles
/// from options.order up to options.max_order until both fit_error and
/// inverse_tail are below options.threshold.
///
/// Throws FactorizationFailure (no convergence) or OrderTooSmall.
SpectralFactor FactorSpectrum(const std::vector<Eigen::MatrixXcd>& phi_half,
                              const FactorizationOptions& options = {});

/// Factor of gamma^2 I + W for a precomputed non-causal response.
SpectralFactor SpectralFactorize(const NoncausalResponse& response, double gamma,
                                 const FactorizationOptions& options = {});

/// Convenience overload that builds the response on a grid of `grid_size`.
SpectralFactor SpectralFactorize(const Plant& plant, double gamma, int order = 64,
                                 int grid_size = 4096);

/// Delta(omega) = sum_k coeffs[k] e^{-ik omega}.
Eigen::MatrixXcd EvaluateFir(const std::vector<Eigen::MatrixXd>& coeffs, double omega);

}  // namespace previewctl
