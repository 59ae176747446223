#include <cmath>
#include <complex>
#include <random>

#include <gtest/gtest.h>

#include "previewctl/errors.hpp"
#include "previewctl/linalg.hpp"
#include "previewctl/noncausal.hpp"
#include "previewctl/spectral.hpp"
#include "test_util.hpp"

namespace previewctl {
namespace {

using testing::RandomMatrix;
using testing::ReferencePlant;

std::vector<Eigen::MatrixXcd> SampleSpectrum(const std::vector<Eigen::MatrixXd>& coeffs,
                                             int grid_size) {
  std::vector<Eigen::MatrixXcd> phi;
  for (double w : HalfCircleGrid(grid_size)) {
    const Eigen::MatrixXcd D = EvaluateFir(coeffs, w);
    phi.push_back(D.adjoint() * D);
  }
  return phi;
}

TEST(EvaluateFir, MatchesDirectSum) {
  const std::vector<Eigen::MatrixXd> c = {Eigen::MatrixXd::Constant(1, 1, 2.0),
                                          Eigen::MatrixXd::Constant(1, 1, -0.5)};
  const double w = 0.7;
  const std::complex<double> expected = 2.0 - 0.5 * std::polar(1.0, -w);
  EXPECT_NEAR(std::abs(EvaluateFir(c, w)(0, 0) - expected), 0.0, 1e-15);
}

TEST(FactorSpectrum, ConstantScalar) {
  const std::vector<Eigen::MatrixXcd> phi(257, Eigen::MatrixXcd::Constant(1, 1, 4.0));
  const SpectralFactor f = FactorSpectrum(phi);
  EXPECT_NEAR(f.coeffs[0](0, 0), 2.0, 1e-12);
  for (int k = 1; k <= f.order_used(); ++k) EXPECT_NEAR(f.coeffs[k](0, 0), 0.0, 1e-12);
  EXPECT_LE(f.fit_error, 1e-12);
}

TEST(FactorSpectrum, RecoversMinimumPhaseMovingAverage) {
  // |1 + 0.5 e^{-iw}|^2 has the minimum-phase factor 1 + 0.5 e^{-iw}; the
  // mirror factor 0.5 + e^{-iw} has its zero outside the disk.
  const std::vector<Eigen::MatrixXd> truth = {Eigen::MatrixXd::Constant(1, 1, 1.0),
                                              Eigen::MatrixXd::Constant(1, 1, 0.5)};
  const SpectralFactor f = FactorSpectrum(SampleSpectrum(truth, 512));
  EXPECT_NEAR(f.coeffs[0](0, 0), 1.0, 1e-9);
  ASSERT_GE(f.order_used(), 1);
  EXPECT_NEAR(f.coeffs[1](0, 0), 0.5, 1e-9);
  // Inverse taps are (-0.5)^k.
  for (int k = 0; k < std::min<int>(10, f.inv_coeffs.size()); ++k)
    EXPECT_NEAR(f.inv_coeffs[k](0, 0), std::pow(-0.5, k), 1e-9);
}

TEST(FactorSpectrum, RecoversCanonicalMatrixFactor) {
  // Delta_0 upper triangular with positive diagonal and a small Delta_1 keep
  // the factor minimum phase, so it is the unique canonical factor.
  std::mt19937_64 rng(31);
  Eigen::MatrixXd D0 = RandomMatrix(rng, 2, 2).triangularView<Eigen::Upper>();
  D0(0, 0) = std::abs(D0(0, 0)) + 1.0;
  D0(1, 1) = std::abs(D0(1, 1)) + 1.0;
  const Eigen::MatrixXd D1 = 0.2 * RandomMatrix(rng, 2, 2);
  const SpectralFactor f = FactorSpectrum(SampleSpectrum({D0, D1}, 512));
  EXPECT_LE((f.coeffs[0] - D0).norm(), 1e-8);
  ASSERT_GE(f.order_used(), 1);
  EXPECT_LE((f.coeffs[1] - D1).norm(), 1e-8);
  EXPECT_LE(f.fit_error, 1e-8);
}

TEST(FactorSpectrum, RejectsIndefiniteSpectrum) {
  std::vector<Eigen::MatrixXcd> phi(65, Eigen::MatrixXcd::Constant(1, 1, 1.0));
  phi[10](0, 0) = -1.0;
  EXPECT_THROW(FactorSpectrum(phi), Error);
}

TEST(SpectralFactorize, ReferencePlantAtUnitLevel) {
  const Plant p = ReferencePlant();
  const NoncausalController nc = BuildNoncausal(p);
  const NoncausalResponse r = ComputeNoncausalResponse(p, nc, HalfCircleGrid(4096));
  const SpectralFactor f = SpectralFactorize(r, 1.0);
  EXPECT_LE(f.fit_error, 1e-8);
  EXPECT_LE(f.inverse_tail, 1e-8);
  EXPECT_EQ(f.grid_size, 4096);
  // Independent residual on an off-grid frequency set.
  for (double w = 0.013; w < M_PI; w += 0.1) {
    const NoncausalResponse rw = ComputeNoncausalResponse(p, nc, {w});
    const Eigen::MatrixXcd phi = Eigen::MatrixXcd::Identity(1, 1) + rw.W[0];
    const Eigen::MatrixXcd D = EvaluateFir(f.coeffs, w);
    EXPECT_LE(SpectralNorm(Eigen::MatrixXcd(D.adjoint() * D - phi)), 1e-7 * SpectralNorm(phi));
  }
  // Canonical normalization.
  EXPECT_GT(f.coeffs[0](0, 0), 0.0);
}

TEST(SpectralFactorize, ZeroDisturbanceInputGivesConstantFactor) {
  Plant p = ReferencePlant();
  p.B_d.setZero();
  const SpectralFactor f = SpectralFactorize(p, 2.0, 64, 512);
  EXPECT_NEAR(f.coeffs[0](0, 0), 2.0, 1e-12);
}

}  // namespace
}  // namespace previewctl
