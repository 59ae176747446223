#pragma once

#include <random>

#include <Eigen/Dense>

#include "previewctl/lti.hpp"

namespace previewctl::testing {

inline Plant ReferencePlant() {
  Plant p;
  p.A.resize(2, 2);
  p.A << 3, 1, -1, -2;
  p.B_d.resize(2, 1);
  p.B_d << 1, 1;
  p.B_u.resize(2, 1);
  p.B_u << 3, -1;
  p.Q = 3.0 * Eigen::MatrixXd::Identity(2, 2);
  p.R = Eigen::MatrixXd::Identity(1, 1);
  return p;
}

inline Eigen::MatrixXd RandomMatrix(std::mt19937_64& rng, int rows, int cols) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::MatrixXd M(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) M(i, j) = n(rng);
  return M;
}

/// Random plant that passes ValidatePlant (redrawn until it does).
inline Plant RandomPlant(std::mt19937_64& rng, int nx, int nu, int nd) {
  for (;;) {
    Plant p;
    p.A = RandomMatrix(rng, nx, nx) / std::sqrt(static_cast<double>(nx));
    p.B_u = RandomMatrix(rng, nx, nu);
    p.B_d = RandomMatrix(rng, nx, nd);
    const Eigen::MatrixXd C = RandomMatrix(rng, nx, nx);
    p.Q = C.transpose() * C;
    const Eigen::MatrixXd D = RandomMatrix(rng, nu, nu);
    p.R = D.transpose() * D + Eigen::MatrixXd::Identity(nu, nu);
    if (ValidatePlant(p).empty()) return p;
  }
}

inline Signal RandomSignal(std::mt19937_64& rng, int dim, int length) {
  return Signal(RandomMatrix(rng, dim, length));
}

}  // namespace previewctl::testing
