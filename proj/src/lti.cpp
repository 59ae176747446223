#include "previewctl/lti.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "previewctl/errors.hpp"
#include "previewctl/linalg.hpp"

namespace previewctl {
namespace {

constexpr int kMaxSimulationSteps = 1'000'000;

// Numerical rank test used by both PBH checks.
bool HasFullColumnRank(const Eigen::MatrixXcd& M) {
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(M);
  const auto& s = svd.singularValues();
  if (s.size() == 0) return true;
  return s(s.size() - 1) > 1e-10 * std::max(1.0, s(0)) &&
         s.size() == std::min(M.rows(), M.cols());
}

std::string Shape(const Eigen::MatrixXd& M) {
  std::ostringstream out;
  out << M.rows() << "x" << M.cols();
  return out.str();
}

}  // namespace

void RequireConsistentDimensions(const Plant& plant) {
  const auto nx = plant.A.rows();
  std::ostringstream msg;
  if (plant.A.cols() != nx) msg << "A must be square (got " << Shape(plant.A) << "); ";
  if (plant.B_d.rows() != nx)
    msg << "B_d must have " << nx << " rows (got " << Shape(plant.B_d) << "); ";
  if (plant.B_u.rows() != nx)
    msg << "B_u must have " << nx << " rows (got " << Shape(plant.B_u) << "); ";
  if (plant.Q.rows() != nx || plant.Q.cols() != nx)
    msg << "Q must be " << nx << "x" << nx << " (got " << Shape(plant.Q) << "); ";
  if (plant.R.rows() != plant.B_u.cols() || plant.R.cols() != plant.B_u.cols())
    msg << "R must be " << plant.B_u.cols() << "x" << plant.B_u.cols() << " (got "
        << Shape(plant.R) << "); ";
  if (nx == 0) msg << "plant has no states; ";
  if (plant.B_u.cols() == 0) msg << "plant has no inputs; ";
  if (plant.B_d.cols() == 0) msg << "plant has no disturbance channels; ";
  const std::string report = msg.str();
  if (!report.empty()) throw InvalidInput("dimension mismatch: " + report);
}

std::vector<std::string> ValidatePlant(const Plant& plant) {
  std::vector<std::string> violations;
  try {
    RequireConsistentDimensions(plant);
  } catch (const InvalidInput& e) {
    violations.emplace_back(e.what());
    return violations;
  }
  const int nx = plant.nx();
  auto finite = [](const Eigen::MatrixXd& M) { return M.allFinite(); };
  if (!finite(plant.A) || !finite(plant.B_d) || !finite(plant.B_u) ||
      !finite(plant.Q) || !finite(plant.R)) {
    violations.emplace_back("plant matrices contain non-finite entries");
    return violations;
  }

  const double q_scale = std::max(1.0, plant.Q.norm());
  if ((plant.Q - plant.Q.transpose()).norm() > 1e-12 * q_scale)
    violations.emplace_back("Q is not symmetric");
  if (MinEigenvalue(plant.Q) < -1e-12)
    violations.emplace_back("Q has an eigenvalue below -1e-12 (not PSD)");
  const double r_scale = std::max(1.0, plant.R.norm());
  if ((plant.R - plant.R.transpose()).norm() > 1e-12 * r_scale)
    violations.emplace_back("R is not symmetric");
  if (!(MinEigenvalue(plant.R) > 0.0))
    violations.emplace_back("R is not positive definite");

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(plant.A);
  const auto& s = svd.singularValues();
  if (!(s(nx - 1) > 1e-12 * s(0)))
    violations.emplace_back("A is singular (smallest singular value <= 1e-12 x largest)");

  Eigen::EigenSolver<Eigen::MatrixXd> es(plant.A, false);
  const Eigen::VectorXcd eigenvalues = es.eigenvalues();
  const Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(nx, nx);
  const Eigen::MatrixXcd A = plant.A.cast<std::complex<double>>();
  Eigen::MatrixXcd q_half;
  try {
    q_half = SymmetricSqrt(plant.Q).cast<std::complex<double>>();
  } catch (const InvalidInput&) {
    return violations;
  }
  for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
    const std::complex<double> lambda = eigenvalues(i);
    const double mag = std::abs(lambda);
    if (mag >= 1.0) {
      Eigen::MatrixXcd pbh(nx, nx + plant.nu());
      pbh << lambda * I - A, plant.B_u.cast<std::complex<double>>();
      if (!HasFullColumnRank(pbh.adjoint())) {
        std::ostringstream msg;
        msg << "(A, B_u) is not stabilizable: mode " << lambda << " is uncontrollable";
        violations.push_back(msg.str());
      }
    }
    if (std::abs(mag - 1.0) <= 1e-9) {
      Eigen::MatrixXcd pbh(2 * nx, nx);
      pbh << lambda * I - A, q_half;
      if (!HasFullColumnRank(pbh)) {
        std::ostringstream msg;
        msg << "(A, Q) has an unobservable mode on the unit circle: " << lambda;
        violations.push_back(msg.str());
      }
    }
  }
  return violations;
}

void RequireValidPlant(const Plant& plant) {
  const auto violations = ValidatePlant(plant);
  if (violations.empty()) return;
  std::ostringstream msg;
  msg << "plant violates standing assumptions:";
  for (const auto& v : violations) msg << "\n  - " << v;
  throw InvalidInput(msg.str());
}

Signal::Signal(int dim, int length) : samples_(Eigen::MatrixXd::Zero(dim, length)) {
  if (dim < 0 || length < 0) throw InvalidInput("signal dimensions must be nonnegative");
}

Signal::Signal(Eigen::MatrixXd samples) : samples_(std::move(samples)) {
  if (!samples_.allFinite()) throw InvalidInput("signal contains non-finite samples");
}

Signal Signal::Impulse(int dim, int length, int time, int channel) {
  if (time < 0 || time >= length || channel < 0 || channel >= dim)
    throw InvalidInput("impulse position outside the signal support");
  Eigen::MatrixXd samples = Eigen::MatrixXd::Zero(dim, length);
  samples(channel, time) = 1.0;
  return Signal(std::move(samples));
}

Eigen::VectorXd Signal::At(int t) const {
  if (t < 0 || t >= length()) return Eigen::VectorXd::Zero(dim());
  return samples_.col(t);
}

Signal Signal::Delayed(int k) const {
  if (k < 0) throw InvalidInput("delay must be nonnegative");
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(dim(), length() + k);
  out.rightCols(length()) = samples_;
  return Signal(std::move(out));
}

Signal Signal::Scaled(double alpha) const { return Signal(Eigen::MatrixXd(alpha * samples_)); }

Eigen::VectorXd PreviewController::Control(const Eigen::VectorXd& x,
                                           const Signal& d, int t) const {
  Eigen::VectorXd u = -K_x * x;
  for (int j = 0; j < static_cast<int>(taps.size()); ++j) u.noalias() -= taps[j] * d.At(t + j);
  for (int k = 1; k <= static_cast<int>(memory.size()); ++k)
    u.noalias() -= memory[k - 1] * d.At(t - k);
  return u;
}

PreviewController ZeroController(const Plant& plant, int p) {
  if (p < 0) throw InvalidInput("preview length must be nonnegative");
  PreviewController ctrl;
  ctrl.K_x = Eigen::MatrixXd::Zero(plant.nu(), plant.nx());
  ctrl.taps.assign(p + 1, Eigen::MatrixXd::Zero(plant.nu(), plant.nd()));
  return ctrl;
}

void RequireCompatible(const Plant& plant, const PreviewController& ctrl) {
  RequireConsistentDimensions(plant);
  std::ostringstream msg;
  if (ctrl.K_x.rows() != plant.nu() || ctrl.K_x.cols() != plant.nx())
    msg << "K_x must be " << plant.nu() << "x" << plant.nx() << " (got " << Shape(ctrl.K_x)
        << "); ";
  if (ctrl.taps.empty()) msg << "controller needs at least one tap (p >= 0); ";
  for (std::size_t j = 0; j < ctrl.taps.size(); ++j)
    if (ctrl.taps[j].rows() != plant.nu() || ctrl.taps[j].cols() != plant.nd())
      msg << "tap " << j << " must be " << plant.nu() << "x" << plant.nd() << "; ";
  for (std::size_t k = 0; k < ctrl.memory.size(); ++k)
    if (ctrl.memory[k].rows() != plant.nu() || ctrl.memory[k].cols() != plant.nd())
      msg << "memory tap " << k + 1 << " must be " << plant.nu() << "x" << plant.nd() << "; ";
  const std::string report = msg.str();
  if (!report.empty()) throw InvalidInput("dimension mismatch: " + report);
}

StateSpace ClosedLoop(const Plant& plant, const PreviewController& ctrl) {
  RequireCompatible(plant, ctrl);
  const int nx = plant.nx(), nd = plant.nd(), nu = plant.nu();
  const int p = ctrl.preview(), m = ctrl.memory_length();
  const int n = nx + (p + m) * nd;
  const int prev0 = nx;
  const int mem0 = nx + p * nd;

  // u = Kz z + Kw w, d(t) = Ez z + Ew w.
  Eigen::MatrixXd Kz = Eigen::MatrixXd::Zero(nu, n);
  Kz.leftCols(nx) = -ctrl.K_x;
  for (int j = 0; j < p; ++j) Kz.middleCols(prev0 + j * nd, nd) = -ctrl.taps[j];
  for (int k = 0; k < m; ++k) Kz.middleCols(mem0 + k * nd, nd) = -ctrl.memory[k];
  const Eigen::MatrixXd Kw = -ctrl.taps[p];
  Eigen::MatrixXd Ez = Eigen::MatrixXd::Zero(nd, n);
  Eigen::MatrixXd Ew = Eigen::MatrixXd::Zero(nd, nd);
  if (p > 0) {
    Ez.middleCols(prev0, nd).setIdentity();
  } else {
    Ew.setIdentity();
  }

  StateSpace sys;
  sys.A = Eigen::MatrixXd::Zero(n, n);
  sys.B = Eigen::MatrixXd::Zero(n, nd);
  Eigen::MatrixXd Sx = Eigen::MatrixXd::Zero(nx, n);
  Sx.leftCols(nx).setIdentity();
  sys.A.topRows(nx) = plant.A * Sx + plant.B_d * Ez + plant.B_u * Kz;
  sys.B.topRows(nx) = plant.B_d * Ew + plant.B_u * Kw;
  for (int j = 0; j + 1 < p; ++j)
    sys.A.block(prev0 + j * nd, prev0 + (j + 1) * nd, nd, nd).setIdentity();
  if (p > 0) sys.B.middleRows(prev0 + (p - 1) * nd, nd).setIdentity();
  if (m > 0) {
    sys.A.middleRows(mem0, nd) = Ez;
    sys.B.middleRows(mem0, nd) = Ew;
    for (int k = 1; k < m; ++k)
      sys.A.block(mem0 + k * nd, mem0 + (k - 1) * nd, nd, nd).setIdentity();
  }

  const Eigen::MatrixXd q_half = SymmetricSqrt(plant.Q);
  const Eigen::MatrixXd r_half = SymmetricSqrt(plant.R);
  sys.C = Eigen::MatrixXd::Zero(nx + nu, n);
  sys.D = Eigen::MatrixXd::Zero(nx + nu, nd);
  sys.C.topRows(nx) = q_half * Sx;
  sys.C.bottomRows(nu) = r_half * Kz;
  sys.D.bottomRows(nu) = r_half * Kw;
  return sys;
}

Eigen::VectorXd ClosedLoopInitialState(const Plant& plant, const PreviewController& ctrl,
                                       const Signal& d) {
  RequireCompatible(plant, ctrl);
  if (d.dim() != plant.nd()) throw InvalidInput("disturbance dimension mismatch");
  const int nx = plant.nx(), nd = plant.nd();
  const int p = ctrl.preview(), m = ctrl.memory_length();
  Eigen::VectorXd z = Eigen::VectorXd::Zero(nx + (p + m) * nd);
  for (int j = 0; j < p; ++j) z.segment(nx + j * nd, nd) = d.At(j);
  return z;
}

double ClosedLoopOutputEnergy(const Plant& plant, const PreviewController& ctrl,
                              const Signal& d, int steps) {
  const StateSpace sys = ClosedLoop(plant, ctrl);
  Eigen::VectorXd z = ClosedLoopInitialState(plant, ctrl, d);
  const int p = ctrl.preview();
  double energy = 0.0;
  for (int t = 0; t < steps; ++t) {
    const Eigen::VectorXd w = d.At(t + p);
    energy += (sys.C * z + sys.D * w).squaredNorm();
    z = sys.A * z + sys.B * w;
  }
  return energy;
}

Trajectory Simulate(const Plant& plant, const PreviewController& ctrl, const Signal& d,
                    double decay_tol) {
  RequireCompatible(plant, ctrl);
  if (d.dim() != plant.nd()) throw InvalidInput("disturbance dimension mismatch");
  const Eigen::MatrixXd A_k = plant.A - plant.B_u * ctrl.K_x;
  const double rho = SpectralRadius(A_k);
  if (!(rho < 1.0)) {
    std::ostringstream msg;
    msg << "closed loop is not Schur (spectral radius " << rho << "); simulation diverges";
    throw DivergingSimulation(msg.str());
  }

  const int support = d.length();
  const int min_steps =
      std::max({support + 50 * plant.nx(), 2 * support, support + ctrl.memory_length() + 1});

  Trajectory traj;
  traj.Q = plant.Q;
  traj.R = plant.R;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(plant.nx());
  traj.states.push_back(x);
  double max_norm = 0.0;
  for (int t = 0;; ++t) {
    if (t >= kMaxSimulationSteps)
      throw DivergingSimulation("simulation did not decay within 10^6 steps");
    if (t >= min_steps && x.norm() <= decay_tol * max_norm) break;
    if (t >= min_steps && max_norm == 0.0) break;
    const Eigen::VectorXd u = ctrl.Control(x, d, t);
    traj.accumulated_cost += x.dot(plant.Q * x) + u.dot(plant.R * u);
    x = plant.A * x + plant.B_d * d.At(t) + plant.B_u * u;
    if (!x.allFinite()) throw DivergingSimulation("simulation produced non-finite state");
    max_norm = std::max(max_norm, x.norm());
    traj.inputs.push_back(u);
    traj.states.push_back(x);
  }
  const Eigen::MatrixXd weight = plant.Q + ctrl.K_x.transpose() * plant.R * ctrl.K_x;
  const Eigen::MatrixXd gramian = SolveStein(A_k, weight);
  traj.truncation_bound = std::max(0.0, x.dot(gramian * x));
  return traj;
}

double Cost(const Trajectory& traj) {
  double total = 0.0;
  for (std::size_t t = 0; t < traj.inputs.size(); ++t) {
    const auto& x = traj.states[t];
    const auto& u = traj.inputs[t];
    total += x.dot(traj.Q * x) + u.dot(traj.R * u);
  }
  return total;
}

std::vector<Eigen::MatrixXcd> FreqResponse(const StateSpace& sys,
                                           const std::vector<double>& omega) {
  const int n = sys.states();
  if (sys.A.cols() != n || sys.B.rows() != n || sys.C.cols() != n ||
      sys.D.rows() != sys.C.rows() || sys.D.cols() != sys.B.cols())
    throw InvalidInput("state-space dimensions are inconsistent");
  Eigen::VectorXcd eigenvalues;
  if (n > 0) eigenvalues = Eigen::EigenSolver<Eigen::MatrixXd>(sys.A, false).eigenvalues();
  const Eigen::MatrixXcd A = sys.A.cast<std::complex<double>>();
  const Eigen::MatrixXcd B = sys.B.cast<std::complex<double>>();
  const Eigen::MatrixXcd C = sys.C.cast<std::complex<double>>();
  const Eigen::MatrixXcd D = sys.D.cast<std::complex<double>>();
  std::vector<Eigen::MatrixXcd> out;
  out.reserve(omega.size());
  for (double w : omega) {
    if (!(w >= 0.0 && w <= std::numbers::pi))
      throw InvalidInput("frequency grid values must lie in [0, pi]");
    if (n == 0) {
      out.push_back(D);
      continue;
    }
    const std::complex<double> z = std::polar(1.0, w);
    if ((eigenvalues.array() - z).abs().minCoeff() <= 1e-12) {
      std::ostringstream msg;
      msg << "resolvent is singular at omega = " << w;
      throw SingularResolvent(msg.str());
    }
    const Eigen::MatrixXcd resolvent = z * Eigen::MatrixXcd::Identity(n, n) - A;
    out.push_back(D + C * resolvent.partialPivLu().solve(B));
  }
  return out;
}

std::vector<double> HalfCircleGrid(int grid_size) {
  if (grid_size < 1) throw InvalidInput("grid size must be positive");
  std::vector<double> grid(grid_size + 1);
  for (int k = 0; k <= grid_size; ++k) grid[k] = std::numbers::pi * k / grid_size;
  grid.back() = std::numbers::pi;
  return grid;
}

}  // namespace previewctl
