#include "previewctl/noncausal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "previewctl/errors.hpp"
#include "previewctl/linalg.hpp"

namespace previewctl {
namespace {

constexpr int kMaxSimulationSteps = 1'000'000;

Eigen::VectorXd FeedforwardAt(const Eigen::MatrixXd& s, int t) {
  if (t < s.cols()) return s.col(t);
  return Eigen::VectorXd::Zero(s.rows());
}

// Stage-cost weight of the autonomous loop x+ = A_tilde x.
Eigen::MatrixXd TailGramian(const Plant& plant, const NoncausalController& ctrl) {
  return SolveStein(ctrl.A_tilde, plant.Q + ctrl.K_x.transpose() * plant.R * ctrl.K_x);
}

Eigen::MatrixXcd SolveResponse(const Plant& plant, const NoncausalController& ctrl,
                               const Eigen::MatrixXd& q_half, const Eigen::MatrixXd& r_half,
                               double w) {
  using cd = std::complex<double>;
  const int nx = plant.nx(), nu = plant.nu(), nd = plant.nd();
  const cd z = std::polar(1.0, w);
  const Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(nx, nx);
  const Eigen::MatrixXcd s = (I - z * ctrl.A_tilde.transpose().cast<cd>())
                                 .partialPivLu()
                                 .solve((ctrl.X * plant.B_d).cast<cd>());
  Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(nx + nu, nx + nu);
  M.topLeftCorner(nx, nx) = z * I - plant.A.cast<cd>();
  M.topRightCorner(nx, nu) = -plant.B_u.cast<cd>();
  M.bottomLeftCorner(nu, nx) = ctrl.K_x.cast<cd>();
  M.bottomRightCorner(nu, nu).setIdentity();
  Eigen::MatrixXcd rhs(nx + nu, nd);
  rhs.topRows(nx) = plant.B_d.cast<cd>();
  rhs.bottomRows(nu) = -ctrl.K_v.cast<cd>() * s;
  Eigen::FullPivLU<Eigen::MatrixXcd> lu(M);
  if (lu.rank() < nx + nu) {
    std::ostringstream msg;
    msg << "non-causal resolvent is singular at omega = " << w;
    throw SingularResolvent(msg.str());
  }
  const Eigen::MatrixXcd xu = lu.solve(rhs);
  Eigen::MatrixXcd T(nx + nu, nd);
  T.topRows(nx) = q_half.cast<cd>() * xu.topRows(nx);
  T.bottomRows(nu) = r_half.cast<cd>() * xu.bottomRows(nu);
  return T;
}

}  // namespace

NoncausalController BuildNoncausal(const Plant& plant) {
  RequireValidPlant(plant);
  NoncausalController ctrl;
  ctrl.dare = SolveDare(plant.A, plant.B_u, plant.Q, plant.R);
  ctrl.X = ctrl.dare.X;
  ctrl.H = Symmetrize(plant.R + plant.B_u.transpose() * ctrl.X * plant.B_u);
  const auto H_llt = ctrl.H.llt();
  ctrl.K_v = H_llt.solve(plant.B_u.transpose());
  ctrl.K_x = ctrl.K_v * ctrl.X * plant.A;
  ctrl.K_d = ctrl.K_v * ctrl.X * plant.B_d;
  ctrl.A_tilde = plant.A - plant.B_u * ctrl.K_x;
  const double rho = SpectralRadius(ctrl.A_tilde);
  if (!(rho < 1.0)) {
    std::ostringstream msg;
    msg << "non-causal closed loop is not Schur (spectral radius " << rho << ")";
    throw NoStabilizingSolution(msg.str());
  }
  return ctrl;
}

Eigen::MatrixXd NoncausalFeedforward(const Plant& plant, const NoncausalController& ctrl,
                                     const Signal& d) {
  if (d.dim() != plant.nd()) throw InvalidInput("disturbance dimension mismatch");
  const int T = d.length();
  const Eigen::MatrixXd XBd = ctrl.X * plant.B_d;
  const Eigen::MatrixXd At_t = ctrl.A_tilde.transpose();
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(plant.nx(), T);
  Eigen::VectorXd next = Eigen::VectorXd::Zero(plant.nx());
  for (int t = T - 1; t >= 0; --t) {
    next = At_t * next + XBd * d.samples().col(t);
    s.col(t) = next;
  }
  return s;
}

Trajectory SimulateNoncausal(const Plant& plant, const NoncausalController& ctrl,
                             const Signal& d, double decay_tol) {
  const Eigen::MatrixXd s = NoncausalFeedforward(plant, ctrl, d);
  const int support = d.length();
  const int min_steps = std::max(support + 50 * plant.nx(), 2 * support);

  Trajectory traj;
  traj.Q = plant.Q;
  traj.R = plant.R;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(plant.nx());
  traj.states.push_back(x);
  double max_norm = 0.0;
  for (int t = 0;; ++t) {
    if (t >= kMaxSimulationSteps)
      throw DivergingSimulation("simulation did not decay within 10^6 steps");
    if (t >= min_steps && (max_norm == 0.0 || x.norm() <= decay_tol * max_norm)) break;
    const Eigen::VectorXd u = -ctrl.K_x * x - ctrl.K_v * FeedforwardAt(s, t);
    traj.accumulated_cost += x.dot(plant.Q * x) + u.dot(plant.R * u);
    x = plant.A * x + plant.B_d * d.At(t) + plant.B_u * u;
    max_norm = std::max(max_norm, x.norm());
    traj.inputs.push_back(u);
    traj.states.push_back(x);
  }
  traj.truncation_bound = std::max(0.0, x.dot(TailGramian(plant, ctrl) * x));
  return traj;
}

double NoncausalCost(const Plant& plant, const NoncausalController& ctrl, const Signal& d) {
  const Eigen::MatrixXd s = NoncausalFeedforward(plant, ctrl, d);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(plant.nx());
  double cost = 0.0;
  for (int t = 0; t < d.length(); ++t) {
    const Eigen::VectorXd u = -ctrl.K_x * x - ctrl.K_v * s.col(t);
    cost += x.dot(plant.Q * x) + u.dot(plant.R * u);
    x = plant.A * x + plant.B_d * d.samples().col(t) + plant.B_u * u;
  }
  // Beyond the support the loop is autonomous: x+ = A_tilde x.
  return cost + std::max(0.0, x.dot(TailGramian(plant, ctrl) * x));
}

NoncausalResponse ComputeNoncausalResponse(const Plant& plant, const NoncausalController& ctrl,
                                           const std::vector<double>& omega) {
  const Eigen::MatrixXd q_half = SymmetricSqrt(plant.Q);
  const Eigen::MatrixXd r_half = SymmetricSqrt(plant.R);
  NoncausalResponse out;
  out.omega = omega;
  out.T_nc.reserve(omega.size());
  out.W.reserve(omega.size());
  for (double w : omega) {
    if (!(w >= 0.0 && w <= std::numbers::pi))
      throw InvalidInput("frequency grid values must lie in [0, pi]");
    Eigen::MatrixXcd T;
    try {
      T = SolveResponse(plant, ctrl, q_half, r_half, w);
    } catch (const SingularResolvent&) {
      T = SolveResponse(plant, ctrl, q_half, r_half, w < 1e-9 ? w + 1e-9 : w - 1e-9);
    }
    Eigen::MatrixXcd W = T.adjoint() * T;
    out.W.push_back(0.5 * (W + W.adjoint()));
    out.T_nc.push_back(std::move(T));
  }
  return out;
}

GammaNc ComputeGammaNc(const Plant& plant, const NoncausalController& ctrl, double tol,
                       int grid_size) {
  if (!(tol > 0.0)) throw InvalidInput("tolerance must be positive");
  const std::vector<double> grid = HalfCircleGrid(grid_size);
  const NoncausalResponse response = ComputeNoncausalResponse(plant, ctrl, grid);
  const int G = grid_size;
  std::vector<double> gain(G + 1);
  for (int k = 0; k <= G; ++k) gain[k] = SpectralNorm(response.T_nc[k]);

  GammaNc result;
  result.grid_size = grid_size;
  result.tol = tol;
  const auto peak = std::max_element(gain.begin(), gain.end());
  result.value = *peak;
  result.omega_peak = grid[peak - gain.begin()];
  if (result.value == 0.0) return result;

  // Local maxima of the grid gain; the sequence is even about 0 and pi.
  std::vector<int> maxima;
  for (int k = 0; k <= G; ++k) {
    const double left = gain[k == 0 ? std::min(1, G) : k - 1];
    const double right = gain[k == G ? std::max(G - 1, 0) : k + 1];
    if (gain[k] >= left && gain[k] >= right) maxima.push_back(k);
  }
  std::sort(maxima.begin(), maxima.end(), [&](int a, int b) { return gain[a] > gain[b]; });
  if (maxima.size() > 3) maxima.resize(3);

  const auto f = [&](double w) {
    return SpectralNorm(ComputeNoncausalResponse(plant, ctrl, {w}).T_nc[0]);
  };
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int k : maxima) {
    double lo = grid[std::max(k - 1, 0)];
    double hi = grid[std::min(k + 1, G)];
    double c = hi - inv_phi * (hi - lo);
    double e = lo + inv_phi * (hi - lo);
    double fc = f(c), fe = f(e);
    while (hi - lo > tol) {
      if (fc >= fe) {
        hi = e;
        e = c;
        fe = fc;
        c = hi - inv_phi * (hi - lo);
        fc = f(c);
      } else {
        lo = c;
        c = e;
        fc = fe;
        e = lo + inv_phi * (hi - lo);
        fe = f(e);
      }
    }
    const double w = 0.5 * (lo + hi);
    const double value = std::max({f(w), fc, fe});
    if (value > result.value) {
      result.value = value;
      result.omega_peak = w;
    }
  }
  return result;
}

GammaNc ComputeGammaNc(const Plant& plant, double tol, int grid_size) {
  return ComputeGammaNc(plant, BuildNoncausal(plant), tol, grid_size);
}

}  // namespace previewctl
