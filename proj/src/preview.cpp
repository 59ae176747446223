#include "previewctl/preview.hpp"

#include <cmath>
#include <sstream>

#include "previewctl/errors.hpp"
#include "previewctl/linalg.hpp"

namespace previewctl {
namespace {

constexpr int kMaxDoublings = 60;
// Relative step below a feasible lower bracket used to tell rounding-level
// feasibility from a wrong bracket.
constexpr double kBracketProbe = 1e-6;

SynthesisResult Synthesize(const Plant& plant, const AugmentedPlant& aug, Feasibility feas,
                           double gamma) {
  const int nx = aug.nx, nd = aug.nd, p = aug.p;
  const Eigen::MatrixXd& X = feas.solution->X;
  SynthesisResult result;
  result.gamma = gamma;
  result.X_hat_blocks.push_back(X.topLeftCorner(nx, nx));
  for (int j = 1; j <= p; ++j) result.X_hat_blocks.push_back(X.block(0, nx + (j - 1) * nd, nx, nd));
  const Eigen::MatrixXd H = aug.R + aug.B_u_hat.transpose() * X * aug.B_u_hat;
  const auto H_llt = H.llt();
  const Eigen::MatrixXd BtX = aug.B_u_hat.transpose() * X;
  result.K_hat_x = H_llt.solve(BtX * aug.A_hat);
  result.K_hat_d = H_llt.solve(BtX * aug.B_d_hat);
  result.feasibility = std::move(feas);
  result.controller = ToTapForm(result, plant);
  return result;
}

void ProbeAbove(const AugmentedPlant& aug, SynthesisResult& result) {
  for (double factor : {1.0 + 1e-6, 1.01, 2.0}) {
    const double g = result.gamma * factor;
    if (!HinfFeasibility(aug.A_hat, aug.B_u_hat, aug.B_d_hat, aug.Q_hat, aug.R, g).feasible) {
      std::ostringstream msg;
      msg << "feasibility is not monotone: infeasible at gamma = " << g << " above the bracket";
      result.diagnostics.push_back(msg.str());
    }
  }
}

}  // namespace

AugmentedPlant Augment(const Plant& plant, int p) {
  if (p < 0) throw InvalidInput("preview length must be nonnegative");
  RequireConsistentDimensions(plant);
  const int nx = plant.nx(), nd = plant.nd(), nu = plant.nu();
  const int n = nx + p * nd;
  AugmentedPlant aug;
  aug.p = p;
  aug.nx = nx;
  aug.nd = nd;
  aug.R = plant.R;
  aug.A_hat = Eigen::MatrixXd::Zero(n, n);
  aug.B_u_hat = Eigen::MatrixXd::Zero(n, nu);
  aug.B_d_hat = Eigen::MatrixXd::Zero(n, nd);
  aug.Q_hat = Eigen::MatrixXd::Zero(n, n);
  aug.A_hat.topLeftCorner(nx, nx) = plant.A;
  aug.B_u_hat.topRows(nx) = plant.B_u;
  aug.Q_hat.topLeftCorner(nx, nx) = plant.Q;
  if (p == 0) {
    aug.B_d_hat = plant.B_d;
    return aug;
  }
  aug.A_hat.block(0, nx, nx, nd) = plant.B_d;
  for (int j = 0; j + 1 < p; ++j)
    aug.A_hat.block(nx + j * nd, nx + (j + 1) * nd, nd, nd).setIdentity();
  aug.B_d_hat.bottomRows(nd).setIdentity();
  return aug;
}

PreviewFeasibility HinfPreviewFeasible(const Plant& plant, const AugmentedPlant& aug,
                                       double gamma) {
  PreviewFeasibility out;
  out.feasibility =
      HinfFeasibility(aug.A_hat, aug.B_u_hat, aug.B_d_hat, aug.Q_hat, aug.R, gamma);
  if (!out.feasibility.feasible) return out;
  SynthesisResult result = Synthesize(plant, aug, out.feasibility, gamma);
  // A posteriori certificate: the central controller must reach the level.
  // This rejects spurious Riccati passes just below the optimal level.
  if (!BoundedRealFeasible(ClosedLoop(plant, result.controller), gamma)) {
    out.feasibility.feasible = false;
    out.feasibility.reason = "central controller does not achieve the level";
    return out;
  }
  out.synthesis = std::move(result);
  return out;
}

PreviewController ToTapForm(const SynthesisResult& result, const Plant& plant) {
  if (result.X_hat_blocks.empty()) throw InvalidInput("synthesis result has no Riccati blocks");
  const Eigen::MatrixXd& X0 = result.X_hat_blocks[0];
  const Eigen::MatrixXd H = plant.R + plant.B_u.transpose() * X0 * plant.B_u;
  const Eigen::MatrixXd K_v = H.llt().solve(plant.B_u.transpose());
  PreviewController ctrl;
  ctrl.K_x = K_v * X0 * plant.A;
  ctrl.taps.push_back(K_v * X0 * plant.B_d);
  for (std::size_t j = 1; j < result.X_hat_blocks.size(); ++j)
    ctrl.taps.push_back(K_v * result.X_hat_blocks[j]);
  return ctrl;
}

SynthesisResult HinfPreviewBisectRaw(const Plant& plant, int p, double gamma_lo, double tol) {
  if (!(tol > 0.0)) throw InvalidInput("bisection tolerance must be positive");
  const AugmentedPlant aug = Augment(plant, p);
  std::vector<std::string> notes;

  if (plant.B_d.norm() == 0.0) {
    // Disturbance decoupled: every level is achievable.
    auto feas = HinfPreviewFeasible(plant, aug, 1.0);
    if (!feas.synthesis) throw SynthesisFailure("decoupled plant failed the H-infinity test");
    SynthesisResult result = std::move(*feas.synthesis);
    result.gamma = 0.0;
    result.gamma_lo = 0.0;
    return result;
  }

  double lo = std::max(gamma_lo, 0.0);
  if (lo > 0.0) {
    PreviewFeasibility at_lo = HinfPreviewFeasible(plant, aug, lo);
    if (at_lo.synthesis) {
      if (!HinfPreviewFeasible(plant, aug, lo * (1.0 - kBracketProbe)).feasibility.feasible) {
        // The optimum sits on the lower bracket within numerical precision.
        SynthesisResult result = std::move(*at_lo.synthesis);
        result.gamma = lo;
        result.gamma_lo = lo;
        result.diagnostics.push_back("lower bracket is feasible within numerical precision");
        ProbeAbove(aug, result);
        return result;
      }
      std::ostringstream msg;
      msg << "lower bracket " << lo << " is feasible; restarting from 0";
      notes.push_back(msg.str());
      lo = 0.0;
    }
  }
  double hi = lo > 0.0 ? 2.0 * lo : 1.0;
  PreviewFeasibility best = HinfPreviewFeasible(plant, aug, hi);
  for (int k = 0; !best.synthesis; ++k) {
    if (k >= kMaxDoublings) {
      std::ostringstream msg;
      msg << "no feasible H-infinity level found up to " << hi << " (p = " << p << ")";
      throw SynthesisFailure(msg.str());
    }
    lo = hi;
    hi *= 2.0;
    best = HinfPreviewFeasible(plant, aug, hi);
  }
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    PreviewFeasibility trial = HinfPreviewFeasible(plant, aug, mid);
    if (trial.synthesis) {
      hi = mid;
      best = std::move(trial);
    } else {
      lo = mid;
    }
  }
  SynthesisResult result = std::move(*best.synthesis);
  result.gamma = hi;
  result.gamma_lo = lo;
  result.diagnostics = std::move(notes);
  ProbeAbove(aug, result);
  return result;
}

SynthesisResult HinfPreviewBisect(const Plant& plant, int p, double tol,
                                  std::optional<double> gamma_nc) {
  RequireValidPlant(plant);
  const double lo = gamma_nc ? *gamma_nc : ComputeGammaNc(plant).value;
  return HinfPreviewBisectRaw(plant, p, lo, tol);
}

PreviewController H2Preview(const Plant& plant, const NoncausalController& nc, int p) {
  if (p < 0) throw InvalidInput("preview length must be nonnegative");
  PreviewController ctrl;
  ctrl.K_x = nc.K_x;
  Eigen::MatrixXd v = nc.X * plant.B_d;
  const Eigen::MatrixXd At_t = nc.A_tilde.transpose();
  for (int j = 0; j <= p; ++j) {
    ctrl.taps.push_back(nc.K_v * v);
    v = At_t * v;
  }
  return ctrl;
}

PreviewController H2Preview(const Plant& plant, int p) {
  return H2Preview(plant, BuildNoncausal(plant), p);
}

}  // namespace previewctl
