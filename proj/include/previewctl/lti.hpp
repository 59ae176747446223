#pragma once

// Problem data, disturbance signals, preview controllers, closed-loop
// construction, simulation and quadratic cost evaluation.

#include <complex>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace previewctl {

/// Plant x(t+1) = A x(t) + B_d d(t) + B_u u(t) with stage cost
/// x'Qx + u'Ru. The struct itself is unchecked; operations that rely on the
/// standing assumptions call RequireValidPlant().
struct Plant {
  Eigen::MatrixXd A;
  Eigen::MatrixXd B_d;
  Eigen::MatrixXd B_u;
  Eigen::MatrixXd Q;
  Eigen::MatrixXd R;

  int nx() const { return static_cast<int>(A.rows()); }
  int nd() const { return static_cast<int>(B_d.cols()); }
  int nu() const { return static_cast<int>(B_u.cols()); }
};

/// Human-readable list of violated plant assumptions; empty when the plant
/// is admissible (consistent dimensions, Q >= 0, R > 0, A nonsingular,
/// (A, B_u) stabilizable, no unobservable unit-circle modes of (A, Q)).
std::vector<std::string> ValidatePlant(const Plant& plant);

/// Throws InvalidInput carrying the ValidatePlant() report.
void RequireValidPlant(const Plant& plant);

/// Throws InvalidInput when the matrix dimensions are inconsistent.
void RequireConsistentDimensions(const Plant& plant);

/// Finite-support disturbance. Samples are stored column-wise (one column per
/// time step); every index outside [0, length) reads as zero.
class Signal {
 public:
  Signal() = default;
  Signal(int dim, int length);
  explicit Signal(Eigen::MatrixXd samples);

  static Signal Impulse(int dim, int length, int time, int channel = 0);

  int dim() const { return static_cast<int>(samples_.rows()); }
  int length() const { return static_cast<int>(samples_.cols()); }
  const Eigen::MatrixXd& samples() const { return samples_; }

  Eigen::VectorXd At(int t) const;
  double SquaredNorm() const { return samples_.squaredNorm(); }

  /// Signal delayed by k >= 0 steps (k leading zero samples).
  Signal Delayed(int k) const;
  Signal Scaled(double alpha) const;

 private:
  Eigen::MatrixXd samples_;
};

Signal ReadSignalCsv(std::istream& in);
Signal ReadSignalCsv(const std::string& path);
void WriteSignalCsv(std::ostream& out, const Signal& d);

/// u(t) = -K_x x(t) - sum_{j=0}^{p} taps[j] d(t+j)
///                  - sum_{k=1}^{m} memory[k-1] d(t-k).
/// H-infinity and H2 preview controllers have no memory taps; regret-optimal
/// controllers use them to carry the disturbance-filter state.
struct PreviewController {
  Eigen::MatrixXd K_x;
  std::vector<Eigen::MatrixXd> taps;
  std::vector<Eigen::MatrixXd> memory;

  int preview() const { return static_cast<int>(taps.size()) - 1; }
  int memory_length() const { return static_cast<int>(memory.size()); }

  Eigen::VectorXd Control(const Eigen::VectorXd& x, const Signal& d,
                          int t) const;
};

/// The zero controller with p-step preview (all gains zero).
PreviewController ZeroController(const Plant& plant, int p);

/// Throws InvalidInput on dimension mismatch or an empty tap list.
void RequireCompatible(const Plant& plant, const PreviewController& ctrl);

struct StateSpace {
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
  Eigen::MatrixXd C;
  Eigen::MatrixXd D;

  int states() const { return static_cast<int>(A.rows()); }
};

/// Closed loop of plant and controller as a causal system driven by
/// w(t) = d(t+p). State is [x; d(t); ...; d(t+p-1); d(t-1); ...; d(t-m)] and
/// the output is [Q^{1/2} x; R^{1/2} u].
StateSpace ClosedLoop(const Plant& plant, const PreviewController& ctrl);

/// Initial closed-loop state matching x(0) = 0 with d(0..p-1) already in
/// the preview buffer.
Eigen::VectorXd ClosedLoopInitialState(const Plant& plant,
                                       const PreviewController& ctrl,
                                       const Signal& d);

/// Squared output norm of ClosedLoop() over `steps` steps, started from
/// ClosedLoopInitialState() and driven by w(t) = d(t+p).
double ClosedLoopOutputEnergy(const Plant& plant, const PreviewController& ctrl,
                              const Signal& d, int steps);

struct Trajectory {
  std::vector<Eigen::VectorXd> states;  // x(0..T)
  std::vector<Eigen::VectorXd> inputs;  // u(0..T-1)
  Eigen::MatrixXd Q;
  Eigen::MatrixXd R;
  double accumulated_cost = 0.0;
  /// Exact cost of the discarded tail x(T)' P x(T) (P: closed-loop
  /// observability Gramian with d = 0 after the support).
  double truncation_bound = 0.0;

  int steps() const { return static_cast<int>(inputs.size()); }
};

/// Simulates from x(0) = 0. The horizon is max(support + 50 nx, 2 support),
/// extended until |x(t)| <= decay_tol * max_t |x(t)|.
Trajectory Simulate(const Plant& plant, const PreviewController& ctrl,
                    const Signal& d, double decay_tol = 1e-13);

/// sum_t x(t)'Q x(t) + u(t)'R u(t) over the simulated horizon.
double Cost(const Trajectory& traj);

/// D + C (e^{iw} I - A)^{-1} B at each grid point in [0, pi].
std::vector<Eigen::MatrixXcd> FreqResponse(const StateSpace& sys,
                                           const std::vector<double>& omega);

/// Uniform grid omega_k = pi k / grid_size, k = 0..grid_size.
std::vector<double> HalfCircleGrid(int grid_size);

}  // namespace previewctl
