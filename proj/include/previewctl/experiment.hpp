#pragma once
// Batch experiment driver: JSON configuration, preview-length sweeps,
// single-shot simulation and bound tables, CSV and SVG emission.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "previewctl/gap_bound.hpp"
#include "previewctl/lti.hpp"
#include "previewctl/noncausal.hpp"
#include "previewctl/preview.hpp"
#include "previewctl/regret.hpp"

namespace previewctl {

struct ExperimentConfig {
  Plant plant;
  int p_min = 0;
  int p_max = 0;
  double bisection_tol = 1e-10;
  int grid_size = 4096;
  int fir_order = 64;
  int oracle_horizon = 400;
  std::string output_dir = ".";
  std::uint64_t seed = 0;
};

/// Parses a JSON document. Matrices are row-major nested arrays; a bare
/// number is accepted for 1 x 1 matrices. Throws InvalidInput naming the
/// offending field, or listing every plant invariant violation.
ExperimentConfig ParseConfig(const std::string& json_text);
ExperimentConfig LoadConfig(const std::string& path);
/// Emits a JSON document that ParseConfig maps back to identical values.
std::string DumpConfig(const ExperimentConfig& config);

struct SweepRow {
  int p = 0;
  double gamma_inf_p = 0.0;
  /// H-infinity norm of the closed loop under the H2 preview controller.
  double gamma_2_p = 0.0;
  double gamma_R_p = 0.0;
  double gamma_nc = 0.0;
  /// Finite-horizon squared regret of the regret-optimal controller.
  double oracle_regret = 0.0;
  /// Gap bound for the H2 controller; empty when p < T_cut.
  std::optional<double> bound_h2;

  bool failed = false;
  std::vector<std::string> diagnostics;

  // Artifacts kept for downstream checks; not written to CSV.
  std::optional<SynthesisResult> hinf;
  std::optional<PreviewController> h2;
  std::optional<RegretSynthesis> regret;
};

/// Shared per-plant data reused across sweep points.
struct ExperimentContext {
  ExperimentConfig config;
  NoncausalController nc;
  NoncausalResponse response;
  GammaNc gamma_nc;
  std::optional<GapBound> bound;
  std::string bound_error;
};

ExperimentContext PrepareExperiment(const ExperimentConfig& config);

/// Synthesizes all controllers for one preview length. Synthesis errors
/// mark the row failed instead of throwing.
SweepRow ComputeSweepRow(const ExperimentContext& ctx, int p);

/// Row invariants: gamma_nc <= gamma_inf_p <= gamma_2_p and
/// gamma_R_p >= gamma_inf_p - gamma_nc, each within 2 tol.
std::vector<std::string> CheckSweepRow(const SweepRow& row, double tol);

/// Baseline optimality on seeded random disturbances: the non-causal cost
/// never exceeds the cost of any synthesized controller.
std::vector<std::string> CheckBaseline(const ExperimentContext& ctx, const SweepRow& row,
                                       std::uint64_t seed, int samples = 5, int length = 20);

struct SweepResult {
  std::vector<SweepRow> rows;
  bool ok() const;
};

SweepResult RunSweep(const ExperimentContext& ctx, std::ostream* log = nullptr);

void WriteSweepCsv(std::ostream& out, const SweepResult& result);
void WriteFig1Csv(std::ostream& out, const SweepResult& result);
void WriteFig2Csv(std::ostream& out, const SweepResult& result);
/// Self-contained SVG line charts; fig2 uses a log-scale y axis.
void WriteFig1Svg(std::ostream& out, const SweepResult& result);
void WriteFig2Svg(std::ostream& out, const SweepResult& result);

void WriteGammaNcCsv(std::ostream& out, const GammaNc& gamma_nc);
void WriteBoundCsv(std::ostream& out, const GapBound& bound, int p_min, int p_max);

enum class ControllerChoice { kHinf, kH2, kRegret, kNoncausal };
ControllerChoice ParseControllerChoice(const std::string& name);

struct SimulationReport {
  Trajectory trajectory;
  double total_cost = 0.0;
  /// J(K, d) - J(K_nc, d); empty for the non-causal controller.
  std::optional<double> regret;
};

SimulationReport RunSimulation(const ExperimentConfig& config, ControllerChoice choice, int p,
                               const Signal& d);
void WriteTrajectoryCsv(std::ostream& out, const Plant& plant, const SimulationReport& report);

/// Exit codes of the command entry points.
inline constexpr int kExitOk = 0;
inline constexpr int kExitPartialFailure = 1;
inline constexpr int kExitValidation = 2;

struct CommandOptions {
  std::string config_path;
  std::optional<std::string> out_dir;
  std::optional<int> p;
  std::string controller = "hinf";
  std::optional<std::string> d_path;
  std::optional<std::uint64_t> seed;
  bool svg = false;
};

/// Command entry points. Each writes its files under the output directory,
/// reports to `log`/`err`, and returns one of the exit codes above.
int CmdGammaNc(const CommandOptions& options, std::ostream& log, std::ostream& err);
int CmdSweep(const CommandOptions& options, std::ostream& log, std::ostream& err);
int CmdSimulate(const CommandOptions& options, std::ostream& log, std::ostream& err);
int CmdBound(const CommandOptions& options, std::ostream& log, std::ostream& err);

}  // namespace previewctl
