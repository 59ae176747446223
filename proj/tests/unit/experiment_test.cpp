#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include <unistd.h>

#include <gtest/gtest.h>

#include "previewctl/errors.hpp"
#include "previewctl/experiment.hpp"
#include "test_util.hpp"

namespace previewctl {
namespace {

namespace fs = std::filesystem;

constexpr char kReferenceConfig[] = R"({
  "A": [[3, 1], [-1, -2]],
  "B_d": [[1], [1]],
  "B_u": [[3], [-1]],
  "Q": [[3, 0], [0, 3]],
  "R": 1,
  "p_range": [0, 0],
  "grid_size": 1024,
  "seed": 7
})";

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = fs::temp_directory_path() /
            ("previewctl_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

  fs::path Write(const std::string& name, const std::string& text) const {
    std::ofstream(path_ / name) << text;
    return path_ / name;
  }

 private:
  fs::path path_;
};

std::string ReadFile(const fs::path& path) {
  std::ifstream in(path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

TEST(Config, ParsesReferencePlant) {
  const ExperimentConfig c = ParseConfig(kReferenceConfig);
  EXPECT_EQ(c.plant.A, testing::ReferencePlant().A);
  EXPECT_EQ(c.plant.R(0, 0), 1.0);
  EXPECT_EQ(c.p_min, 0);
  EXPECT_EQ(c.p_max, 0);
  EXPECT_EQ(c.bisection_tol, 1e-10);
  EXPECT_EQ(c.grid_size, 1024);
  EXPECT_EQ(c.fir_order, 64);
  EXPECT_EQ(c.oracle_horizon, 400);
  EXPECT_EQ(c.seed, 7u);
}

TEST(Config, RoundTripIsValueIdentical) {
  ExperimentConfig c = ParseConfig(kReferenceConfig);
  c.bisection_tol = 0.1 + 0.2;  // not exactly representable in short decimal
  c.plant.Q(0, 0) = 1.0 / 3.0;
  const ExperimentConfig back = ParseConfig(DumpConfig(c));
  EXPECT_EQ(back.plant.A, c.plant.A);
  EXPECT_EQ(back.plant.B_d, c.plant.B_d);
  EXPECT_EQ(back.plant.B_u, c.plant.B_u);
  EXPECT_EQ(back.plant.Q, c.plant.Q);
  EXPECT_EQ(back.plant.R, c.plant.R);
  EXPECT_EQ(back.bisection_tol, c.bisection_tol);
  EXPECT_EQ(back.p_min, c.p_min);
  EXPECT_EQ(back.p_max, c.p_max);
  EXPECT_EQ(back.grid_size, c.grid_size);
  EXPECT_EQ(back.fir_order, c.fir_order);
  EXPECT_EQ(back.oracle_horizon, c.oracle_horizon);
  EXPECT_EQ(back.output_dir, c.output_dir);
  EXPECT_EQ(back.seed, c.seed);
  EXPECT_EQ(DumpConfig(back), DumpConfig(c));
}

void ExpectInvalid(const std::string& json, const std::string& needle) {
  try {
    ParseConfig(json);
    ADD_FAILURE() << "accepted: " << json;
  } catch (const InvalidInput& e) {
    EXPECT_NE(std::string(e.what()).find(needle), std::string::npos) << e.what();
  }
}

TEST(Config, ValidationNamesTheField) {
  ExpectInvalid(R"({"A": [[1]], "B_d": [[1]], "B_u": [[1]], "Q": [[1]], "p_range": [0, 1]})",
                "'R'");
  ExpectInvalid(R"({"A": 2, "B_d": 1, "B_u": 1, "Q": 1, "R": 1})", "p_range");
  ExpectInvalid(R"({"A": 2, "B_d": 1, "B_u": 1, "Q": 1, "R": 1, "p_range": [3, 1]})",
                "p_range");
  ExpectInvalid(R"({"A": 2, "B_d": 1, "B_u": 1, "Q": 1, "R": 1, "p_range": [0, 1],
                    "bisection_tol": -1})",
                "bisection_tol");
  ExpectInvalid(R"({"A": 2, "B_d": 1, "B_u": 1, "Q": 1, "R": 1, "p_range": [0, 1],
                    "colour": 1})",
                "colour");
  ExpectInvalid(R"({"A": [[1, 2], [3]], "B_d": 1, "B_u": 1, "Q": 1, "R": 1, "p_range": [0, 1]})",
                "'A'");
  ExpectInvalid("not json", "JSON");
}

TEST(Config, PlantViolationsAreReported) {
  ExpectInvalid(R"({"A": 2, "B_d": 1, "B_u": 1, "Q": 1, "R": -1, "p_range": [0, 1]})",
                "assumption");
}

TEST(Commands, MissingConfigIsValidationError) {
  CommandOptions o;
  o.config_path = "/nonexistent/config.json";
  std::ostringstream log, err;
  EXPECT_EQ(CmdGammaNc(o, log, err), kExitValidation);
  EXPECT_FALSE(err.str().empty());
}

TEST(Commands, MissingFieldIsValidationError) {
  TempDir dir;
  CommandOptions o;
  o.config_path = dir.Write("c.json", R"({"A": 2, "B_d": 1, "B_u": 1, "Q": 1, "R": 1})").string();
  o.out_dir = dir.path().string();
  std::ostringstream log, err;
  EXPECT_EQ(CmdBound(o, log, err), kExitValidation);
  EXPECT_NE(err.str().find("p_range"), std::string::npos);
}

TEST(Commands, GammaNcWritesSingleRow) {
  TempDir dir;
  CommandOptions o;
  o.config_path = dir.Write("c.json", kReferenceConfig).string();
  o.out_dir = dir.path().string();
  std::ostringstream log, err;
  ASSERT_EQ(CmdGammaNc(o, log, err), kExitOk) << err.str();
  std::istringstream csv(ReadFile(dir.path() / "gamma_nc.csv"));
  std::string header, row, extra;
  std::getline(csv, header);
  std::getline(csv, row);
  EXPECT_EQ(header, "gamma_nc,tol,grid_size");
  EXPECT_FALSE(std::getline(csv, extra) && !extra.empty());
  EXPECT_NEAR(std::stod(row.substr(0, row.find(','))), 3.1024184114977138, 1e-8);
}

TEST(Commands, GammaNcIsZeroWithoutDisturbanceInput) {
  TempDir dir;
  CommandOptions o;
  o.config_path =
      dir.Write("c.json", R"({"A": 2, "B_d": 0, "B_u": 1, "Q": 1, "R": 1, "p_range": [0, 0]})")
          .string();
  o.out_dir = dir.path().string();
  std::ostringstream log, err;
  ASSERT_EQ(CmdGammaNc(o, log, err), kExitOk) << err.str();
  const std::string csv = ReadFile(dir.path() / "gamma_nc.csv");
  EXPECT_EQ(csv.substr(csv.find('\n') + 1, 2), "0,");
}

TEST(Commands, BoundColumnsAndRatio) {
  TempDir dir;
  std::string cfg = kReferenceConfig;
  cfg.replace(cfg.find("[0, 0]"), 6, "[5, 9]");
  CommandOptions o;
  o.config_path = dir.Write("c.json", cfg).string();
  o.out_dir = dir.path().string();
  std::ostringstream log, err;
  ASSERT_EQ(CmdBound(o, log, err), kExitOk) << err.str();
  std::istringstream csv(ReadFile(dir.path() / "bound.csv"));
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line, "p,a,b,c,alpha,T_cut,bound");
  std::vector<std::vector<std::string>> rows;
  while (std::getline(csv, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    ASSERT_EQ(cells.size(), 7u);
    rows.push_back(cells);
  }
  ASSERT_EQ(rows.size(), 5u);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    for (int col = 1; col <= 5; ++col) EXPECT_EQ(rows[i][col], rows[0][col]);
    const double alpha = std::stod(rows[i][4]);
    EXPECT_NEAR(std::stod(rows[i][6]) / std::stod(rows[i - 1][6]), alpha, 1e-12);
  }
}

TEST(Commands, SimulateZeroDisturbanceHasZeroCost) {
  TempDir dir;
  CommandOptions o;
  o.config_path = dir.Write("c.json", kReferenceConfig).string();
  o.out_dir = dir.path().string();
  o.d_path = dir.Write("d.csv", "t,d_1\n0,0\n1,0\n2,0\n").string();
  o.controller = "h2";
  o.p = 3;
  std::ostringstream log, err;
  ASSERT_EQ(CmdSimulate(o, log, err), kExitOk) << err.str();
  const std::string csv = ReadFile(dir.path() / "trajectory.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "t,x_1,x_2,u_1,running_cost,regret");
  EXPECT_NE(csv.find("total,,,,0,0"), std::string::npos) << csv;
}

TEST(Commands, SimulateValidatesArguments) {
  TempDir dir;
  CommandOptions o;
  o.config_path = dir.Write("c.json", kReferenceConfig).string();
  o.out_dir = dir.path().string();
  o.d_path = dir.Write("d.csv", "t,d_1\n0,1\n").string();
  std::ostringstream log, err;
  o.controller = "pid";
  o.p = 1;
  EXPECT_EQ(CmdSimulate(o, log, err), kExitValidation);
  o.controller = "h2";
  o.p.reset();
  EXPECT_EQ(CmdSimulate(o, log, err), kExitValidation);
  o.p = 1;
  o.d_path = dir.Write("bad.csv", "time,x\n0,1\n").string();
  EXPECT_EQ(CmdSimulate(o, log, err), kExitValidation);
}

TEST(Commands, SimulateNoncausalMatchesQuadraticForm) {
  const ExperimentConfig c = ParseConfig(kReferenceConfig);
  const Signal d = Signal::Impulse(1, 1, 0);
  const SimulationReport r = RunSimulation(c, ControllerChoice::kNoncausal, 0, d);
  EXPECT_FALSE(r.regret.has_value());
  const NoncausalController nc = BuildNoncausal(c.plant);
  EXPECT_NEAR(r.total_cost, NoncausalCost(c.plant, nc, d), 1e-6);
}

TEST(Commands, SimulateH2GapWithinBound) {
  const ExperimentConfig c = ParseConfig(kReferenceConfig);
  const GapBound g = H2GapBound(c.plant);
  std::mt19937_64 rng(61);
  const Signal d = testing::RandomSignal(rng, 1, 20);
  const SimulationReport r = RunSimulation(c, ControllerChoice::kH2, 8, d);
  ASSERT_TRUE(r.regret.has_value());
  EXPECT_GE(*r.regret, -1e-9);
  if (g.ValidFor(8)) {
    EXPECT_LE(*r.regret, g.Bound(8) * d.SquaredNorm());
  }
}

TEST(Sweep, SingleRowMatchesFullInformationAndIsDeterministic) {
  const ExperimentConfig c = ParseConfig(kReferenceConfig);
  const ExperimentContext ctx = PrepareExperiment(c);
  const SweepResult a = RunSweep(ctx);
  ASSERT_EQ(a.rows.size(), 1u);
  ASSERT_TRUE(a.ok());
  const SweepRow& row = a.rows[0];
  EXPECT_TRUE(CheckSweepRow(row, c.bisection_tol).empty());
  const SynthesisResult fi = HinfPreviewBisect(c.plant, 0, c.bisection_tol, ctx.gamma_nc.value);
  EXPECT_EQ(row.gamma_inf_p, fi.gamma);
  EXPECT_EQ(row.gamma_nc, ctx.gamma_nc.value);

  const SweepResult b = RunSweep(ctx);
  std::ostringstream csv_a, csv_b;
  WriteSweepCsv(csv_a, a);
  WriteSweepCsv(csv_b, b);
  EXPECT_EQ(csv_a.str(), csv_b.str());
  EXPECT_EQ(csv_a.str().substr(0, csv_a.str().find('\n')),
            "p,gamma_inf_p,gamma_2_p,gamma_R_p,gamma_nc,oracle_regret,bound_h2");
  // p = 0 is below T_cut for the reference plant.
  EXPECT_NE(csv_a.str().find("n/a"), std::string::npos);
}

TEST(Sweep, RowChecksFlagViolations) {
  SweepRow row;
  row.gamma_nc = 3.0;
  row.gamma_inf_p = 2.0;
  row.gamma_2_p = 4.0;
  row.gamma_R_p = 0.0;
  EXPECT_FALSE(CheckSweepRow(row, 1e-10).empty());
}

}  // namespace
}  // namespace previewctl
