#include "previewctl/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>
#include "previewctl/errors.hpp"
#include "previewctl/linalg.hpp"

namespace previewctl {
namespace {

using nlohmann::json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kBaselineSlack = 1e-8;

const std::set<std::string> kKnownKeys = {
    "A", "B_d", "B_u", "Q", "R", "p_range", "bisection_tol", "grid_size", "fir_order",
    "oracle_horizon", "output_dir", "seed"};

Eigen::MatrixXd ParseMatrix(const json& doc, const std::string& key) {
  if (!doc.contains(key)) throw InvalidInput("config is missing required field '" + key + "'");
  const json& v = doc.at(key);
  if (v.is_number()) return Eigen::MatrixXd::Constant(1, 1, v.get<double>());
  if (!v.is_array() || v.empty())
    throw InvalidInput("config field '" + key + "' must be a nonempty array of rows");
  const auto rows = static_cast<Eigen::Index>(v.size());
  Eigen::Index cols = -1;
  Eigen::MatrixXd M;
  for (Eigen::Index i = 0; i < rows; ++i) {
    const json& row = v[static_cast<std::size_t>(i)];
    if (!row.is_array() || row.empty())
      throw InvalidInput("config field '" + key + "' row " + std::to_string(i) +
                         " must be a nonempty array of numbers");
    if (cols < 0) {
      cols = static_cast<Eigen::Index>(row.size());
      M.resize(rows, cols);
    } else if (static_cast<Eigen::Index>(row.size()) != cols) {
      throw InvalidInput("config field '" + key + "' has rows of unequal length");
    }
    for (Eigen::Index j = 0; j < cols; ++j) {
      const json& x = row[static_cast<std::size_t>(j)];
      if (!x.is_number())
        throw InvalidInput("config field '" + key + "' entry (" + std::to_string(i) + ", " +
                           std::to_string(j) + ") is not a number");
      M(i, j) = x.get<double>();
    }
  }
  return M;
}

json MatrixToJson(const Eigen::MatrixXd& M) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

int ParseInt(const json& doc, const std::string& key, int fallback, int min_value) {
  if (!doc.contains(key)) return fallback;
  const json& v = doc.at(key);
  if (!v.is_number_integer()) throw InvalidInput("config field '" + key + "' must be an integer");
  const auto value = v.get<long long>();
  if (value < min_value || value > std::numeric_limits<int>::max())
    throw InvalidInput("config field '" + key + "' must be at least " + std::to_string(min_value));
  return static_cast<int>(value);
}

std::string Num(double v) {
  if (std::isnan(v)) return "failed";
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

void WriteFile(const std::filesystem::path& path, const std::function<void(std::ostream&)>& fn) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  fn(out);
  if (!out) throw Error("failed writing " + path.string());
}

RegretOptions MakeRegretOptions(const ExperimentConfig& config) {
  RegretOptions opts;
  opts.tol = config.bisection_tol;
  opts.grid_size = config.grid_size;
  opts.factorization.order = config.fir_order;
  opts.factorization.max_order = std::max(opts.factorization.max_order, config.fir_order);
  return opts;
}

double TotalCost(const Trajectory& traj) { return Cost(traj) + traj.truncation_bound; }

template <class Body>
int Guard(std::ostream& err, Body&& body) {
  try {
    return body();
  } catch (const InvalidInput& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitPartialFailure;
  }
}

ExperimentConfig LoadWithOverrides(const CommandOptions& options) {
  if (options.config_path.empty()) throw InvalidInput("--config is required");
  ExperimentConfig config = LoadConfig(options.config_path);
  if (options.out_dir) config.output_dir = *options.out_dir;
  if (options.seed) config.seed = *options.seed;
  std::filesystem::create_directories(config.output_dir);
  return config;
}

// Minimal line chart; points with non-finite coordinates are skipped.
struct Series {
  std::string name;
  std::string color;
  std::vector<std::pair<double, double>> points;
};

void WriteSvgChart(std::ostream& out, const std::string& title, const std::string& y_label,
                   std::vector<Series> series, bool log_y) {
  const double W = 640, H = 400, left = 70, right = 20, top = 40, bottom = 50;
  double x_min = std::numeric_limits<double>::infinity(), x_max = -x_min;
  double y_min = x_min, y_max = -x_min;
  for (auto& s : series) {
    std::vector<std::pair<double, double>> kept;
    for (auto [x, y] : s.points) {
      if (log_y) y = y > 0.0 ? std::log10(y) : kNaN;
      if (!std::isfinite(x) || !std::isfinite(y)) continue;
      kept.emplace_back(x, y);
      x_min = std::min(x_min, x);
      x_max = std::max(x_max, x);
      y_min = std::min(y_min, y);
      y_max = std::max(y_max, y);
    }
    s.points = std::move(kept);
  }
  if (!std::isfinite(x_min)) x_min = 0, x_max = 1, y_min = 0, y_max = 1;
  if (x_max == x_min) x_max = x_min + 1;
  if (y_max == y_min) y_max = y_min + 1;
  const auto sx = [&](double x) { return left + (x - x_min) / (x_max - x_min) * (W - left - right); };
  const auto sy = [&](double y) { return H - bottom - (y - y_min) / (y_max - y_min) * (H - top - bottom); };
  const auto label = [&](double y) { return log_y ? "1e" + Num(std::round(y * 100) / 100) : Num(y); };

  out << std::setprecision(6);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << W / 2 << "\" y=\"20\" text-anchor=\"middle\">" << title << "</text>\n";
  out << "<line x1=\"" << left << "\" y1=\"" << H - bottom << "\" x2=\"" << W - right
      << "\" y2=\"" << H - bottom << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\""
      << H - bottom << "\" stroke=\"black\"/>\n";
  out << "<text x=\"" << W / 2 << "\" y=\"" << H - 10 << "\" text-anchor=\"middle\">p</text>\n";
  out << "<text x=\"15\" y=\"" << H / 2 << "\" transform=\"rotate(-90 15 " << H / 2
      << ")\" text-anchor=\"middle\">" << y_label << "</text>\n";
  for (double y : {y_min, y_max}) {
    out << "<text x=\"" << left - 5 << "\" y=\"" << sy(y) + 4 << "\" text-anchor=\"end\">"
        << label(y) << "</text>\n";
  }
  for (double x : {x_min, x_max}) {
    out << "<text x=\"" << sx(x) << "\" y=\"" << H - bottom + 16 << "\" text-anchor=\"middle\">"
        << Num(x) << "</text>\n";
  }
  double legend_y = top + 10;
  for (const auto& s : series) {
    out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"2\" points=\"";
    for (const auto& [x, y] : s.points) out << sx(x) << "," << sy(y) << " ";
    out << "\"/>\n";
    for (const auto& [x, y] : s.points) {
      out << "<circle cx=\"" << sx(x) << "\" cy=\"" << sy(y) << "\" r=\"3\" fill=\"" << s.color
          << "\"/>\n";
    }
    out << "<text x=\"" << W - right - 150 << "\" y=\"" << legend_y << "\" fill=\"" << s.color
        << "\">" << s.name << "</text>\n";
    legend_y += 16;
  }
  out << "</svg>\n";
}

}  // namespace

ExperimentConfig ParseConfig(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw InvalidInput(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw InvalidInput("config must be a JSON object");
  for (const auto& item : doc.items()) {
    if (!kKnownKeys.count(item.key()))
      throw InvalidInput("config has unknown field '" + item.key() + "'");
  }

  ExperimentConfig c;
  c.plant.A = ParseMatrix(doc, "A");
  c.plant.B_d = ParseMatrix(doc, "B_d");
  c.plant.B_u = ParseMatrix(doc, "B_u");
  c.plant.Q = ParseMatrix(doc, "Q");
  c.plant.R = ParseMatrix(doc, "R");

  if (!doc.contains("p_range")) throw InvalidInput("config is missing required field 'p_range'");
  const json& range = doc.at("p_range");
  if (!range.is_array() || range.size() != 2 || !range[0].is_number_integer() ||
      !range[1].is_number_integer())
    throw InvalidInput("config field 'p_range' must be [p_min, p_max] with integer bounds");
  const auto lo = range[0].get<long long>(), hi = range[1].get<long long>();
  if (lo < 0 || hi < lo || hi > 100000)
    throw InvalidInput("config field 'p_range' must satisfy 0 <= p_min <= p_max");
  c.p_min = static_cast<int>(lo);
  c.p_max = static_cast<int>(hi);

  if (doc.contains("bisection_tol")) {
    const json& v = doc.at("bisection_tol");
    if (!v.is_number() || !(v.get<double>() > 0.0))
      throw InvalidInput("config field 'bisection_tol' must be a positive number");
    c.bisection_tol = v.get<double>();
  }
  c.grid_size = ParseInt(doc, "grid_size", c.grid_size, 8);
  c.fir_order = ParseInt(doc, "fir_order", c.fir_order, 1);
  c.oracle_horizon = ParseInt(doc, "oracle_horizon", c.oracle_horizon, 1);
  if (doc.contains("output_dir")) {
    if (!doc.at("output_dir").is_string())
      throw InvalidInput("config field 'output_dir' must be a string");
    c.output_dir = doc.at("output_dir").get<std::string>();
  }
  if (doc.contains("seed")) {
    const json& v = doc.at("seed");
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
      throw InvalidInput("config field 'seed' must be a nonnegative integer");
    c.seed = v.get<std::uint64_t>();
  }

  const auto violations = ValidatePlant(c.plant);
  if (!violations.empty()) {
    std::ostringstream msg;
    msg << "plant violates " << violations.size() << " assumption(s):";
    for (const auto& v : violations) msg << "\n  - " << v;
    throw InvalidInput(msg.str());
  }
  return c;
}

ExperimentConfig LoadConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open config file " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return ParseConfig(buffer.str());
}

std::string DumpConfig(const ExperimentConfig& c) {
  json doc;
  doc["A"] = MatrixToJson(c.plant.A);
  doc["B_d"] = MatrixToJson(c.plant.B_d);
  doc["B_u"] = MatrixToJson(c.plant.B_u);
  doc["Q"] = MatrixToJson(c.plant.Q);
  doc["R"] = MatrixToJson(c.plant.R);
  doc["p_range"] = {c.p_min, c.p_max};
  doc["bisection_tol"] = c.bisection_tol;
  doc["grid_size"] = c.grid_size;
  doc["fir_order"] = c.fir_order;
  doc["oracle_horizon"] = c.oracle_horizon;
  doc["output_dir"] = c.output_dir;
  doc["seed"] = c.seed;
  return doc.dump(2) + "\n";
}

ExperimentContext PrepareExperiment(const ExperimentConfig& config) {
  RequireValidPlant(config.plant);
  ExperimentContext ctx;
  ctx.config = config;
  ctx.nc = BuildNoncausal(config.plant);
  ctx.response =
      ComputeNoncausalResponse(config.plant, ctx.nc, HalfCircleGrid(config.grid_size));
  ctx.gamma_nc = ComputeGammaNc(config.plant, ctx.nc, config.bisection_tol, config.grid_size);
  try {
    ctx.bound = H2GapBound(config.plant, ctx.nc);
  } catch (const BoundUnavailable& e) {
    ctx.bound_error = e.what();
  }
  return ctx;
}

SweepRow ComputeSweepRow(const ExperimentContext& ctx, int p) {
  const Plant& plant = ctx.config.plant;
  const double tol = ctx.config.bisection_tol;
  SweepRow row;
  row.p = p;
  row.gamma_nc = ctx.gamma_nc.value;
  row.gamma_inf_p = row.gamma_2_p = row.gamma_R_p = row.oracle_regret = kNaN;
  const auto attempt = [&](const std::string& what, const std::function<void()>& fn) {
    try {
      fn();
    } catch (const Error& e) {
      row.failed = true;
      row.diagnostics.push_back(what + ": " + e.what());
    }
  };

  attempt("hinf", [&] {
    row.hinf = HinfPreviewBisectRaw(plant, p, ctx.gamma_nc.value, tol);
    row.gamma_inf_p = row.hinf->gamma;
    for (const auto& d : row.hinf->diagnostics) row.diagnostics.push_back("hinf: " + d);
  });
  attempt("h2", [&] {
    row.h2 = H2Preview(plant, ctx.nc, p);
    row.gamma_2_p = HinfNorm(ClosedLoop(plant, *row.h2), tol);
  });
  attempt("regret", [&] {
    row.regret = RegretPreviewBisect(plant, ctx.nc, ctx.response, p, MakeRegretOptions(ctx.config));
    row.gamma_R_p = row.regret->gamma;
    for (const auto& d : row.regret->diagnostics) row.diagnostics.push_back("regret: " + d);
  });
  if (row.regret) {
    attempt("oracle", [&] {
      row.oracle_regret =
          RegretEval(plant, ctx.nc, row.regret->controller, ctx.config.oracle_horizon).value;
    });
  }
  if (ctx.bound && ctx.bound->ValidFor(p)) row.bound_h2 = ctx.bound->Bound(p);
  return row;
}

std::vector<std::string> CheckSweepRow(const SweepRow& row, double tol) {
  std::vector<std::string> out;
  const double slack = 2.0 * tol;
  const auto fail = [&](const std::string& what, double lhs, double rhs) {
    std::ostringstream msg;
    msg << "p = " << row.p << ": " << what << " violated (" << Num(lhs) << " vs " << Num(rhs)
        << ")";
    out.push_back(msg.str());
  };
  if (!std::isnan(row.gamma_inf_p) && row.gamma_nc > row.gamma_inf_p + slack)
    fail("gamma_nc <= gamma_inf_p", row.gamma_nc, row.gamma_inf_p);
  if (!std::isnan(row.gamma_inf_p) && !std::isnan(row.gamma_2_p) &&
      row.gamma_inf_p > row.gamma_2_p + slack)
    fail("gamma_inf_p <= gamma_2_p", row.gamma_inf_p, row.gamma_2_p);
  if (!std::isnan(row.gamma_inf_p) && !std::isnan(row.gamma_R_p) &&
      row.gamma_R_p < row.gamma_inf_p - row.gamma_nc - slack)
    fail("gamma_R_p >= gamma_inf_p - gamma_nc", row.gamma_R_p, row.gamma_inf_p - row.gamma_nc);
  return out;
}

std::vector<std::string> CheckBaseline(const ExperimentContext& ctx, const SweepRow& row,
                                       std::uint64_t seed, int samples, int length) {
  const Plant& plant = ctx.config.plant;
  std::vector<std::pair<std::string, const PreviewController*>> ctrls;
  if (row.hinf) ctrls.emplace_back("hinf", &row.hinf->controller);
  if (row.h2) ctrls.emplace_back("h2", &*row.h2);
  if (row.regret) ctrls.emplace_back("regret", &row.regret->controller);

  std::mt19937_64 rng(seed + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(row.p + 1));
  std::normal_distribution<double> normal;
  std::vector<std::string> out;
  for (int s = 0; s < samples; ++s) {
    Eigen::MatrixXd samples_d(plant.nd(), length);
    for (Eigen::Index j = 0; j < samples_d.cols(); ++j)
      for (Eigen::Index i = 0; i < samples_d.rows(); ++i) samples_d(i, j) = normal(rng);
    const Signal d(samples_d);
    const double j_nc = NoncausalCost(plant, ctx.nc, d);
    for (const auto& [name, ctrl] : ctrls) {
      const double j = TotalCost(Simulate(plant, *ctrl, d));
      if (j_nc > j + kBaselineSlack * (1.0 + d.SquaredNorm())) {
        std::ostringstream msg;
        msg << "p = " << row.p << ": non-causal cost " << Num(j_nc) << " exceeds " << name
            << " cost " << Num(j) << " on random disturbance " << s;
        out.push_back(msg.str());
      }
    }
  }
  return out;
}

bool SweepResult::ok() const {
  return std::none_of(rows.begin(), rows.end(), [](const SweepRow& r) { return r.failed; });
}

SweepResult RunSweep(const ExperimentContext& ctx, std::ostream* log) {
  SweepResult result;
  for (int p = ctx.config.p_min; p <= ctx.config.p_max; ++p) {
    SweepRow row = ComputeSweepRow(ctx, p);
    auto violations = CheckSweepRow(row, ctx.config.bisection_tol);
    const auto baseline = CheckBaseline(ctx, row, ctx.config.seed);
    violations.insert(violations.end(), baseline.begin(), baseline.end());
    if (!violations.empty()) {
      row.failed = true;
      row.diagnostics.insert(row.diagnostics.end(), violations.begin(), violations.end());
    }
    if (log) {
      *log << "p = " << p << ": gamma_inf = " << Num(row.gamma_inf_p)
           << ", gamma_2 = " << Num(row.gamma_2_p) << ", gamma_R = " << Num(row.gamma_R_p)
           << (row.failed ? " [FAILED]" : "") << "\n";
      for (const auto& d : row.diagnostics) *log << "  " << d << "\n";
    }
    result.rows.push_back(std::move(row));
  }
  return result;
}

void WriteSweepCsv(std::ostream& out, const SweepResult& result) {
  out << "p,gamma_inf_p,gamma_2_p,gamma_R_p,gamma_nc,oracle_regret,bound_h2\n";
  for (const auto& r : result.rows) {
    out << r.p << "," << Num(r.gamma_inf_p) << "," << Num(r.gamma_2_p) << "," << Num(r.gamma_R_p)
        << "," << Num(r.gamma_nc) << "," << Num(r.oracle_regret) << ","
        << (r.bound_h2 ? Num(*r.bound_h2) : "n/a") << "\n";
  }
}

void WriteFig1Csv(std::ostream& out, const SweepResult& result) {
  out << "p,gamma_inf_p,gamma_nc\n";
  for (const auto& r : result.rows)
    out << r.p << "," << Num(r.gamma_inf_p) << "," << Num(r.gamma_nc) << "\n";
}

void WriteFig2Csv(std::ostream& out, const SweepResult& result) {
  out << "p,gamma_R_p\n";
  for (const auto& r : result.rows) out << r.p << "," << Num(r.gamma_R_p) << "\n";
}

void WriteFig1Svg(std::ostream& out, const SweepResult& result) {
  Series inf{"gamma_inf_p", "#1f77b4", {}}, nc{"gamma_nc", "#d62728", {}};
  for (const auto& r : result.rows) {
    inf.points.emplace_back(r.p, r.gamma_inf_p);
    nc.points.emplace_back(r.p, r.gamma_nc);
  }
  WriteSvgChart(out, "H-infinity preview level versus preview length", "gamma",
                {std::move(inf), std::move(nc)}, false);
}

void WriteFig2Svg(std::ostream& out, const SweepResult& result) {
  Series reg{"gamma_R_p", "#2ca02c", {}};
  for (const auto& r : result.rows) reg.points.emplace_back(r.p, r.gamma_R_p);
  WriteSvgChart(out, "Optimal additive regret versus preview length", "gamma_R (log scale)",
                {std::move(reg)}, true);
}

void WriteGammaNcCsv(std::ostream& out, const GammaNc& g) {
  out << "gamma_nc,tol,grid_size\n" << Num(g.value) << "," << Num(g.tol) << "," << g.grid_size
      << "\n";
}

void WriteBoundCsv(std::ostream& out, const GapBound& b, int p_min, int p_max) {
  out << "p,a,b,c,alpha,T_cut,bound\n";
  for (int p = p_min; p <= p_max; ++p) {
    out << p << "," << Num(b.a) << "," << Num(b.b) << "," << Num(b.c) << "," << Num(b.alpha)
        << "," << b.t_cut << "," << Num(b.Bound(p)) << "\n";
  }
}

ControllerChoice ParseControllerChoice(const std::string& name) {
  if (name == "hinf") return ControllerChoice::kHinf;
  if (name == "h2") return ControllerChoice::kH2;
  if (name == "regret") return ControllerChoice::kRegret;
  if (name == "noncausal") return ControllerChoice::kNoncausal;
  throw InvalidInput("unknown controller '" + name + "' (expected hinf, h2, regret or noncausal)");
}

SimulationReport RunSimulation(const ExperimentConfig& config, ControllerChoice choice, int p,
                               const Signal& d) {
  const Plant& plant = config.plant;
  RequireValidPlant(plant);
  if (p < 0) throw InvalidInput("preview length must be nonnegative");
  if (d.dim() != plant.nd()) throw InvalidInput("disturbance dimension does not match B_d");
  const NoncausalController nc = BuildNoncausal(plant);
  SimulationReport report;
  if (choice == ControllerChoice::kNoncausal) {
    report.trajectory = SimulateNoncausal(plant, nc, d);
    report.total_cost = TotalCost(report.trajectory);
    return report;
  }
  PreviewController ctrl;
  switch (choice) {
    case ControllerChoice::kHinf: {
      const double g_nc = ComputeGammaNc(plant, nc, config.bisection_tol, config.grid_size).value;
      ctrl = HinfPreviewBisect(plant, p, config.bisection_tol, g_nc).controller;
      break;
    }
    case ControllerChoice::kH2:
      ctrl = H2Preview(plant, nc, p);
      break;
    case ControllerChoice::kRegret:
      ctrl = RegretPreviewBisect(plant, p, MakeRegretOptions(config)).controller;
      break;
    case ControllerChoice::kNoncausal:
      break;
  }
  report.trajectory = Simulate(plant, ctrl, d);
  report.total_cost = TotalCost(report.trajectory);
  report.regret = report.total_cost - NoncausalCost(plant, nc, d);
  return report;
}

void WriteTrajectoryCsv(std::ostream& out, const Plant& plant, const SimulationReport& report) {
  const Trajectory& traj = report.trajectory;
  out << "t";
  for (int i = 0; i < plant.nx(); ++i) out << ",x_" << i + 1;
  for (int i = 0; i < plant.nu(); ++i) out << ",u_" << i + 1;
  out << ",running_cost,regret\n";
  double running = 0.0;
  for (int t = 0; t < traj.steps(); ++t) {
    const auto& x = traj.states[t];
    const auto& u = traj.inputs[t];
    running += x.dot(plant.Q * x) + u.dot(plant.R * u);
    out << t;
    for (Eigen::Index i = 0; i < x.size(); ++i) out << "," << Num(x(i));
    for (Eigen::Index i = 0; i < u.size(); ++i) out << "," << Num(u(i));
    out << "," << Num(running) << ",\n";
  }
  out << "total";
  for (int i = 0; i < plant.nx() + plant.nu(); ++i) out << ",";
  out << "," << Num(report.total_cost) << "," << (report.regret ? Num(*report.regret) : "n/a")
      << "\n";
}

int CmdGammaNc(const CommandOptions& options, std::ostream& log, std::ostream& err) {
  return Guard(err, [&] {
    const ExperimentConfig config = LoadWithOverrides(options);
    const GammaNc g = ComputeGammaNc(config.plant, config.bisection_tol, config.grid_size);
    const auto path = std::filesystem::path(config.output_dir) / "gamma_nc.csv";
    WriteFile(path, [&](std::ostream& out) { WriteGammaNcCsv(out, g); });
    log << "gamma_nc = " << Num(g.value) << " (peak at omega = " << Num(g.omega_peak)
        << ")\nwrote " << path.string() << "\n";
    return kExitOk;
  });
}

int CmdSweep(const CommandOptions& options, std::ostream& log, std::ostream& err) {
  return Guard(err, [&] {
    ExperimentConfig config = LoadWithOverrides(options);
    if (options.p) config.p_min = config.p_max = *options.p;
    const ExperimentContext ctx = PrepareExperiment(config);
    if (!ctx.bound) log << "gap bound unavailable: " << ctx.bound_error << "\n";
    const SweepResult result = RunSweep(ctx, &log);
    const std::filesystem::path dir(config.output_dir);
    WriteFile(dir / "sweep.csv", [&](std::ostream& out) { WriteSweepCsv(out, result); });
    WriteFile(dir / "fig1.csv", [&](std::ostream& out) { WriteFig1Csv(out, result); });
    WriteFile(dir / "fig2.csv", [&](std::ostream& out) { WriteFig2Csv(out, result); });
    if (options.svg) {
      WriteFile(dir / "fig1.svg", [&](std::ostream& out) { WriteFig1Svg(out, result); });
      WriteFile(dir / "fig2.svg", [&](std::ostream& out) { WriteFig2Svg(out, result); });
    }
    log << "wrote " << (dir / "sweep.csv").string() << "\n";
    if (!result.ok()) {
      err << "sweep finished with failed rows:\n";
      for (const auto& r : result.rows)
        for (const auto& d : r.diagnostics)
          if (r.failed) err << "  p = " << r.p << ": " << d << "\n";
      return kExitPartialFailure;
    }
    return kExitOk;
  });
}

int CmdSimulate(const CommandOptions& options, std::ostream& log, std::ostream& err) {
  return Guard(err, [&] {
    const ControllerChoice choice = ParseControllerChoice(options.controller);
    if (!options.d_path) throw InvalidInput("--d is required for simulate");
    if (!options.p && choice != ControllerChoice::kNoncausal)
      throw InvalidInput("--p is required for causal controllers");
    const ExperimentConfig config = LoadWithOverrides(options);
    const Signal d = ReadSignalCsv(*options.d_path);
    const SimulationReport report = RunSimulation(config, choice, options.p.value_or(0), d);
    const auto path = std::filesystem::path(config.output_dir) / "trajectory.csv";
    WriteFile(path, [&](std::ostream& out) { WriteTrajectoryCsv(out, config.plant, report); });
    log << "total cost = " << Num(report.total_cost);
    if (report.regret) log << ", regret versus non-causal = " << Num(*report.regret);
    log << "\nwrote " << path.string() << "\n";
    return kExitOk;
  });
}

int CmdBound(const CommandOptions& options, std::ostream& log, std::ostream& err) {
  return Guard(err, [&] {
    ExperimentConfig config = LoadWithOverrides(options);
    if (options.p) config.p_min = config.p_max = *options.p;
    const GapBound bound = H2GapBound(config.plant);
    const auto path = std::filesystem::path(config.output_dir) / "bound.csv";
    WriteFile(path, [&](std::ostream& out) {
      WriteBoundCsv(out, bound, config.p_min, config.p_max);
    });
    log << "alpha = " << Num(bound.alpha) << ", T_cut = " << bound.t_cut;
    if (config.p_min < bound.t_cut) log << " (bound valid only for p >= " << bound.t_cut << ")";
    log << "\nwrote " << path.string() << "\n";
    return kExitOk;
  });
}

}  // namespace previewctl
