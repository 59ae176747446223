#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "previewctl/experiment.hpp"

namespace {

struct Flags {
  std::string config;
  std::optional<std::string> out;
  std::optional<int> p;
  std::string controller = "hinf";
  std::optional<std::string> d;
  std::optional<std::uint64_t> seed;
  bool svg = false;
};

previewctl::CommandOptions ToOptions(const Flags& f) {
  previewctl::CommandOptions o;
  o.config_path = f.config;
  o.out_dir = f.out;
  o.p = f.p;
  o.controller = f.controller;
  o.d_path = f.d;
  o.seed = f.seed;
  o.svg = f.svg;
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Preview, H-infinity and regret-optimal control experiments"};
  app.require_subcommand(1);
  Flags flags;

  const auto common = [&](CLI::App* sub) {
    sub->add_option("--config", flags.config, "JSON experiment configuration")->required();
    sub->add_option("--out", flags.out, "Output directory (overrides output_dir)");
    sub->add_option("--seed", flags.seed, "Seed for random-disturbance checks");
  };

  CLI::App* gamma_nc = app.add_subcommand("gamma-nc", "Compute the non-causal H-infinity level");
  common(gamma_nc);

  CLI::App* sweep = app.add_subcommand("sweep", "Sweep the preview length over p_range");
  common(sweep);
  sweep->add_option("--p", flags.p, "Restrict the sweep to one preview length")
      ->check(CLI::NonNegativeNumber);
  sweep->add_flag("--svg", flags.svg, "Also write fig1.svg and fig2.svg");

  CLI::App* simulate = app.add_subcommand("simulate", "Simulate one controller on a disturbance");
  common(simulate);
  simulate->add_option("--p", flags.p, "Preview length")->check(CLI::NonNegativeNumber);
  simulate->add_option("--controller", flags.controller, "hinf, h2, regret or noncausal")
      ->check(CLI::IsMember({"hinf", "h2", "regret", "noncausal"}));
  simulate->add_option("--d", flags.d, "Disturbance CSV (t,d_1,...)")->required();

  CLI::App* bound = app.add_subcommand("bound", "Tabulate the H2 preview gap bound");
  common(bound);
  bound->add_option("--p", flags.p, "Single preview length instead of p_range")
      ->check(CLI::NonNegativeNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? previewctl::kExitOk : previewctl::kExitValidation;
  }

  if (*gamma_nc) return previewctl::CmdGammaNc(ToOptions(flags), std::cout, std::cerr);
  if (*sweep) return previewctl::CmdSweep(ToOptions(flags), std::cout, std::cerr);
  if (*simulate) return previewctl::CmdSimulate(ToOptions(flags), std::cout, std::cerr);
  return previewctl::CmdBound(ToOptions(flags), std::cout, std::cerr);
}
