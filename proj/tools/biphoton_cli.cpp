#include <iostream>
#include <limits>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "biphoton/scenario.hpp"

int main(int argc, char** argv) {
  using biphoton::Command;

  CLI::App app{"Time-evolving entangled photon pairs from a biexciton cascade"};
  app.require_subcommand(1);

  std::string config_path;
  biphoton::Overrides overrides;
  unsigned threads = 0;

  auto add_scenario_options = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "Scenario config (JSON)")->required();
    sub->add_option("--seed", overrides.seed, "Monte-Carlo seed");
    sub->add_option("--pairs", overrides.pairs, "Monte-Carlo pair count");
    sub->add_option("--out", overrides.out, "Output path prefix");
    sub->add_option("--engine", overrides.engine, "analytic or mc")
        ->check(CLI::IsMember({"analytic", "mc"}));
    sub->add_option("--threads", threads, "Worker threads (0 = all cores)");
  };

  auto* width = app.add_subcommand("scan-width", "Fidelity versus gate width");
  auto* delay = app.add_subcommand("scan-delay", "Fidelity versus gate delay");
  auto* spectrum = app.add_subcommand("spectrum", "Spectra of truncated decays");
  auto* simulate = app.add_subcommand("simulate", "Export simulated time tags");
  for (auto* sub : {width, delay, spectrum, simulate}) add_scenario_options(sub);

  auto* analyze = app.add_subcommand("analyze", "Estimate fidelity from a time-tag file");
  std::string input;
  double tau_g = -std::numeric_limits<double>::infinity();
  double gate_width = std::numeric_limits<double>::infinity();
  std::optional<std::string> analyze_out;
  analyze->add_option("--input", input, "Time-tag CSV")->required();
  analyze->add_option("--tau-g", tau_g, "Gate start in ps (default: accept all)");
  analyze->add_option("--width", gate_width, "Gate width in ps (default: unbounded)");
  analyze->add_option("--out", analyze_out, "Also write <prefix>_analysis.csv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? biphoton::kExitOk : biphoton::kExitUsage;
  }

  if (analyze->parsed()) {
    return biphoton::execute_analyze(input, tau_g, gate_width, analyze_out, std::cout,
                                     std::cerr);
  }
  Command command = Command::scan_width;
  if (delay->parsed()) command = Command::scan_delay;
  if (spectrum->parsed()) command = Command::spectrum;
  if (simulate->parsed()) command = Command::simulate;
  return biphoton::execute(command, config_path, overrides, threads, std::cout, std::cerr);
}
