#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "lcms/scenario.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Locally conformal multisymplectic scenario runner"};
  app.require_subcommand(1);

  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  double tolerance_scale = 1.0;
  int refine = 0;
  bool quiet = false;

  CLI::App* run = app.add_subcommand("run", "Run one scenario config");
  run->add_option("config", config, "Scenario config (INI)")->required();
  run->add_option("--out", out, "Directory for CSV outputs and report.txt");
  run->add_option("--seed", seed, "Override the scenario seed");
  run->add_option("--tolerance-scale", tolerance_scale, "Multiply every tolerance")->check(CLI::PositiveNumber);
  run->add_option("--refine", refine, "Run the grid-refinement ladder with this many levels")
      ->check(CLI::NonNegativeNumber);
  run->add_flag("-q,--quiet", quiet, "Print only the status line");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  lcms::RunOptions options;
  if (!out.empty()) options.out_dir = std::filesystem::path(out);
  options.seed = seed;
  options.tolerance_scale = tolerance_scale;
  options.refine = refine;

  const lcms::RunReport report = lcms::run_scenario_file(config, options);
  if (quiet) {
    std::cout << report.scenario << ": " << (report.pass() ? "pass" : "fail") << "\n";
  } else {
    std::cout << report.to_text();
  }
  if (!report.pass() && !report.message.empty()) std::cerr << report.message << "\n";
  return report.exit_code();
}
