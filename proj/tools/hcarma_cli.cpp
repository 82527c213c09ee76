#include "hcarma/commands.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <utility>

int main(int argc, char** argv) {
  CLI::App app{"Hilbert-space CARMA simulation and analysis"};
  app.require_subcommand(1);

  hcarma::CommandLine cl;
  std::uint64_t seed = 0;
  const std::pair<const char*, const char*> commands[] = {
      {"simulate", "simulate sample paths to paths.csv and manifest.json"},
      {"analyze", "write stability, covariance and characteristic functional to analysis.json"},
      {"validate", "run numerical self-checks and report PASS/FAIL"}};
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--scenario", cl.scenario_path, "scenario JSON file")->required();
    auto* out = sub->add_option("--out", cl.out_dir, "output directory");
    if (std::string(name) != "validate") out->required();
    sub->add_option("--seed", seed, "base seed, overrides the scenario");
    sub->add_option("--threads", cl.threads, "worker threads (0 = all cores)");
    sub->callback([&cl, &seed, sub, name] {
      cl.command = name;
      if (sub->count("--seed") > 0) cl.seed = seed;
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? hcarma::kExitOk : hcarma::kExitValidation;
  }
  return hcarma::run_command(cl, std::cout, std::cerr);
}
