// Command-line front end: nsk <command> --config <file> [--out <dir>] [--seed <u64>]
#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "nsk/config.hpp"
#include "nsk/experiments.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Pseudo-spectral NSK simulator and verification harness"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;

  struct Command {
    const char* name;
    const char* help;
    nsk::RunResult (*run)(const nsk::ExperimentConfig&);
  };
  const Command commands[] = {
      {"validate", "run the verification suites against the reference implementations", nsk::run_validate},
      {"simulate", "nonlinear time integration with energy and norm diagnostics", nsk::run_simulate},
      {"picard", "Picard iteration of the Duhamel map", nsk::run_picard},
      {"linear-decay", "linear decay rates from the radial quadrature", nsk::run_linear_decay},
      {"report", "collect existing outputs into report.json and plot_spec.json", nsk::run_report},
  };
  for (const auto& c : commands) {
    auto* sub = app.add_subcommand(c.name, c.help);
    sub->add_option("--config", config_path, "TOML configuration file")->required();
    sub->add_option("--out", out_dir, "output directory (overrides [output] dir)");
    sub->add_option("--seed", seed, "random seed (overrides the config value)");
  }

  CLI11_PARSE(app, argc, argv);

  for (const auto& c : commands) {
    if (!app.got_subcommand(c.name)) continue;
    try {
      auto cfg = nsk::load_config(config_path);
      if (out_dir) cfg.output_dir = *out_dir;
      if (seed) cfg.seed = *seed;
      const auto r = c.run(cfg);
      for (const auto& f : r.files) std::cout << "wrote " << f.string() << "\n";
      std::cout << r.summary << "\n";
      return r.status;
    } catch (const std::exception& e) {
      std::cerr << "nsk " << c.name << ": " << e.what() << "\n";
      return 4;
    }
  }
  return 4;
}
