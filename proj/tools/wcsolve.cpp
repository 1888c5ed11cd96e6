#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "wcs/config.hpp"
#include "wcs/pipelines.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Spectral-Galerkin solver and verification suite for weakly coupled elliptic systems"};
  std::string subcommand;
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<int> threads;
  std::optional<std::string> format;
  app.add_option("subcommand", subcommand, "Pipeline to run")
      ->required()
      ->check(CLI::IsMember(wcs::subcommands()));
  app.add_option("--config", config_path, "Run configuration (JSON)")->required();
  app.add_option("--seed", seed, "Override solver.seed");
  app.add_option("--out", out_dir, "Override output.dir");
  app.add_option("--threads", threads, "Override solver.threads")->check(CLI::PositiveNumber);
  app.add_option("--format", format, "Override output.format")->check(CLI::IsMember({"json", "csv", "both"}));
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : wcs::kExitValidation;
  }

  wcs::RunConfig config;
  try {
    config = wcs::load_config(config_path);
    if (seed) config.solver.seed = *seed;
    if (out_dir) config.output.dir = *out_dir;
    if (threads) config.solver.threads = *threads;
    if (format) config.output.format = *format;
    config.validate();
  } catch (const std::exception& e) {
    std::cerr << "wcsolve: invalid configuration: " << e.what() << "\n";
    return wcs::kExitValidation;
  }
  return wcs::run(subcommand, config, std::cerr);
}
