#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "overset/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Overset-grid coupling experiments"};
  app.require_subcommand(1);
  auto* run = app.add_subcommand("run", "Run an experiment described by a JSON config");
  std::string config;
  std::string out = ".";
  std::optional<std::uint64_t> seed;
  run->add_option("config", config, "Experiment configuration (JSON)")->required();
  run->add_option("--out", out, "Output directory");
  run->add_option("--seed", seed, "Override the RNG seed");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }
  return overset::cli::run(config, out, seed, std::cout, std::cerr);
}
