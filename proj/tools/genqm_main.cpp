#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "genqm/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Generalized-momentum quantum mechanics on a 1D grid"};
  app.set_version_flag("--version", std::string(genqm::cli::kVersion));
  app.require_subcommand(1);

  std::string config;
  std::string out_dir;
  auto add = [&](const char* name, const char* help) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("config", config, "Scenario file (JSON)")->required();
    sub->add_option("--out-dir", out_dir, "Overrides output.directory");
    return sub;
  };
  CLI::App* run = add("run", "Run the task of a scenario");
  CLI::App* sweep = add("sweep", "Run a parameter sweep");
  CLI::App* check = add("check", "Report operator and PT diagnostics");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  genqm::cli::Command command = genqm::cli::Command::Run;
  if (sweep->parsed()) command = genqm::cli::Command::Sweep;
  if (check->parsed()) command = genqm::cli::Command::Check;
  (void)run;
  std::optional<std::filesystem::path> out;
  if (!out_dir.empty()) out = out_dir;
  return genqm::cli::execute(command, config, out, std::cout, std::cerr);
}
