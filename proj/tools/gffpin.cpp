// gffpin — lattice free field pinning toolkit.
//
//   gffpin run <config.json>   execute one experiment, write CSVs + manifest
//   gffpin verify <suite>      run a built-in verification suite
//   gffpin tables <dir>        aggregate finished runs into summary tables
#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "gffpin/gffpin.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Lattice free field pinning: simulation and verification"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(gffpin::kVersion));

  std::string configPath;
  auto* run = app.add_subcommand(
      "run", "Run the experiment described by a JSON config");
  run->add_option("config", configPath, "Path to the JSON config")
      ->required()
      ->check(CLI::ExistingFile);

  std::string suite = "all";
  auto* verify = app.add_subcommand(
      "verify", "Run a verification suite (green, decomposition, hierarchy, "
                "scalars, sampler, all)");
  verify->add_option("suite", suite, "Suite name")->required();

  std::string tablesDir;
  auto* tables = app.add_subcommand(
      "tables", "Aggregate run manifests under a directory into tables");
  tables->add_option("dir", tablesDir, "Directory holding finished runs")
      ->required()
      ->check(CLI::ExistingDirectory);

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      const gffpin::RunResult res = gffpin::runExperimentFile(configPath);
      std::cout << "wrote " << res.dir.generic_string() << "/\n";
      for (const auto& o : res.outputs) std::cout << "  " << o << "\n";
      for (const auto& w : res.warnings)
        std::cout << "warning: " << w << "\n";
      return 0;
    }
    if (verify->parsed()) {
      const gffpin::VerifyReport rep = gffpin::runVerifySuite(suite);
      for (const auto& line : rep.lines) std::cout << line << "\n";
      std::cout << (rep.failures == 0 ? "all checks passed"
                                      : std::to_string(rep.failures) +
                                            " check(s) failed")
                << " (" << rep.lines.size() << " total)\n";
      return rep.failures == 0 ? 0 : 1;
    }
    if (tables->parsed()) {
      const int n = gffpin::writeTables(tablesDir);
      std::cout << "aggregated " << n << " run(s) into "
                << (std::filesystem::path(tablesDir) / "tables.md").generic_string()
                << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
