// otlab: scenario runner for the submanifold transport laboratory.
//
// Exit codes: 0 pass, 1 theorem/certification failure (or any warning with
// --strict), 2 configuration error.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "otlab/error.hpp"
#include "otlab_tools/config.hpp"
#include "otlab_tools/runner.hpp"

#ifndef OTLAB_SCENARIO_DIR
#define OTLAB_SCENARIO_DIR "scenarios"
#endif

namespace fs = std::filesystem;
using namespace otlab;
using namespace otlab::tools;

namespace {

fs::path scenario_dir() {
  if (const char* env = std::getenv("OTLAB_SCENARIOS")) return env;
  return OTLAB_SCENARIO_DIR;
}

std::vector<fs::path> bundled() {
  std::vector<fs::path> out;
  std::error_code ec;
  for (const auto& e : fs::directory_iterator(scenario_dir(), ec)) {
    if (e.path().extension() == ".scn") out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

// A path, or the name of a bundled scenario.
std::string resolve(const std::string& arg) {
  if (fs::exists(arg)) return arg;
  const fs::path p = scenario_dir() / (arg + ".scn");
  if (fs::exists(p)) return p.string();
  raise(ErrorKind::ConfigError, "no scenario file or bundled scenario named '" + arg + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimal transport verification runs on model-space submanifolds"};
  app.require_subcommand(1);
  app.fallthrough();  // global options may follow the subcommand
  bool strict = false;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::string format;
  app.add_flag("--strict", strict, "Treat check warnings as failures");
  app.add_option("--seed", seed, "Override the scenario seed");
  app.add_option("--out", out_dir, "Output directory (default: the scenario's output.dir/<name>)");
  app.add_option("--format", format, "Report format")->check(CLI::IsMember({"json", "csv"}));

  auto* run = app.add_subcommand("run", "Run one scenario");
  std::string config_arg;
  run->add_option("config", config_arg, "Scenario file or bundled scenario name")->required();

  auto* sweep = app.add_subcommand("sweep", "Run a scenario over a parameter grid");
  std::string sweep_arg;
  std::string grid_spec;
  sweep->add_option("config", sweep_arg, "Scenario file or bundled scenario name")->required();
  sweep->add_option("--grid", grid_spec, "section.key=v1,v2,...")->required();

  auto* list = app.add_subcommand("list-scenarios", "List the bundled scenarios");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (list->parsed()) {
      for (const auto& p : bundled()) {
        const ScenarioConfig c = build_config(load_raw(p.string()));
        std::cout << p.stem().string() << "  " << c.variant << " " << chart_kind_name(c.chart.kind) << " "
                  << (c.inequality ? inequality_kind_name(*c.inequality) : std::string("none")) << '\n';
      }
      return 0;
    }

    if (run->parsed()) {
      RawConfig raw = load_raw(resolve(config_arg));
      if (seed) raw.set("seed", std::to_string(*seed));
      if (!format.empty()) raw.set("output.format", format);
      const ScenarioConfig config = build_config(raw);
      const RunReport report = run_scenario(config);
      const std::string dir = out_dir.empty() ? (fs::path(config.out_dir) / config.name).string() : out_dir;
      emit_report(report, dir, config.format);
      for (const auto& chk : report.checks) {
        std::cerr << chk.name << ": " << verdict_name(chk.verdict) << '\n';
      }
      if (report.inequality) std::cerr << "ratio: " << report.inequality->ratio << '\n';
      return exit_code(report, strict);
    }

    if (sweep->parsed()) {
      const RawConfig raw = load_raw(resolve(sweep_arg));
      const SweepGrid grid = parse_grid(grid_spec);
      const ScenarioConfig base = build_config(raw);
      const auto points = run_sweep(raw, grid, seed);
      const std::string dir = out_dir.empty() ? (fs::path(base.out_dir) / (base.name + "_sweep")).string() : out_dir;
      emit_sweep(points, grid, dir);
      int code = 0;
      for (const auto& p : points) code = std::max(code, exit_code(p.report, strict));
      return code;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.kind() == ErrorKind::ConfigError ? 2 : 1;
  }
  return 0;
}
