#pragma once

// Scenario pipeline: mesh -> target domain -> inequality -> transport on a
// coarser mesh -> structural checks, and the report emitters.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "otlab/inequalities.hpp"
#include "otlab_tools/config.hpp"

namespace otlab::tools {

enum class Verdict { Pass, Warn, Fail };
std::string verdict_name(Verdict v);

/// Theorem-level checks fail the run; check-level ones only warn unless strict.
enum class CheckLevel { Theorem, Check };

struct CheckResult {
  std::string name;
  CheckLevel level = CheckLevel::Check;
  Verdict verdict = Verdict::Pass;
  std::vector<std::pair<std::string, double>> metrics;
};

struct Series {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

struct StageTiming {
  std::string stage;
  double seconds = 0.0;
};

struct RunReport {
  std::string name;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, std::string>> config;
  std::optional<InequalityReport> inequality;
  std::vector<CheckResult> checks;
  std::vector<Series> series;
  std::vector<StageTiming> timings;  // emitted separately; never part of the report files

  int failures() const;
  int warnings() const;
};

/// Runs every enabled stage in order. Module errors are rethrown with the
/// stage name prefixed; the error kind is kept.
RunReport run_scenario(const ScenarioConfig& config);

/// 0 pass, 1 theorem or certification failure (or any warning when strict).
int exit_code(const RunReport& report, bool strict);

/// Writes report.jsonl (json) or inequality.csv + checks.csv (csv), plus the
/// series tables and timings.csv, into dir. Throws IoError.
void emit_report(const RunReport& report, const std::string& dir, const std::string& format);

struct SweepGrid {
  std::string field;  // "section.key"
  std::vector<std::string> values;
};

/// "section.key=v1,v2,...". Throws ConfigError.
SweepGrid parse_grid(const std::string& spec);

struct SweepPoint {
  std::string value;
  RunReport report;
};

std::vector<SweepPoint> run_sweep(const RawConfig& raw, const SweepGrid& grid,
                                  const std::optional<std::uint64_t>& seed_override);

/// sweep.csv, one row per grid point in grid order.
void emit_sweep(const std::vector<SweepPoint>& points, const SweepGrid& grid, const std::string& dir);

}  // namespace otlab::tools
