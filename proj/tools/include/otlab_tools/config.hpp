#pragma once

// Scenario files: line-oriented "key value" records grouped by [section]
// headers. '#' starts a comment. See docs/scenario_format.md for the fields.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "otlab/inequalities.hpp"
#include "otlab/submanifold.hpp"
#include "otlab/transport.hpp"

namespace otlab::tools {

struct RawEntry {
  std::string section;
  std::string key;
  std::string value;
  int line = 0;  // 0 for overrides
};

struct RawConfig {
  std::string source;  // file name for diagnostics
  std::vector<RawEntry> entries;

  /// Replaces (or appends) section.key; field is "section.key" or "key" for the top level.
  void set(const std::string& field, const std::string& value);
  const RawEntry* find(const std::string& section, const std::string& key) const;
};

/// Throws Error(ConfigError) with "source:line: message".
RawConfig parse_raw(std::istream& in, const std::string& source);
RawConfig load_raw(const std::string& path);

enum class SolverChoice { Exact, Entropic };

struct ScenarioConfig {
  std::string name;
  std::uint64_t seed = 0;
  double budget_seconds = 600.0;

  std::string variant = "euclidean";
  int n = 2;
  int m = 2;
  double curvature = 0.0;
  bool lift = false;

  ChartSpec chart;
  Resolution resolution{24, 0};

  std::string f = "1";

  DomainSpec domain;
  int domain_samples = 1000;

  SolverChoice solver = SolverChoice::Exact;
  double regularization = 0.0;
  int entropic_max_iter = 20000;
  int transport_resolution = 8;
  ExactOptions caps;
  double certify_tol = 1e-8;

  bool tangency = false;
  bool fiber_mass = false;
  bool semiconcavity = false;
  bool jacobi = false;
  bool ibp = false;
  std::optional<InequalityKind> inequality;
  double report_tol = 0.02;
  std::optional<double> theta;
  std::optional<double> k1;
  std::optional<double> k2;
  int jacobi_atoms = 200;
  int jacobi_steps = 1000;
  double tangency_tol = 1.0;        // median residual / transport mesh spacing
  double semiconcavity_slack = 0.05;

  std::string out_dir = "out";
  std::string format = "json";

  RawConfig raw;

  /// Ambient model space of dimension n + m (before any lift).
  ModelManifold manifold() const;
};

/// Validates every field. Throws Error(ConfigError) naming the line and field.
ScenarioConfig build_config(const RawConfig& raw);

/// Canonical "section.key = value" echo in a fixed field order.
std::vector<std::pair<std::string, std::string>> config_echo(const ScenarioConfig& config);

}  // namespace otlab::tools
