#include "otlab_tools/config.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <map>
#include <set>
#include <sstream>

#include "otlab/error.hpp"
#include "otlab_tools/expression.hpp"

namespace otlab::tools {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

const std::map<std::string, std::set<std::string>>& known_fields() {
  static const std::map<std::string, std::set<std::string>> fields = {
      {"", {"name", "seed", "budget_seconds"}},
      {"manifold", {"variant", "n", "m", "curvature", "lift"}},
      {"chart", {"kind", "radius", "resolution", "angular", "height"}},
      {"field", {"f"}},
      {"domain", {"variant", "sigma", "r", "eps", "samples", "volume_samples"}},
      {"transport",
       {"solver", "regularization", "max_iter", "resolution", "max_sources", "max_targets", "certify_tol"}},
      {"checks",
       {"tangency", "fiber_mass", "semiconcavity", "jacobi", "ibp", "inequality", "report_tol", "theta", "k1", "k2",
        "jacobi_atoms", "jacobi_steps", "tangency_tol", "semiconcavity_slack"}},
      {"output", {"dir", "format"}},
  };
  return fields;
}

std::string field_name(const RawEntry& e) { return e.section.empty() ? e.key : e.section + "." + e.key; }

class Reader {
 public:
  explicit Reader(const RawConfig& raw) : raw_(raw) {}

  [[noreturn]] void fail(const RawEntry* e, const std::string& field, const std::string& what) const {
    std::string where = raw_.source;
    if (e && e->line > 0) where += ":" + std::to_string(e->line);
    if (e && e->line == 0) where += ": override";
    raise(ErrorKind::ConfigError, where + ": field '" + field + "': " + what);
  }

  const RawEntry* entry(const std::string& section, const std::string& key) const { return raw_.find(section, key); }

  std::optional<std::string> text(const std::string& section, const std::string& key) const {
    const RawEntry* e = entry(section, key);
    if (!e) return std::nullopt;
    return e->value;
  }

  std::optional<double> number(const std::string& section, const std::string& key) const {
    const RawEntry* e = entry(section, key);
    if (!e) return std::nullopt;
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(e->value.c_str(), &end);
    if (e->value.empty() || *end != '\0' || errno == ERANGE || !std::isfinite(v)) {
      fail(e, field_name(*e), "expected a finite number, got '" + e->value + "'");
    }
    return v;
  }

  std::optional<long long> integer(const std::string& section, const std::string& key) const {
    const RawEntry* e = entry(section, key);
    if (!e) return std::nullopt;
    errno = 0;
    char* end = nullptr;
    const long long v = std::strtoll(e->value.c_str(), &end, 10);
    if (e->value.empty() || *end != '\0' || errno == ERANGE) {
      fail(e, field_name(*e), "expected an integer, got '" + e->value + "'");
    }
    return v;
  }

  std::optional<bool> boolean(const std::string& section, const std::string& key) const {
    const RawEntry* e = entry(section, key);
    if (!e) return std::nullopt;
    if (e->value == "true" || e->value == "on" || e->value == "yes") return true;
    if (e->value == "false" || e->value == "off" || e->value == "no") return false;
    fail(e, field_name(*e), "expected true or false, got '" + e->value + "'");
  }

  void require(bool ok, const std::string& section, const std::string& key, const std::string& what) const {
    if (ok) return;
    fail(entry(section, key), section.empty() ? key : section + "." + key, what);
  }

 private:
  const RawConfig& raw_;
};

}  // namespace

void RawConfig::set(const std::string& field, const std::string& value) {
  const auto dot = field.find('.');
  const std::string section = dot == std::string::npos ? "" : field.substr(0, dot);
  const std::string key = dot == std::string::npos ? field : field.substr(dot + 1);
  for (auto& e : entries) {
    if (e.section == section && e.key == key) {
      e.value = value;
      e.line = 0;
      return;
    }
  }
  entries.push_back({section, key, value, 0});
}

const RawEntry* RawConfig::find(const std::string& section, const std::string& key) const {
  for (const auto& e : entries) {
    if (e.section == section && e.key == key) return &e;
  }
  return nullptr;
}

RawConfig parse_raw(std::istream& in, const std::string& source) {
  RawConfig raw;
  raw.source = source;
  std::string line;
  std::string section;
  int number = 0;
  auto fail = [&](const std::string& what) {
    raise(ErrorKind::ConfigError, source + ":" + std::to_string(number) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail("unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (!known_fields().count(section) || section.empty()) fail("unknown section '" + section + "'");
      continue;
    }
    const auto sp = line.find_first_of(" \t");
    const std::string key = line.substr(0, sp);
    const std::string value = sp == std::string::npos ? "" : trim(line.substr(sp));
    const std::string field = section.empty() ? key : section + "." + key;
    if (!known_fields().at(section).count(key)) fail("field '" + field + "': unknown field");
    if (raw.find(section, key)) fail("field '" + field + "': duplicate field");
    raw.entries.push_back({section, key, value, number});
  }
  return raw;
}

RawConfig load_raw(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(ErrorKind::IoError, "cannot open scenario file " + path);
  return parse_raw(in, path);
}

ModelManifold ScenarioConfig::manifold() const {
  const int d = n + m;
  if (variant == "sphere") return ModelManifold::sphere(d, curvature);
  if (variant == "hyperbolic") return ModelManifold::hyperbolic(d, curvature);
  return ModelManifold::euclidean(d);
}

ScenarioConfig build_config(const RawConfig& raw) {
  for (const auto& e : raw.entries) {
    const auto& known = known_fields();
    const auto it = known.find(e.section);
    if (it == known.end() || !it->second.count(e.key)) {
      Reader(raw).fail(&e, field_name(e), "unknown field");
    }
  }
  const Reader r(raw);
  ScenarioConfig c;
  c.raw = raw;

  c.name = r.text("", "name").value_or("");
  r.require(!c.name.empty(), "", "name", "scenario name is required");
  const auto seed = r.text("", "seed");
  r.require(seed.has_value(), "", "seed", "seed is required (all randomness derives from it)");
  {
    char* end = nullptr;
    errno = 0;
    c.seed = std::strtoull(seed->c_str(), &end, 10);
    r.require(!seed->empty() && *end == '\0' && errno != ERANGE && seed->front() != '-', "", "seed",
              "expected an unsigned 64-bit integer, got '" + *seed + "'");
  }
  c.budget_seconds = r.number("", "budget_seconds").value_or(600.0);
  r.require(c.budget_seconds > 0.0, "", "budget_seconds", "must be positive");

  c.variant = r.text("manifold", "variant").value_or("euclidean");
  r.require(c.variant == "euclidean" || c.variant == "sphere" || c.variant == "hyperbolic", "manifold", "variant",
            "expected euclidean, sphere or hyperbolic, got '" + c.variant + "'");
  c.n = static_cast<int>(r.integer("manifold", "n").value_or(2));
  c.m = static_cast<int>(r.integer("manifold", "m").value_or(2));
  r.require(c.n >= 2, "manifold", "n", "n must be at least 2");
  r.require(c.n == 2, "manifold", "n", "only two-dimensional charts are built in");
  r.require(c.m >= 1, "manifold", "m", "m must be at least 1");
  c.lift = r.boolean("manifold", "lift").value_or(false);
  r.require(c.m >= 2 || c.lift, "manifold", "m", "m = 1 requires lift true");
  const double default_k = c.variant == "sphere" ? 1.0 : c.variant == "hyperbolic" ? -1.0 : 0.0;
  c.curvature = r.number("manifold", "curvature").value_or(default_k);
  if (c.variant == "sphere") r.require(c.curvature > 0.0, "manifold", "curvature", "sphere curvature must be positive");
  if (c.variant == "hyperbolic") {
    r.require(c.curvature < 0.0, "manifold", "curvature", "hyperbolic curvature must be negative");
  }
  if (c.variant == "euclidean") r.require(c.curvature == 0.0, "manifold", "curvature", "must be 0 for euclidean");

  const std::string kind = r.text("chart", "kind").value_or("flat_disk");
  try {
    c.chart.kind = chart_kind_from_name(kind);
  } catch (const Error&) {
    r.require(false, "chart", "kind", "unknown chart '" + kind + "'");
  }
  c.chart.radius = r.number("chart", "radius").value_or(1.0);
  r.require(c.chart.radius > 0.0, "chart", "radius", "must be positive");
  c.resolution.radial_cells = static_cast<int>(r.integer("chart", "resolution").value_or(24));
  r.require(c.resolution.radial_cells >= 2, "chart", "resolution", "must be at least 2");
  c.resolution.angular_cells = static_cast<int>(r.integer("chart", "angular").value_or(0));
  r.require(c.resolution.angular_cells >= 0, "chart", "angular", "must be nonnegative");
  if (const auto h = r.text("chart", "height")) {
    std::istringstream ss(*h);
    double v[5];
    int k = 0;
    while (k < 5 && ss >> v[k]) ++k;
    std::string rest;
    r.require(k == 5 && !(ss >> rest), "chart", "height", "expected five numbers a11 a12 a22 b1 b2");
    c.chart.height = {v[0], v[1], v[2], v[3], v[4]};
  }

  c.f = r.text("field", "f").value_or("1");
  try {
    (void)Expression::parse(c.f);
  } catch (const Error& e) {
    r.require(false, "field", "f", e.what());
  }

  if (const auto kind_text = r.text("checks", "inequality")) {
    if (*kind_text != "none") {
      try {
        c.inequality = inequality_kind_from_name(*kind_text);
      } catch (const Error&) {
        r.require(false, "checks", "inequality", "unknown variant '" + *kind_text + "'");
      }
    }
  }
  DomainKind default_domain = DomainKind::AnnulusAroundSigma;
  if (c.inequality == InequalityKind::ClosedPositive) default_domain = DomainKind::WholeManifold;
  if (c.inequality == InequalityKind::PositiveTube) default_domain = DomainKind::ComplementOfTube;
  if (c.inequality == InequalityKind::NegativeLocal) default_domain = DomainKind::GeodesicBall;
  if (const auto dv = r.text("domain", "variant")) {
    try {
      c.domain.kind = domain_kind_from_name(*dv);
    } catch (const Error&) {
      r.require(false, "domain", "variant", "unknown variant '" + *dv + "'");
    }
  } else {
    c.domain.kind = default_domain;
  }
  c.domain.sigma = r.number("domain", "sigma").value_or(0.5);
  r.require(c.domain.sigma > 0.0 && c.domain.sigma < 1.0, "domain", "sigma", "must satisfy 0 < sigma < 1");
  c.domain.r = r.number("domain", "r").value_or(1.0);
  r.require(c.domain.r > 0.0, "domain", "r", "must be positive");
  c.domain.eps = r.number("domain", "eps").value_or(0.1);
  r.require(c.domain.eps > 0.0, "domain", "eps", "must be positive");
  c.domain_samples = static_cast<int>(r.integer("domain", "samples").value_or(1000));
  r.require(c.domain_samples >= 1, "domain", "samples", "must be positive");
  c.domain.volume_samples = static_cast<int>(r.integer("domain", "volume_samples").value_or(100000));
  r.require(c.domain.volume_samples >= 1, "domain", "volume_samples", "must be positive");

  const std::string solver = r.text("transport", "solver").value_or("exact");
  r.require(solver == "exact" || solver == "entropic", "transport", "solver",
            "expected exact or entropic, got '" + solver + "'");
  c.solver = solver == "exact" ? SolverChoice::Exact : SolverChoice::Entropic;
  c.regularization = r.number("transport", "regularization").value_or(0.0);
  r.require(c.regularization >= 0.0, "transport", "regularization", "must be nonnegative (0 selects the default)");
  c.entropic_max_iter = static_cast<int>(r.integer("transport", "max_iter").value_or(20000));
  r.require(c.entropic_max_iter >= 1, "transport", "max_iter", "must be positive");
  c.transport_resolution = static_cast<int>(r.integer("transport", "resolution").value_or(8));
  r.require(c.transport_resolution >= 2, "transport", "resolution", "must be at least 2");
  c.caps.max_sources = static_cast<int>(r.integer("transport", "max_sources").value_or(500));
  c.caps.max_targets = static_cast<int>(r.integer("transport", "max_targets").value_or(2000));
  r.require(c.caps.max_sources >= 1, "transport", "max_sources", "must be positive");
  r.require(c.caps.max_targets >= 1, "transport", "max_targets", "must be positive");
  c.certify_tol = r.number("transport", "certify_tol").value_or(1e-8);
  r.require(c.certify_tol > 0.0, "transport", "certify_tol", "must be positive");

  c.tangency = r.boolean("checks", "tangency").value_or(false);
  c.fiber_mass = r.boolean("checks", "fiber_mass").value_or(false);
  c.semiconcavity = r.boolean("checks", "semiconcavity").value_or(false);
  c.jacobi = r.boolean("checks", "jacobi").value_or(false);
  c.ibp = r.boolean("checks", "ibp").value_or(false);
  c.report_tol = r.number("checks", "report_tol").value_or(0.02);
  r.require(c.report_tol >= 0.0, "checks", "report_tol", "must be nonnegative");
  c.theta = r.number("checks", "theta");
  if (c.theta) r.require(*c.theta > 0.0 && *c.theta <= 1.0, "checks", "theta", "must lie in (0, 1]");
  c.k1 = r.number("checks", "k1");
  c.k2 = r.number("checks", "k2");
  c.jacobi_atoms = static_cast<int>(r.integer("checks", "jacobi_atoms").value_or(200));
  r.require(c.jacobi_atoms >= 1, "checks", "jacobi_atoms", "must be positive");
  c.jacobi_steps = static_cast<int>(r.integer("checks", "jacobi_steps").value_or(1000));
  r.require(c.jacobi_steps >= 100, "checks", "jacobi_steps", "must be at least 100");
  c.tangency_tol = r.number("checks", "tangency_tol").value_or(1.0);
  r.require(c.tangency_tol > 0.0, "checks", "tangency_tol", "must be positive");
  c.semiconcavity_slack = r.number("checks", "semiconcavity_slack").value_or(0.05);
  r.require(c.semiconcavity_slack >= 0.0, "checks", "semiconcavity_slack", "must be nonnegative");

  c.out_dir = r.text("output", "dir").value_or("out");
  c.format = r.text("output", "format").value_or("json");
  r.require(c.format == "json" || c.format == "csv", "output", "format", "expected json or csv");
  return c;
}

std::vector<std::pair<std::string, std::string>> config_echo(const ScenarioConfig& config) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& [section, keys] : known_fields()) {
    for (const auto& key : keys) {
      if (section == "output" && key == "dir") continue;  // output location must not change the report
      if (const RawEntry* e = config.raw.find(section, key)) {
        out.emplace_back(section.empty() ? key : section + "." + key, e->value);
      }
    }
  }
  return out;
}

}  // namespace otlab::tools
