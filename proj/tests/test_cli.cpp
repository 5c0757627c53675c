#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "otlab/error.hpp"
#include "otlab_tools/config.hpp"
#include "otlab_tools/expression.hpp"
#include "otlab_tools/runner.hpp"

using namespace otlab;
using namespace otlab::tools;
namespace fs = std::filesystem;

namespace {

const char* kSmall = R"(# small flat run
name small
seed 5

[manifold]
variant euclidean
n 2
m 2

[chart]
kind flat_disk
radius 1
resolution 12

[field]
f 1 + 0.5*u1^2

[domain]
variant annulus
sigma 0.5
r 3
samples 300

[transport]
solver exact
resolution 4

[checks]
inequality nonneg_limit
tangency true
fiber_mass true
semiconcavity true
jacobi true
ibp true
jacobi_atoms 20
jacobi_steps 200
)";

RawConfig raw_from(const std::string& text) {
  std::istringstream in(text);
  return parse_raw(in, "test.scn");
}

std::string config_error(const std::string& text) {
  try {
    build_config(raw_from(text));
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ConfigError);
    return e.what();
  }
  return "";
}

std::string replace(std::string text, const std::string& from, const std::string& to) {
  const auto at = text.find(from);
  REQUIRE(at != std::string::npos);
  return text.replace(at, from.size(), to);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("expressions: values and exact gradients") {
  const auto e = Expression::parse("1 + 0.5*u1^2 - u2*exp(0.5*u1 - 0.3*u2)");
  const Eigen::Vector2d u(0.3, -0.7);
  const double ex = std::exp(0.5 * u[0] - 0.3 * u[1]);
  const auto vg = e.eval(u);
  CHECK(vg.value == doctest::Approx(1 + 0.5 * u[0] * u[0] - u[1] * ex).epsilon(1e-15));
  CHECK(vg.grad[0] == doctest::Approx(u[0] - 0.5 * u[1] * ex).epsilon(1e-15));
  CHECK(vg.grad[1] == doctest::Approx(-ex + 0.3 * u[1] * ex).epsilon(1e-15));
  CHECK_FALSE(e.is_constant());
  CHECK(Expression::parse("2*(3 - 1)").is_constant());
  CHECK(Expression::parse("-u1^3").value(Eigen::Vector2d(2, 0)) == -8.0);
  CHECK(Expression::parse("--u2").gradient(Eigen::Vector2d(0, 0))[1] == 1.0);

  // Central differences as an independent check of the gradient.
  const double h = 1e-6;
  const double d0 = (e.value(u + Eigen::Vector2d(h, 0)) - e.value(u - Eigen::Vector2d(h, 0))) / (2 * h);
  CHECK(std::abs(d0 - vg.grad[0]) <= 1e-8);

  for (const char* bad : {"", "1 +", "u3", "exp 1", "(u1", "u1^x", "1 / u1", "sin(u1)"}) {
    INFO("expression '" << bad << "'");
    CHECK_THROWS_AS(Expression::parse(bad), Error);
  }
  try {
    Expression::parse("1 + u7");
  } catch (const Error& e2) {
    CHECK(e2.kind() == ErrorKind::ConfigError);
    CHECK(std::string(e2.what()).find("column") != std::string::npos);
  }
}

TEST_CASE("scenario config validation") {
  const auto ok = build_config(raw_from(kSmall));
  CHECK(ok.name == "small");
  CHECK(ok.seed == 5);
  CHECK(ok.domain.sigma == 0.5);
  CHECK(ok.jacobi_atoms == 20);

  const std::string sigma = config_error(replace(kSmall, "sigma 0.5", "sigma 1.0"));
  CHECK(sigma.find("domain.sigma") != std::string::npos);
  CHECK(sigma.find("test.scn") != std::string::npos);
  CHECK(config_error(replace(kSmall, "seed 5\n", "")).find("seed") != std::string::npos);
  CHECK(config_error(replace(kSmall, "seed 5\n", "seed 5\nseed 6\n")).find("seed") != std::string::npos);
  CHECK(config_error(replace(kSmall, "[field]", "[field]\ncolour red")).find("colour") != std::string::npos);
  CHECK(config_error(replace(kSmall, "m 2", "m 1")).find("lift") != std::string::npos);
  CHECK(config_error(replace(kSmall, "f 1 + 0.5*u1^2", "f 1 + ")).find("field.f") != std::string::npos);
  CHECK(config_error(replace(kSmall, "[chart]", "[chartt]")) != "");
  CHECK(config_error(replace(kSmall, "resolution 12", "resolution twelve")).find("chart.resolution") !=
        std::string::npos);

  // Overrides replace in place.
  auto raw = raw_from(kSmall);
  raw.set("domain.sigma", "0.25");
  CHECK(build_config(raw).domain.sigma == 0.25);
  raw.set("seed", "9");
  CHECK(build_config(raw).seed == 9);
  const auto echo = config_echo(build_config(raw));
  CHECK_FALSE(echo.empty());
}

TEST_CASE("runner: determinism, series length and exit codes") {
  const auto config = build_config(raw_from(kSmall));
  const RunReport a = run_scenario(config);
  REQUIRE(a.inequality);
  CHECK(a.inequality->ratio <= 1.02);
  CHECK(a.failures() == 0);
  CHECK(exit_code(a, false) == 0);
  bool has_profile = false;
  for (const auto& s : a.series) {
    if (s.name == "det_profile") {
      has_profile = true;
      CHECK(static_cast<int>(s.rows.size()) == config.jacobi_steps - 10);
    }
  }
  CHECK(has_profile);

  const fs::path root = fs::temp_directory_path() / "otlab_cli_test";
  fs::remove_all(root);
  emit_report(a, (root / "a").string(), "json");
  emit_report(run_scenario(config), (root / "b").string(), "json");
  const std::string first = slurp(root / "a" / "report.jsonl");
  CHECK_FALSE(first.empty());
  CHECK(first == slurp(root / "b" / "report.jsonl"));
  CHECK(fs::exists(root / "a" / "timings.csv"));
  emit_report(a, (root / "c").string(), "csv");
  CHECK(fs::exists(root / "c" / "inequality.csv"));
  CHECK(fs::exists(root / "c" / "checks.csv"));
  fs::remove_all(root);

  RunReport failing = a;
  failing.checks.push_back({"fake", CheckLevel::Theorem, Verdict::Fail, {}});
  CHECK(exit_code(failing, false) == 1);
  RunReport warning = a;
  warning.checks.push_back({"fake", CheckLevel::Check, Verdict::Warn, {}});
  CHECK(exit_code(warning, false) == 0);
  CHECK(exit_code(warning, true) == 1);
}

TEST_CASE("sweep grids") {
  const auto g = parse_grid("transport.resolution=3,6,12");
  CHECK(g.field == "transport.resolution");
  REQUIRE(g.values.size() == 3);
  CHECK(g.values[2] == "12");
  for (const char* bad : {"transport.resolution", "=3,4", "transport.resolution=", "a.b=1,,2"}) {
    INFO("grid '" << bad << "'");
    CHECK_THROWS_AS(parse_grid(bad), Error);
  }
  auto raw = raw_from(kSmall);
  raw.set("checks.jacobi", "false");
  const auto points = run_sweep(raw, parse_grid("chart.radius=0.5,1"), std::nullopt);
  REQUIRE(points.size() == 2);
  CHECK(points[0].value == "0.5");
  CHECK(points[1].value == "1");
  // The grid value reaches the chart: the boundary length is 2 pi rho.
  CHECK(points[0].report.inequality->terms.boundary_length == doctest::Approx(3.14159265358979).epsilon(1e-10));
  CHECK(points[1].report.inequality->terms.boundary_length == doctest::Approx(6.28318530717959).epsilon(1e-10));
}
