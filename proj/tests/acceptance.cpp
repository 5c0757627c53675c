// Acceptance run: one PASS/FAIL line per criterion. Exit status is the number
// of failed criteria (capped at 1).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "otlab/error.hpp"
#include "otlab/geometry.hpp"
#include "otlab/inequalities.hpp"
#include "otlab/jacobi.hpp"
#include "otlab/submanifold.hpp"
#include "otlab/transport.hpp"
#include "otlab_tools/config.hpp"
#include "otlab_tools/runner.hpp"

#ifndef OTLAB_SCENARIO_DIR
#define OTLAB_SCENARIO_DIR "scenarios"
#endif

using namespace otlab;
using namespace otlab::tools;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

int g_failed = 0;

void verdict(int id, bool ok, const std::string& detail) {
  if (!ok) ++g_failed;
  std::printf("%s criterion %d: %s\n", ok ? "PASS" : "FAIL", id, detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

const CheckResult* find_check(const RunReport& r, const std::string& name) {
  for (const auto& c : r.checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

double metric(const RunReport& r, const std::string& check, const std::string& key) {
  const CheckResult* c = find_check(r, check);
  if (!c) return std::nan("");
  for (const auto& [k, v] : c->metrics) {
    if (k == key) return v;
  }
  return std::nan("");
}

ScenarioConfig load(const std::string& name) {
  return build_config(load_raw((fs::path(OTLAB_SCENARIO_DIR) / (name + ".scn")).string()));
}

struct Timed {
  RunReport report;
  double seconds = 0.0;
};

// Every bundled scenario, run once; later criteria read these reports.
std::map<std::string, Timed> g_runs;

void criterion_2() {
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(OTLAB_SCENARIO_DIR)) {
    if (e.path().extension() == ".scn") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  double total = 0.0, worst = 0.0;
  std::string worst_name, errors;
  bool ok = !files.empty();
  for (const auto& p : files) {
    const auto start = Clock::now();
    try {
      Timed t;
      t.report = run_scenario(build_config(load_raw(p.string())));
      t.seconds = seconds_since(start);
      total += t.seconds;
      const double ratio = t.report.inequality ? t.report.inequality->ratio : std::nan("");
      if (!(ratio <= 1.02)) ok = false;
      if (ratio > worst) worst = ratio, worst_name = p.stem().string();
      g_runs[p.stem().string()] = std::move(t);
    } catch (const Error& e) {
      ok = false;
      errors += " " + p.stem().string() + " (" + e.what() + ")";
      total += seconds_since(start);
    }
  }
  ok = ok && total <= 600.0;
  verdict(2, ok, fmt("%zu scenarios, max ratio %.6f (%s), total %.1f s (limit 1.02, 600 s)%s", files.size(), worst,
                     worst_name.c_str(), total, errors.c_str()));
}

void criterion_1() {
  const auto it = g_runs.find("flat_disk_sharp");
  if (it == g_runs.end()) return verdict(1, false, "flat_disk_sharp did not run");
  const ScenarioConfig c = load("flat_disk_sharp");
  const SubmanifoldMesh mesh = build_submanifold(c.manifold(), c.chart, c.resolution);
  const double ratio = it->second.report.inequality->ratio;
  const bool ok = mesh.size() >= 10000 && std::abs(ratio - 1.0) <= 0.02 && it->second.seconds <= 60.0;
  verdict(1, ok, fmt("flat disk ratio %.8f with %d nodes in %.2f s (limit 1 +- 0.02, >= 10000 nodes, 60 s)", ratio,
                     mesh.size(), it->second.seconds));
}

NodeGeometry flat_node(const ModelManifold& M) {
  NodeGeometry g;
  g.point = M.origin();
  for (int i = 0; i < 2; ++i) g.tangent.push_back(M.origin_direction(i));
  for (int i = 2; i < 4; ++i) g.normal.push_back(M.origin_direction(i));
  g.sff.assign(2, Matrix::Zero(2, 2));
  g.mean_curvature = Vector::Zero(M.embedding_dim());
  return g;
}

void criterion_3() {
  // P = diag(c, c, s, t) along w = L nu_4 with Hess = 0: c and s are the
  // cos/sin, cosh/sinh or 1/t pairs of curvature K |w|^2.
  const double L = 1.2;
  double worst = 0.0, slowest = 0.0, drift = 0.0;
  for (const double K : {1.0, -1.0, 0.0}) {
    const ModelManifold M = K > 0   ? ModelManifold::sphere(4, K)
                            : K < 0 ? ModelManifold::hyperbolic(4, K)
                                    : ModelManifold::euclidean(4);
    const NodeGeometry g = flat_node(M);
    const Vector w = L * g.normal[1];
    const auto init = initial_conditions(M, g, w, Matrix::Zero(2, 2), Vector::Zero(M.embedding_dim()));
    const auto start = Clock::now();
    const auto traj = propagate(M, build_parallel_frame(M, g.point, w, g.tangent, g.normal, 2), init.P0, init.dP0,
                                1000, 0.0, 0.0);
    slowest = std::max(slowest, seconds_since(start));
    const double s = std::sqrt(std::abs(K)) * L;
    for (std::size_t k = 0; k < traj.t.size(); ++k) {
      const double t = traj.t[k];
      double c = 1.0, sn = t;
      if (K > 0) c = std::cos(s * t), sn = std::sin(s * t) / s;
      if (K < 0) c = std::cosh(s * t), sn = std::sinh(s * t) / s;
      Matrix ref = Matrix::Zero(4, 4);
      ref.diagonal() << c, c, sn, t;
      worst = std::max(worst, (traj.P[k] - ref).cwiseAbs().maxCoeff());
    }
    if (K >= 0) drift = std::max(drift, std::abs(jacobian_bound_check(traj).normalization_limit - 1.0));
  }
  const bool ok = worst <= 1e-8 && drift <= 1e-4 && slowest <= 1.0;
  verdict(3, ok, fmt("closed-form error %.2e, normalization drift %.2e, slowest trajectory %.3f s "
                     "(limits 1e-8, 1e-4, 1 s)", worst, drift, slowest));
}

void criterion_4() {
  bool ok = true;
  std::string detail;
  for (const char* name : {"flat_disk_sharp", "sphere_closed"}) {
    const auto it = g_runs.find(name);
    if (it == g_runs.end()) {
      ok = false;
      detail += std::string(name) + " missing; ";
      continue;
    }
    const RunReport& r = it->second.report;
    const double atoms = metric(r, "jacobi_atoms", "completed");
    const double sym = metric(r, "jacobi_symmetry", "max_residual");
    const double ric = metric(r, "jacobi_riccati", "max_residual");
    const double mono = metric(r, "jacobi_monotonicity", "max_relative_increase");
    const double margin = metric(r, "jacobian_bound", "min_relative_margin");
    ok = ok && atoms >= 200 && sym <= 1e-8 && ric <= 1e-6 && mono <= 1e-6 && margin >= -1e-3;
    detail += fmt("%s: %.0f atoms, symmetry %.1e, Riccati %.1e, det-profile increase %.1e, margin/bound %.2e; ",
                  name, atoms, sym, ric, mono, margin);
  }
  verdict(4, ok, detail + "(limits 200, 1e-8, 1e-6, 1e-6, -1e-3)");
}

void criterion_5() {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  auto weights = [&](int n) {
    std::vector<double> w(n);
    double s = 0.0;
    for (double& x : w) s += (x = 0.5 + U(rng));
    for (double& x : w) x /= s;
    return w;
  };
  auto cloud = [&](int n) {
    std::vector<Vector> pts;
    for (int i = 0; i < n; ++i) pts.push_back(Vector::NullaryExpr(4, [&](Eigen::Index) { return U(rng); }));
    return pts;
  };
  const auto E = ModelManifold::euclidean(4);

  // Exact solver on the largest default-cap instance.
  const auto mu = DiscreteMeasure::make(cloud(300), weights(300));
  const auto nu = DiscreteMeasure::make(cloud(800), weights(800));
  const Matrix C = cost_matrix(E, mu, nu);
  const auto exact = solve_exact(mu.weights, nu.weights, C);
  const auto cert = certify_support(exact, C, 1e-8, false);

  // Entropic against exact on 50 x 50, regularization 1e-3 mean(C).
  double slowest = 0.0;
  int most_iter = 0;
  double worst_rel = 0.0;
  for (int trial = 0; trial < 3; ++trial) {
    const auto a = DiscreteMeasure::make(cloud(50), weights(50));
    const auto b = DiscreteMeasure::make(cloud(50), weights(50));
    const Matrix C2 = cost_matrix(E, a, b);
    const double ref = solve_exact(a.weights, b.weights, C2).cost;
    EntropicOptions opt;
    opt.regularization = 1e-3 * C2.mean();
    opt.max_iter = 500000;  // near-degenerate plans need a few 1e5 sweeps at this regularization
    const auto t0 = Clock::now();
    const auto ent = solve_entropic(a.weights, b.weights, C2, opt);
    slowest = std::max(slowest, seconds_since(t0));
    most_iter = std::max(most_iter, ent.iterations);
    worst_rel = std::max(worst_rel, ent.converged ? std::abs(ent.cost - ref) / ref : 1.0);
  }
  // The scenario pipelines certify their own plans.
  double scen_marg = 0.0, scen_cert = 0.0;
  for (const auto& [name, t] : g_runs) {
    scen_marg = std::max(scen_marg, metric(t.report, "marginals", "marginal_residual"));
    scen_cert = std::max(scen_cert, metric(t.report, "certification", "worst_violation"));
  }
  const bool ok = exact.marginal_residual <= 1e-9 && cert.worst_violation <= 1e-8 && scen_marg <= 1e-9 &&
                  scen_cert <= 1e-8 && worst_rel <= 1e-3;
  verdict(5, ok, fmt("300x800 marginals %.1e, certification %.1e; scenarios %.1e, %.1e; entropic 50x50 relative "
                     "gap %.1e (%d sweeps, %.2f s) (limits 1e-9, 1e-8, 1e-3)",
                     exact.marginal_residual, cert.worst_violation, scen_marg, scen_cert, worst_rel, most_iter,
                     slowest));
}

void criterion_6() {
  const RawConfig raw = load_raw((fs::path(OTLAB_SCENARIO_DIR) / "flat_disk_annulus.scn").string());
  const auto points = run_sweep(raw, parse_grid("transport.resolution=3,6,12"), std::nullopt);
  std::vector<double> medians;
  for (const auto& p : points) medians.push_back(metric(p.report, "tangency", "median"));
  bool ok = medians.size() == 3;
  std::string detail = "medians";
  for (double m : medians) detail += fmt(" %.5f", m);
  detail += ", ratios";
  for (std::size_t k = 1; k < medians.size(); ++k) {
    const double r = medians[k] / medians[k - 1];
    ok = ok && r <= 0.75;
    detail += fmt(" %.3f", r);
  }
  verdict(6, ok, detail + " per halving (limit 0.75)");
}

void criterion_7() {
  const ScenarioConfig c = load("sphere_closed");
  const ModelManifold M = c.manifold();
  const SubmanifoldMesh mesh = build_submanifold(M, c.chart, c.resolution);
  const ScalarField f = ScalarField::constant(mesh, 1.0);
  InequalityParams p;
  p.kind = InequalityKind::ClosedPositive;
  const double closed = evaluate_inequality(M, mesh, f, p).ratio;
  p.kind = InequalityKind::PositiveTube;
  std::string detail = fmt("closed %.6f; tube", closed);
  double last = 0.0;
  bool shrinking = true;
  double prev = 1e300;
  for (const double eps : {0.2, 0.05, 0.0125, 0.003}) {
    p.eps = eps;
    const double gap = std::abs(evaluate_inequality(M, mesh, f, p).ratio - closed);
    shrinking = shrinking && gap <= prev;
    prev = last = gap;
    detail += fmt(" eps %.4f gap %.2e;", eps, gap);
  }
  verdict(7, shrinking && last <= 1e-3, detail + " (limit 1e-3)");
}

void criterion_8() {
  const auto M = ModelManifold::euclidean(4);
  const NodeGeometry g = flat_node(M);
  const Vector zero = Vector::Zero(4);
  const auto init = initial_conditions(M, g, zero, -Matrix::Identity(2, 2), zero);
  const auto traj = propagate(M, build_parallel_frame(M, g.point, zero, g.tangent, g.normal, 2), init.P0, init.dP0,
                              1000, -2.0, 0.0);
  const auto jb = jacobian_bound_check(traj);
  const bool ok = std::abs(jb.det_end - 4.0) <= 1e-9 && std::abs(jb.bound - 4.0) <= 1e-9;
  verdict(8, ok, fmt("det P(1) = %.12f, bound = %.12f (target 4, limit 1e-9)", jb.det_end, jb.bound));
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void criterion_9() {
  const fs::path root = fs::temp_directory_path() / "otlab_acceptance_rerun";
  fs::remove_all(root);
  bool ok = true;
  int files = 0;
  for (const char* format : {"json", "csv"}) {
    const ScenarioConfig c = load("flat_disk_annulus");
    const fs::path a = root / format / "a", b = root / format / "b";
    emit_report(run_scenario(c), a.string(), format);
    emit_report(run_scenario(c), b.string(), format);
    for (const auto& e : fs::directory_iterator(a)) {
      if (e.path().filename() == "timings.csv") continue;  // wall clock, by design
      ++files;
      ok = ok && fs::exists(b / e.path().filename()) && slurp(e.path()) == slurp(b / e.path().filename());
    }
  }
  fs::remove_all(root);
  verdict(9, ok && files > 0, fmt("%d report files compared across two runs in json and csv", files));
}

}  // namespace

int main() {
  const auto start = Clock::now();
  auto guarded = [](int id, auto&& fn) {
    try {
      fn();
    } catch (const std::exception& e) {
      verdict(id, false, std::string("threw ") + e.what());
    }
  };
  guarded(2, criterion_2);
  guarded(1, criterion_1);
  guarded(3, criterion_3);
  guarded(4, criterion_4);
  guarded(5, criterion_5);
  guarded(6, criterion_6);
  guarded(7, criterion_7);
  guarded(8, criterion_8);
  guarded(9, criterion_9);
  std::printf("%d of 9 criteria failed, %.1f s\n", g_failed, seconds_since(start));
  return g_failed == 0 ? 0 : 1;
}
