#include "otlab_tools/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "json.hpp"

#include "otlab/error.hpp"
#include "otlab/jacobi.hpp"
#include "otlab/transport.hpp"
#include "otlab_tools/expression.hpp"

namespace otlab::tools {

namespace {

using Clock = std::chrono::steady_clock;

constexpr double kInf = std::numeric_limits<double>::infinity();

// Runs one stage; module errors keep their kind and gain the stage name.
template <typename F>
auto stage(RunReport& report, const std::string& name, F&& body) {
  const auto start = Clock::now();
  auto record = [&] {
    report.timings.push_back({name, std::chrono::duration<double>(Clock::now() - start).count()});
  };
  try {
    if constexpr (std::is_void_v<decltype(body())>) {
      body();
      record();
    } else {
      auto out = body();
      record();
      return out;
    }
  } catch (const Error& e) {
    throw Error(e.kind(), "stage '" + name + "': " + e.what());
  }
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

nlohmann::ordered_json json_number(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);  // json has no inf/nan
}

ScalarField make_field(const SubmanifoldMesh& mesh, const Expression& f) {
  return ScalarField::from_function(
      mesh, [f](const Param& u) { return f.value(u); }, [f](const Param& u) { return f.gradient(u); });
}

SubmanifoldMesh build_mesh(const ScenarioConfig& c, const ModelManifold& M, const Resolution& res) {
  SubmanifoldMesh mesh = build_submanifold(M, c.chart, res);
  if (mesh.m == 1 && c.lift) return lift_mesh(mesh);
  return mesh;
}

struct JacobiAggregate {
  int attempted = 0;
  int completed = 0;
  std::map<std::string, int> errors;
  double symmetry = 0.0;
  double q_symmetry = 0.0;
  double riccati = 0.0;
  double max_increase = -kInf;
  double min_bound_margin = kInf;  // relative to the bound
  double worst_q1 = -kInf;
  double worst_q3 = -kInf;
  double cs_q1 = -kInf;
  double cs_q3 = -kInf;
  double min_det_margin = kInf;
  int envelope_skipped = 0;
  int lap_violations = 0;
  int trace_failures = 0;
};

CheckResult make_check(const std::string& name, CheckLevel level, bool ok,
                       std::vector<std::pair<std::string, double>> metrics) {
  CheckResult r;
  r.name = name;
  r.level = level;
  r.verdict = ok ? Verdict::Pass : (level == CheckLevel::Theorem ? Verdict::Fail : Verdict::Warn);
  r.metrics = std::move(metrics);
  return r;
}

}  // namespace

std::string verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "pass";
    case Verdict::Warn: return "warn";
    case Verdict::Fail: return "fail";
  }
  return "unknown";
}

int RunReport::failures() const {
  return static_cast<int>(std::count_if(checks.begin(), checks.end(),
                                        [](const CheckResult& c) { return c.verdict == Verdict::Fail; }));
}

int RunReport::warnings() const {
  return static_cast<int>(std::count_if(checks.begin(), checks.end(),
                                        [](const CheckResult& c) { return c.verdict == Verdict::Warn; }));
}

int exit_code(const RunReport& report, bool strict) {
  if (report.failures() > 0) return 1;
  if (strict && report.warnings() > 0) return 1;
  return 0;
}

RunReport run_scenario(const ScenarioConfig& c) {
  RunReport report;
  report.name = c.name;
  report.seed = c.seed;
  report.config = config_echo(c);

  const Expression f_expr = Expression::parse(c.f);
  const ModelManifold M0 = c.manifold();
  const ModelManifold M = (c.m == 1 && c.lift) ? ModelManifold::product_with_line(M0) : M0;
  const std::uint64_t domain_seed = derive_seed(c.seed, 0);

  const SubmanifoldMesh mesh = stage(report, "mesh", [&] { return build_mesh(c, M0, c.resolution); });
  const ScalarField f = stage(report, "field", [&] { return make_field(mesh, f_expr); });

  const bool transport_needed = c.tangency || c.fiber_mass || c.semiconcavity || c.jacobi || c.ibp;
  std::optional<TargetDomain> domain;
  if (transport_needed || (c.inequality && (*c.inequality == InequalityKind::NonNegFinite ||
                                             *c.inequality == InequalityKind::PositiveTube))) {
    domain = stage(report, "domain",
                   [&] { return build_target_domain(M, mesh, c.domain, c.domain_samples, domain_seed); });
  }

  if (c.inequality) {
    stage(report, "inequality", [&] {
      InequalityParams p;
      p.kind = *c.inequality;
      p.theta = c.theta;
      p.sigma = c.domain.sigma;
      p.r = c.domain.r;
      p.eps = c.domain.eps;
      p.k1 = c.k1;
      p.k2 = c.k2;
      p.center = c.domain.center;
      p.lift = c.lift;
      p.report_tol = c.report_tol;
      p.volume_samples = c.domain.volume_samples;
      p.domain_samples = c.domain_samples;
      p.seed = domain_seed;
      const TargetDomain* dom = nullptr;
      if (domain) {
        const DomainKind k = domain->spec.kind;
        const bool matches = (p.kind == InequalityKind::NonNegFinite && k == DomainKind::AnnulusAroundSigma) ||
                             (p.kind == InequalityKind::PositiveTube && k == DomainKind::ComplementOfTube) ||
                             (p.kind == InequalityKind::NegativeLocal && k == DomainKind::GeodesicBall);
        if (matches) dom = &*domain;
      }
      // The mesh is already lifted when m = 1; evaluate in the lifted ambient.
      report.inequality = evaluate_inequality(M, mesh, f, p, dom);
      const InequalityReport& ir = *report.inequality;
      report.checks.push_back(make_check("inequality", CheckLevel::Theorem, ir.passed,
                                         {{"lhs", ir.lhs}, {"rhs", ir.rhs}, {"ratio", ir.ratio},
                                          {"report_tol", ir.params.report_tol}}));
    });
  }

  if (!transport_needed) return report;

  // Transport runs on a coarser mesh of the same surface.
  const SubmanifoldMesh tmesh = stage(report, "transport_mesh", [&] {
    Resolution res{c.transport_resolution, 0};
    return build_mesh(c, M0, res);
  });
  const ScalarField tf = make_field(tmesh, f_expr);
  const double q = static_cast<double>(tmesh.n) / (tmesh.n - 1);
  const std::vector<Vector>& targets = domain->samples;

  Matrix C;
  const DiscreteCoupling coupling = stage(report, "transport", [&] {
    std::vector<Vector> src;
    std::vector<double> mu;
    for (int i = 0; i < tmesh.size(); ++i) {
      src.push_back(tmesh.nodes[i].geometry.point);
      mu.push_back(tmesh.nodes[i].weight * std::pow(tf.values[i], q));
    }
    const DiscreteMeasure source = DiscreteMeasure::make(src, mu, Provenance::SubmanifoldNodes);
    const DiscreteMeasure target = DiscreteMeasure::make(targets, domain->weights, Provenance::DomainSamples);
    if (source.size() != tmesh.size()) raise(ErrorKind::NonPositiveField, "zero source weight");
    C = cost_matrix(M, source, target);
    if (c.solver == SolverChoice::Exact) return solve_exact(source.weights, target.weights, C, c.caps);
    EntropicOptions opt;
    opt.regularization = c.regularization;
    opt.max_iter = c.entropic_max_iter;
    return solve_entropic(source.weights, target.weights, C, opt);
  });

  const CertificationReport cert = stage(report, "certification", [&] {
    return certify_support(coupling, C, c.certify_tol, false);
  });
  const double marginal_tol = c.solver == SolverChoice::Exact ? 1e-9 : 1e-6;
  report.checks.push_back(make_check("marginals", CheckLevel::Check, coupling.marginal_residual <= marginal_tol,
                                     {{"marginal_residual", coupling.marginal_residual},
                                      {"duality_gap", coupling.duality_gap},
                                      {"cost", coupling.cost},
                                      {"sources", static_cast<double>(coupling.sources())},
                                      {"targets", static_cast<double>(coupling.targets())},
                                      {"atoms", static_cast<double>(coupling.plan.size())}}));
  report.checks.push_back(make_check("certification", CheckLevel::Theorem, cert.passed,
                                     {{"worst_violation", cert.worst_violation},
                                      {"tolerance", cert.tolerance},
                                      {"atoms_checked", static_cast<double>(cert.atoms_checked)}}));

  const std::vector<double> phi(cert.phi.data(), cert.phi.data() + cert.phi.size());
  const PotentialGradient pg = stage(report, "potential_gradient",
                                     [&] { return potential_gradient_on_sigma(tmesh, phi, targets); });
  std::optional<FiberReconstruction> fiber;
  if (c.tangency || c.fiber_mass) {
    fiber = stage(report, "tangency", [&] { return tangency_residuals(M, tmesh, coupling, targets, pg.gradient); });
  }
  if (c.tangency) {
    const double h = tmesh.spacing;
    report.checks.push_back(make_check("tangency", CheckLevel::Check, fiber->median <= c.tangency_tol * h,
                                       {{"median", fiber->median},
                                        {"p90", fiber->p90},
                                        {"max", fiber->max},
                                        {"spacing", h},
                                        {"median_over_spacing", fiber->median / h},
                                        {"max_normal_leak", fiber->max_normal_leak},
                                        {"flagged_gradients", static_cast<double>(pg.flagged_count)}}));
  }
  if (c.fiber_mass) {
    const FiberMassReport fm =
        stage(report, "fiber_mass", [&] { return fiber_mass_residual(tmesh, coupling, *fiber, domain->volume.value); });
    double proxy_max = 0.0;
    for (double p : fm.proxy) proxy_max = std::max(proxy_max, p);
    report.checks.push_back(make_check("fiber_mass", CheckLevel::Check, fm.max_residual <= marginal_tol,
                                       {{"max_residual", fm.max_residual}, {"max_volume_proxy", proxy_max}}));
  }
  if (c.semiconcavity) {
    const double k_lower = M.base_variant() == Variant::Euclidean ? 0.0 : M.curvature();
    const SemiconcavityReport sc = stage(report, "semiconcavity", [&] {
      return semiconcavity_check(M, tmesh, coupling, targets, cert.phi_c, k_lower, c.semiconcavity_slack);
    });
    report.checks.push_back(make_check("semiconcavity", CheckLevel::Check, sc.passed,
                                       {{"worst_margin", sc.worst_margin},
                                        {"max_second_difference", sc.max_second_difference},
                                        {"checks", static_cast<double>(sc.checks)}}));
  }

  std::vector<Matrix> hess;
  if (c.jacobi || c.ibp) hess = stage(report, "hessian", [&] { return least_squares_hessian(tmesh, phi); });

  if (c.jacobi) {
    JacobiAggregate agg;
    stage(report, "jacobi", [&] {
      const double floor = coupling.atom_floor();
      std::vector<const PlanEntry*> atoms;
      for (const auto& a : coupling.plan) {
        if (a.mass > floor) atoms.push_back(&a);
      }
      const int count = std::min<int>(c.jacobi_atoms, static_cast<int>(atoms.size()));
      const bool nonneg_curvature = M.base_variant() != Variant::Hyperbolic;
      const double K = M.base_variant() == Variant::Euclidean ? 0.0 : M.curvature();
      bool series_done = false;
      for (int k = 0; k < count; ++k) {
        const PlanEntry& a = *atoms[static_cast<std::size_t>(k) * atoms.size() / count];
        ++agg.attempted;
        try {
          const NodeGeometry& g = tmesh.nodes[a.i].geometry;
          const Vector u = M.log_map(g.point, targets[a.j]);
          Vector v = u;
          for (const auto& e : g.tangent) v -= M.inner(u, e) * e;
          const Vector w = v - pg.gradient[a.i];
          const Matrix hs = 0.5 * (hess[a.i] + hess[a.i].transpose());
          const JacobiInitial init = initial_conditions(M, g, v, hs, pg.gradient[a.i]);
          const ParallelFrame frame = build_parallel_frame(M, g.point, w, g.tangent, g.normal, 2);
          const double hv = M.inner(g.mean_curvature, v);
          const JacobiTrajectory traj = propagate(M, frame, init.P0, init.dP0, c.jacobi_steps, hs.trace(), hv);
          agg.symmetry = std::max(agg.symmetry, traj.symmetry_residual);
          agg.q_symmetry = std::max(agg.q_symmetry, traj.q_symmetry_residual);
          MonotonicityReport mono;
          if (nonneg_curvature) {
            // Both bounds assume nonnegative intermediate Ricci curvature.
            if (!lap_lower_bound_check(traj).passed) ++agg.lap_violations;
            const JacobianBoundReport jb = jacobian_bound_check(traj);
            agg.min_bound_margin = std::min(agg.min_bound_margin, jb.margin / std::max(jb.bound, 1e-300));
            mono = monotonicity_profile(traj);
            agg.max_increase = std::max(agg.max_increase, mono.max_increase);
          }
          std::optional<ComparisonProfile> prof;
          const double speed = M.norm(w);
          try {
            if (M.base_variant() == Variant::Euclidean) {
              prof = comparison_profiles(CurvatureCase::NonNeg, 0.0, 0.0, 0.0, traj.laplacian, hv, traj.n, traj.m);
            } else if (speed > 1e-12) {
              const CurvatureCase cc = K > 0.0 ? CurvatureCase::Positive : CurvatureCase::Negative;
              const double k1 = c.k1.value_or(K);
              const double k2 = c.k2.value_or(K);
              prof = comparison_profiles(cc, k1, k2, speed, traj.laplacian, hv, traj.n, traj.m);
            }
          } catch (const Error& e) {
            if (e.kind() != ErrorKind::ArgOutOfDomain) throw;
          }
          if (prof) {
            const TraceComparisonReport tc = trace_comparison_check(traj, *prof, 1e-6);
            agg.riccati = std::max(agg.riccati, tc.riccati_residual);
            agg.worst_q1 = std::max(agg.worst_q1, tc.worst_q1);
            agg.worst_q3 = std::max(agg.worst_q3, tc.worst_q3);
            agg.cs_q1 = std::max(agg.cs_q1, tc.cauchy_schwarz_q1);
            agg.cs_q3 = std::max(agg.cs_q3, tc.cauchy_schwarz_q3);
            agg.min_det_margin = std::min(agg.min_det_margin, tc.det_margin);
            if (!tc.passed) ++agg.trace_failures;
          } else {
            ++agg.envelope_skipped;
          }
          if (!series_done) {
            series_done = true;
            if (nonneg_curvature) {
              Series s{"det_profile", {"t", "profile"}, {}};
              for (std::size_t r = 0; r < mono.t.size(); ++r) s.rows.push_back({mono.t[r], mono.profile[r]});
              report.series.push_back(std::move(s));
            }
            if (prof) {
              Series s{"envelope", {"t", "trQ1", "envelope_q1", "trQ3", "envelope_q3", "det", "envelope_det"}, {}};
              for (int r = traj.trim; r < traj.steps; ++r) {
                const double t = traj.t[r];
                s.rows.push_back({t, traj.trQ1[r], prof->trq1(t), traj.trQ3[r], prof->trq3(t), traj.det[r],
                                  prof->det(t)});
              }
              report.series.push_back(std::move(s));
            }
          }
          ++agg.completed;
        } catch (const Error& e) {
          ++agg.errors[std::string(to_string(e.kind()))];
        }
      }
    });
    const bool all_done = agg.completed == agg.attempted;
    auto finite_or_zero = [](double v) { return std::isfinite(v) ? v : 0.0; };
    std::vector<std::pair<std::string, double>> atoms_metrics = {
        {"attempted", static_cast<double>(agg.attempted)}, {"completed", static_cast<double>(agg.completed)}};
    for (const auto& [kind, n] : agg.errors) atoms_metrics.emplace_back("error_" + kind, static_cast<double>(n));
    report.checks.push_back(make_check("jacobi_atoms", CheckLevel::Check, all_done && agg.attempted > 0,
                                       std::move(atoms_metrics)));
    report.checks.push_back(make_check("jacobi_symmetry", CheckLevel::Check, agg.symmetry <= 1e-8,
                                       {{"max_residual", agg.symmetry}, {"max_q_residual", agg.q_symmetry}}));
    report.checks.push_back(make_check("jacobi_riccati", CheckLevel::Check,
                                       agg.riccati <= 1e-6 && agg.trace_failures == 0,
                                       {{"max_residual", agg.riccati},
                                        {"worst_trq1_excess", finite_or_zero(agg.worst_q1)},
                                        {"worst_trq3_excess", finite_or_zero(agg.worst_q3)},
                                        {"cauchy_schwarz_q1", finite_or_zero(agg.cs_q1)},
                                        {"cauchy_schwarz_q3", finite_or_zero(agg.cs_q3)},
                                        {"min_det_margin", finite_or_zero(agg.min_det_margin)},
                                        {"trace_failures", static_cast<double>(agg.trace_failures)},
                                        {"envelope_skipped", static_cast<double>(agg.envelope_skipped)}}));
    if (M.base_variant() != Variant::Hyperbolic) {
      report.checks.push_back(make_check("jacobi_monotonicity", CheckLevel::Check, agg.max_increase <= 1e-6,
                                         {{"max_relative_increase", finite_or_zero(agg.max_increase)}}));
      report.checks.push_back(make_check("jacobian_bound", CheckLevel::Check,
                                         agg.min_bound_margin >= -1e-3 && agg.lap_violations == 0,
                                         {{"min_relative_margin", finite_or_zero(agg.min_bound_margin)},
                                          {"laplacian_violations", static_cast<double>(agg.lap_violations)}}));
    }
  }

  if (c.ibp) {
    const IbpReport ibp = stage(report, "ibp", [&] {
      double reach = 0.0;
      for (const auto& a : coupling.plan) {
        if (a.mass > coupling.atom_floor()) {
          reach = std::max(reach, M.distance(tmesh.nodes[a.i].geometry.point, targets[a.j]));
        }
      }
      return integration_by_parts_check(tmesh, tf, phi, reach);
    });
    report.checks.push_back(make_check("ibp", CheckLevel::Check, ibp.passed,
                                       {{"lhs", ibp.lhs}, {"rhs", ibp.rhs}, {"slack", ibp.slack},
                                        {"margin", ibp.margin}}));
  }
  return report;
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(ErrorKind::IoError, "cannot write " + path.string());
  out << text;
  if (!out) raise(ErrorKind::IoError, "write failed for " + path.string());
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

nlohmann::ordered_json inequality_json(const InequalityReport& ir) {
  nlohmann::ordered_json j;
  j["record"] = "inequality";
  j["variant"] = inequality_kind_name(ir.kind);
  j["n"] = ir.n;
  j["m"] = ir.m;
  j["lifted"] = ir.lifted;
  j["lhs"] = json_number(ir.lhs);
  j["rhs"] = json_number(ir.rhs);
  j["ratio"] = json_number(ir.ratio);
  j["report_tol"] = ir.params.report_tol;
  j["passed"] = ir.passed;
  nlohmann::ordered_json terms;
  terms["int_f"] = ir.terms.integral_f;
  terms["int_f_power"] = ir.terms.integral_f_power;
  terms["int_grad_f"] = ir.terms.integral_gradient;
  terms["int_boundary_f"] = ir.terms.integral_boundary;
  terms["int_f_mean_curvature"] = ir.terms.integral_mean_curvature;
  terms["area"] = ir.terms.area;
  terms["boundary_length"] = ir.terms.boundary_length;
  j["terms"] = terms;
  nlohmann::ordered_json constants;
  for (const auto& [k, v] : ir.constants) constants[k] = json_number(v);
  j["constants"] = constants;
  nlohmann::ordered_json volumes = nlohmann::ordered_json::array();
  for (const auto& v : ir.volumes) {
    volumes.push_back({{"name", v.name},
                       {"value", json_number(v.value)},
                       {"error", json_number(v.error)},
                       {"analytic", v.analytic},
                       {"method", v.method},
                       {"lower_bound", json_number(v.lower_bound)}});
  }
  j["volumes"] = volumes;
  return j;
}

}  // namespace

void emit_report(const RunReport& report, const std::string& dir, const std::string& format) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) raise(ErrorKind::IoError, "cannot create " + dir + ": " + ec.message());
  const fs::path base(dir);

  if (format == "json") {
    std::ostringstream out;
    nlohmann::ordered_json cfg;
    cfg["record"] = "config";
    cfg["name"] = report.name;
    cfg["seed"] = report.seed;
    nlohmann::ordered_json fields;
    for (const auto& [k, v] : report.config) fields[k] = v;
    cfg["fields"] = fields;
    out << cfg.dump() << '\n';
    if (report.inequality) out << inequality_json(*report.inequality).dump() << '\n';
    for (const auto& chk : report.checks) {
      nlohmann::ordered_json j;
      j["record"] = "check";
      j["name"] = chk.name;
      j["level"] = chk.level == CheckLevel::Theorem ? "theorem" : "check";
      j["verdict"] = verdict_name(chk.verdict);
      nlohmann::ordered_json metrics;
      for (const auto& [k, v] : chk.metrics) metrics[k] = json_number(v);
      j["metrics"] = metrics;
      out << j.dump() << '\n';
    }
    nlohmann::ordered_json sum;
    sum["record"] = "summary";
    sum["checks"] = report.checks.size();
    sum["failures"] = report.failures();
    sum["warnings"] = report.warnings();
    out << sum.dump() << '\n';
    write_file(base / "report.jsonl", out.str());
  } else if (format == "csv") {
    std::ostringstream ineq;
    ineq << "term,value\n";
    if (const auto& ir = report.inequality) {
      ineq << "variant," << inequality_kind_name(ir->kind) << '\n';
      const std::pair<const char*, double> rows[] = {
          {"lhs", ir->lhs},
          {"rhs", ir->rhs},
          {"ratio", ir->ratio},
          {"int_f", ir->terms.integral_f},
          {"int_f_power", ir->terms.integral_f_power},
          {"int_grad_f", ir->terms.integral_gradient},
          {"int_boundary_f", ir->terms.integral_boundary},
          {"int_f_mean_curvature", ir->terms.integral_mean_curvature},
      };
      for (const auto& [k, v] : rows) ineq << k << ',' << format_double(v) << '\n';
      for (const auto& [k, v] : ir->constants) ineq << csv_field(k) << ',' << format_double(v) << '\n';
      for (const auto& v : ir->volumes) {
        ineq << csv_field(v.name) << ',' << format_double(v.value) << '\n';
        ineq << csv_field(v.name + " error") << ',' << format_double(v.error) << '\n';
      }
    }
    write_file(base / "inequality.csv", ineq.str());
    std::ostringstream checks;
    checks << "check,level,verdict,metric,value\n";
    for (const auto& chk : report.checks) {
      const char* level = chk.level == CheckLevel::Theorem ? "theorem" : "check";
      for (const auto& [k, v] : chk.metrics) {
        checks << chk.name << ',' << level << ',' << verdict_name(chk.verdict) << ',' << k << ','
               << format_double(v) << '\n';
      }
    }
    write_file(base / "checks.csv", checks.str());
  } else {
    raise(ErrorKind::ConfigError, "unknown output format '" + format + "'");
  }

  for (const auto& s : report.series) {
    std::ostringstream out;
    for (std::size_t k = 0; k < s.columns.size(); ++k) out << (k ? "," : "") << s.columns[k];
    out << '\n';
    for (const auto& row : s.rows) {
      for (std::size_t k = 0; k < row.size(); ++k) out << (k ? "," : "") << format_double(row[k]);
      out << '\n';
    }
    write_file(base / (s.name + ".csv"), out.str());
  }

  std::ostringstream timings;
  timings << "stage,seconds\n";
  for (const auto& t : report.timings) timings << t.stage << ',' << t.seconds << '\n';
  write_file(base / "timings.csv", timings.str());
}

SweepGrid parse_grid(const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 >= spec.size()) {
    raise(ErrorKind::ConfigError, "grid '" + spec + "': expected section.key=v1,v2,...");
  }
  SweepGrid g;
  g.field = spec.substr(0, eq);
  std::stringstream ss(spec.substr(eq + 1));
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) raise(ErrorKind::ConfigError, "grid '" + spec + "': empty value");
    g.values.push_back(item);
  }
  return g;
}

std::vector<SweepPoint> run_sweep(const RawConfig& raw, const SweepGrid& grid,
                                  const std::optional<std::uint64_t>& seed_override) {
  std::vector<SweepPoint> points;
  for (const auto& value : grid.values) {
    RawConfig point = raw;
    point.set(grid.field, value);
    if (seed_override) point.set("seed", std::to_string(*seed_override));
    const ScenarioConfig config = build_config(point);
    points.push_back({value, run_scenario(config)});
  }
  return points;
}

void emit_sweep(const std::vector<SweepPoint>& points, const SweepGrid& grid, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) raise(ErrorKind::IoError, "cannot create " + dir + ": " + ec.message());
  std::ostringstream out;
  out << "index," << csv_field(grid.field) << ",variant,lhs,rhs,ratio,tangency_median,spacing,failures,warnings\n";
  for (std::size_t k = 0; k < points.size(); ++k) {
    const RunReport& r = points[k].report;
    out << k << ',' << csv_field(points[k].value) << ',';
    if (r.inequality) {
      out << inequality_kind_name(r.inequality->kind) << ',' << format_double(r.inequality->lhs) << ','
          << format_double(r.inequality->rhs) << ',' << format_double(r.inequality->ratio);
    } else {
      out << ",,,";
    }
    // Blank when the tangency check is off; used for refinement studies.
    std::string median, spacing;
    for (const auto& chk : r.checks) {
      if (chk.name != "tangency") continue;
      for (const auto& [key, value] : chk.metrics) {
        if (key == "median") median = format_double(value);
        if (key == "spacing") spacing = format_double(value);
      }
    }
    out << ',' << median << ',' << spacing;
    out << ',' << r.failures() << ',' << r.warnings() << '\n';
  }
  write_file(fs::path(dir) / "sweep.csv", out.str());
}

}  // namespace otlab::tools
