#include "otlab/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "otlab/error.hpp"

namespace otlab {

namespace {

double percentile(std::vector<double> v, double q) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

double log_sum_exp(const double* x, int n, int stride) {
  double mx = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < n; ++k) mx = std::max(mx, x[k * stride]);
  if (!std::isfinite(mx)) return mx;
  double s = 0.0;
  for (int k = 0; k < n; ++k) s += std::exp(x[k * stride] - mx);
  return mx + std::log(s);
}

}  // namespace

std::string solver_name(SolverKind kind) { return kind == SolverKind::Exact ? "exact" : "entropic"; }

DiscreteMeasure DiscreteMeasure::make(std::vector<Vector> points, std::vector<double> weights,
                                      Provenance provenance) {
  if (points.size() != weights.size()) raise(ErrorKind::LengthMismatch, "points and weights");
  DiscreteMeasure out;
  out.provenance = provenance;
  double total = 0.0;
  for (std::size_t k = 0; k < points.size(); ++k) {
    if (weights[k] < 0.0 || !std::isfinite(weights[k])) {
      raise(ErrorKind::NonPositiveField, "measure weights must be finite and nonnegative");
    }
    if (weights[k] == 0.0) continue;
    out.points.push_back(std::move(points[k]));
    out.weights.push_back(weights[k]);
    total += weights[k];
  }
  if (out.points.empty()) raise(ErrorKind::EmptyDomain, "measure has no mass");
  for (double& w : out.weights) w /= total;
  return out;
}

Matrix cost_matrix(const ModelManifold& M, const DiscreteMeasure& source, const DiscreteMeasure& target) {
  Matrix C(source.size(), target.size());
  for (int i = 0; i < source.size(); ++i) {
    for (int j = 0; j < target.size(); ++j) {
      // log_map carries the cut-locus guard.
      const double d = M.norm(M.log_map(source.points[i], target.points[j]));
      C(i, j) = 0.5 * d * d;
    }
  }
  return C;
}

double DiscreteCoupling::atom_floor() const {
  double m = std::numeric_limits<double>::infinity();
  for (double w : source_weights) m = std::min(m, w);
  for (double w : target_weights) m = std::min(m, w);
  return 1e-12 * m;
}

DiscreteCoupling solve_entropic(const std::vector<double>& mu, const std::vector<double>& nu, const Matrix& C,
                                const EntropicOptions& options) {
  const int S = static_cast<int>(mu.size());
  const int T = static_cast<int>(nu.size());
  if (C.rows() != S || C.cols() != T) raise(ErrorKind::LengthMismatch, "cost matrix shape");
  if (S == 0 || T == 0) raise(ErrorKind::EmptyDomain, "empty marginal");
  const double reg = options.regularization > 0.0 ? options.regularization : 5e-3 * C.mean();
  if (!(reg > 0.0)) raise(ErrorKind::Unsupported, "entropic regularization must be positive");

  // Row-major copy; P_ij = exp((f_i + g_j - c_ij) / eps).
  std::vector<double> c(static_cast<std::size_t>(S) * T);
  for (int i = 0; i < S; ++i) {
    for (int j = 0; j < T; ++j) c[static_cast<std::size_t>(i) * T + j] = C(i, j);
  }
  std::vector<double> f(S, 0.0), g(T, 0.0), buf(static_cast<std::size_t>(S) * T);
  std::vector<double> log_mu(S), log_nu(T);
  for (int i = 0; i < S; ++i) log_mu[i] = std::log(mu[i]);
  for (int j = 0; j < T; ++j) log_nu[j] = std::log(nu[j]);

  auto update_f = [&](double eps) {
    for (int i = 0; i < S; ++i) {
      double* row = &buf[static_cast<std::size_t>(i) * T];
      const double* ci = &c[static_cast<std::size_t>(i) * T];
      for (int j = 0; j < T; ++j) row[j] = (g[j] - ci[j]) / eps;
      f[i] = eps * (log_mu[i] - log_sum_exp(row, T, 1));
    }
  };
  auto update_g = [&](double eps) {
    for (int i = 0; i < S; ++i) {
      double* row = &buf[static_cast<std::size_t>(i) * T];
      const double* ci = &c[static_cast<std::size_t>(i) * T];
      for (int j = 0; j < T; ++j) row[j] = (f[i] - ci[j]) / eps;
    }
    for (int j = 0; j < T; ++j) g[j] = eps * (log_nu[j] - log_sum_exp(&buf[j], S, T));
  };
  // Row-marginal deviation after a column update (columns are then exact).
  auto row_residual = [&](double eps) {
    double res = 0.0;
    for (int i = 0; i < S; ++i) {
      const double* ci = &c[static_cast<std::size_t>(i) * T];
      double s = 0.0;
      for (int j = 0; j < T; ++j) s += std::exp((f[i] + g[j] - ci[j]) / eps);
      res = std::max(res, std::abs(s - mu[i]));
    }
    return res;
  };

  DiscreteCoupling out;
  out.solver = SolverKind::Entropic;
  out.regularization = reg;
  out.source_weights = mu;
  out.target_weights = nu;

  // Final stage: scaling iterations u = mu / K v, v = nu / K^T u on the kernel
  // K = exp((f + g - c) / eps), absorbed into (f, g) whenever u or v leave
  // [e^-30, e^30]. Same fixed point as the log-domain update, without an exp
  // per entry per sweep.
  const Eigen::Map<const Eigen::VectorXd> mu_v(mu.data(), S), nu_v(nu.data(), T);
  Matrix K(S, T);
  Eigen::VectorXd u = Eigen::VectorXd::Ones(S), v = Eigen::VectorXd::Ones(T);
  auto rebuild = [&](double eps) {
    for (int i = 0; i < S; ++i) {
      const double* ci = &c[static_cast<std::size_t>(i) * T];
      for (int j = 0; j < T; ++j) K(i, j) = std::exp((f[i] + g[j] - ci[j]) / eps);
    }
    u.setOnes();
    v.setOnes();
  };
  auto absorb = [&](double eps) {
    for (int i = 0; i < S; ++i) f[i] += eps * std::log(u[i]);
    for (int j = 0; j < T; ++j) g[j] += eps * std::log(v[j]);
    rebuild(eps);
  };
  constexpr double kAbsorb = 30.0;

  double eps = std::max(reg, C.maxCoeff());
  int iter = 0;
  double residual = std::numeric_limits<double>::infinity();
  while (eps > reg && iter < options.max_iter) {
    for (int k = 0; k < 50 && iter < options.max_iter; ++k, ++iter) {
      update_f(eps);
      update_g(eps);
    }
    eps = std::max(reg, 0.5 * eps);
  }
  if (eps <= reg && iter < options.max_iter) {
    update_f(eps);
    update_g(eps);
    ++iter;
    rebuild(eps);
    while (iter < options.max_iter) {
      const Eigen::VectorXd Kv = K * v;
      if (!(Kv.minCoeff() > 0.0)) {
        // Underflowed row: one exact log-domain sweep, then a fresh kernel.
        absorb(eps);
        update_f(eps);
        update_g(eps);
        rebuild(eps);
        ++iter;
        continue;
      }
      u = mu_v.cwiseQuotient(Kv);
      const Eigen::VectorXd Ku = K.transpose() * u;
      if (!(Ku.minCoeff() > 0.0)) {
        absorb(eps);
        update_f(eps);
        update_g(eps);
        rebuild(eps);
        ++iter;
        continue;
      }
      v = nu_v.cwiseQuotient(Ku);
      ++iter;
      const double spread = std::max(u.array().log().abs().maxCoeff(), v.array().log().abs().maxCoeff());
      if (!(spread < kAbsorb)) absorb(eps);
      if (iter % 10 == 0 || iter == options.max_iter) {
        residual = (u.cwiseProduct(K * v) - mu_v).cwiseAbs().maxCoeff();
        if (residual < options.stop_tol) break;
      }
    }
    absorb(eps);
  } else {
    residual = row_residual(eps);
  }
  out.iterations = iter;
  out.converged = residual < options.stop_tol && eps <= reg;

  // Keep entries above 1e-14 of the largest, then renormalize the plan mass.
  std::vector<double> P(static_cast<std::size_t>(S) * T);
  double pmax = 0.0;
  for (int i = 0; i < S; ++i) {
    for (int j = 0; j < T; ++j) {
      const std::size_t k = static_cast<std::size_t>(i) * T + j;
      P[k] = std::exp((f[i] + g[j] - c[k]) / eps);
      pmax = std::max(pmax, P[k]);
    }
  }
  double total = 0.0;
  for (double& p : P) {
    if (p < 1e-14 * pmax) p = 0.0;
    total += p;
  }
  std::vector<double> rows(S, 0.0), cols(T, 0.0);
  for (int i = 0; i < S; ++i) {
    for (int j = 0; j < T; ++j) {
      const std::size_t k = static_cast<std::size_t>(i) * T + j;
      if (P[k] == 0.0) continue;
      const double m = P[k] / total;
      out.plan.push_back({i, j, m});
      out.cost += m * c[k];
      rows[i] += m;
      cols[j] += m;
    }
  }
  out.phi = Eigen::Map<const Vector>(f.data(), S);
  out.psi = Eigen::Map<const Vector>(g.data(), T);
  const double shift = out.psi.mean();
  out.psi.array() -= shift;
  out.phi.array() += shift;
  double res = 0.0;
  double dual = 0.0;
  for (int i = 0; i < S; ++i) {
    res = std::max(res, std::abs(rows[i] - mu[i]));
    dual += mu[i] * out.phi[i];
  }
  for (int j = 0; j < T; ++j) {
    res = std::max(res, std::abs(cols[j] - nu[j]));
    dual += nu[j] * out.psi[j];
  }
  out.marginal_residual = res;
  out.duality_gap = std::abs(out.cost - dual);
  return out;
}

Vector c_transform(const Vector& values, const Matrix& C, TransformDirection direction) {
  if (direction == TransformDirection::ToTarget) {
    if (values.size() != C.rows()) raise(ErrorKind::LengthMismatch, "source potential length");
    Vector out(C.cols());
    for (Eigen::Index j = 0; j < C.cols(); ++j) out[j] = (C.col(j) - values).minCoeff();
    return out;
  }
  if (values.size() != C.cols()) raise(ErrorKind::LengthMismatch, "target potential length");
  Vector out(C.rows());
  for (Eigen::Index i = 0; i < C.rows(); ++i) out[i] = (C.row(i).transpose() - values).minCoeff();
  return out;
}

CertificationReport certify_support(const DiscreteCoupling& coupling, const Matrix& C, double tol,
                                    bool raise_on_failure) {
  if (coupling.phi.size() != C.rows() || coupling.psi.size() != C.cols()) {
    raise(ErrorKind::LengthMismatch, "coupling duals do not match the cost matrix");
  }
  CertificationReport rep;
  rep.tolerance = tol;
  const Vector psi_c = c_transform(coupling.phi, C, TransformDirection::ToTarget);
  rep.phi = c_transform(psi_c, C, TransformDirection::ToSource);
  rep.phi_c = c_transform(rep.phi, C, TransformDirection::ToTarget);
  const double floor = coupling.atom_floor();
  for (const auto& a : coupling.plan) {
    if (a.mass <= floor) continue;
    ++rep.atoms_checked;
    const double v = C(a.i, a.j) - rep.phi[a.i] - rep.phi_c[a.j];
    rep.worst_violation = std::max(rep.worst_violation, v);
  }
  rep.passed = rep.worst_violation <= tol;
  if (!rep.passed && raise_on_failure) {
    raise(ErrorKind::CertificationFailed,
          "support violation " + std::to_string(rep.worst_violation) + " exceeds " + std::to_string(tol));
  }
  return rep;
}

double c_concave_value(const ModelManifold& M, const std::vector<Vector>& targets, const Vector& phi_c,
                       const Vector& y) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < targets.size(); ++j) {
    const double d = M.distance(y, targets[j]);
    best = std::min(best, 0.5 * d * d - phi_c[static_cast<Eigen::Index>(j)]);
  }
  return best;
}

PotentialGradient potential_gradient_on_sigma(const SubmanifoldMesh& mesh, const std::vector<double>& phi,
                                              const std::vector<Vector>& targets) {
  PotentialGradient out;
  out.gradient = least_squares_gradient(mesh, phi);
  out.reach.assign(mesh.size(), 0.0);
  out.flagged.assign(mesh.size(), false);
  for (int i = 0; i < mesh.size(); ++i) {
    const Vector& x = mesh.nodes[i].geometry.point;
    for (const auto& z : targets) out.reach[i] = std::max(out.reach[i], mesh.manifold.distance(x, z));
    const double g = mesh.manifold.norm(out.gradient[i]);
    if (g > out.reach[i]) {
      out.flagged[i] = true;
      ++out.flagged_count;
      out.gradient[i] *= out.reach[i] / g;
    }
  }
  return out;
}

FiberReconstruction tangency_residuals(const ModelManifold& M, const SubmanifoldMesh& mesh,
                                       const DiscreteCoupling& coupling, const std::vector<Vector>& targets,
                                       const std::vector<Vector>& grad_phi) {
  if (coupling.sources() != mesh.size() || static_cast<int>(grad_phi.size()) != mesh.size()) {
    raise(ErrorKind::LengthMismatch, "coupling sources must be the mesh nodes");
  }
  if (static_cast<int>(targets.size()) != coupling.targets()) raise(ErrorKind::LengthMismatch, "targets");
  FiberReconstruction out;
  out.fibers.assign(mesh.size(), {});
  const double floor = coupling.atom_floor();
  for (const auto& a : coupling.plan) {
    if (a.mass <= floor) continue;
    const NodeGeometry& g = mesh.nodes[a.i].geometry;
    const Vector u = M.log_map(g.point, targets[a.j]);
    Vector ut = Vector::Zero(u.size());
    for (const auto& e : g.tangent) ut += M.inner(u, e) * e;
    FiberAtom atom;
    atom.target = a.j;
    atom.mass = a.mass;
    atom.normal = u - ut;
    for (const auto& e : g.tangent) atom.normal -= M.inner(atom.normal, e) * e;
    for (const auto& e : g.tangent) {
      out.max_normal_leak = std::max(out.max_normal_leak, std::abs(M.inner(atom.normal, e)));
    }
    atom.tangential_residual = M.norm(ut + grad_phi[a.i]);
    out.residuals.push_back(atom.tangential_residual);
    out.fibers[a.i].push_back(std::move(atom));
  }
  out.median = percentile(out.residuals, 0.5);
  out.p90 = percentile(out.residuals, 0.9);
  out.max = out.residuals.empty() ? 0.0 : *std::max_element(out.residuals.begin(), out.residuals.end());
  return out;
}

FiberMassReport fiber_mass_residual(const SubmanifoldMesh& mesh, const DiscreteCoupling& coupling,
                                    const FiberReconstruction& fiber, double domain_volume) {
  if (coupling.sources() != mesh.size()) raise(ErrorKind::LengthMismatch, "coupling sources");
  FiberMassReport out;
  std::vector<double> transported(mesh.size(), 0.0);
  for (const auto& a : coupling.plan) transported[a.i] += a.mass;
  out.residual.resize(mesh.size());
  out.proxy.resize(mesh.size());
  for (int i = 0; i < mesh.size(); ++i) {
    out.residual[i] = std::abs(transported[i] - coupling.source_weights[i]);
    double fiber_mass = 0.0;
    for (const auto& atom : fiber.fibers[i]) fiber_mass += atom.mass;
    out.proxy[i] = fiber_mass * domain_volume;
    out.max_residual = std::max(out.max_residual, out.residual[i]);
  }
  return out;
}

double coth_profile(double s) {
  if (std::abs(s) < 1e-4) return 1.0 + s * s / 3.0;
  return s / std::tanh(s);
}

SemiconcavityReport semiconcavity_check(const ModelManifold& M, const SubmanifoldMesh& mesh,
                                        const DiscreteCoupling& coupling, const std::vector<Vector>& targets,
                                        const Vector& phi_c, double k_lower, double slack) {
  if (coupling.sources() != mesh.size()) raise(ErrorKind::LengthMismatch, "coupling sources");
  SemiconcavityReport rep;
  rep.worst_margin = std::numeric_limits<double>::infinity();
  const double s = 2.0 * mesh.spacing;
  const Chart& chart = *mesh.geometry;
  for (int i = 0; i < mesh.size(); ++i) {
    const MeshNode& node = mesh.nodes[i];
    const Vector& x = node.geometry.point;
    // Target realizing phi(x) = min_j c(x, zeta_j) - phi^c_j.
    double best = std::numeric_limits<double>::infinity();
    int jstar = -1;
    for (std::size_t j = 0; j < targets.size(); ++j) {
      const double d = M.distance(x, targets[j]);
      const double v = 0.5 * d * d - phi_c[static_cast<Eigen::Index>(j)];
      if (v < best) {
        best = v;
        jstar = static_cast<int>(j);
      }
    }
    if (jstar < 0) continue;
    const double l = M.distance(x, targets[jstar]);
    const double b = k_lower < 0.0 ? coth_profile(0.5 * l * std::sqrt(-k_lower)) : 1.0;
    for (int a = 0; a < mesh.n; ++a) {
      const Vector& e = node.geometry.tangent[a];
      Param up, dn;
      const Vector yp = chart.surface_exp(node.param, s * e, &up);
      const Vector ym = chart.surface_exp(node.param, -s * e, &dn);
      // Skip directions leaving the chart domain.
      if ((chart.clamp(up) - up).norm() > 0.0 || (chart.clamp(dn) - dn).norm() > 0.0) continue;
      const double second = (c_concave_value(M, targets, phi_c, yp) + c_concave_value(M, targets, phi_c, ym) -
                             2.0 * best) / (s * s);
      double IIee = 0.0;
      {
        Vector sff_e = Vector::Zero(x.size());
        for (std::size_t beta = 0; beta < node.geometry.sff.size(); ++beta) {
          sff_e += node.geometry.sff[beta](a, a) * node.geometry.normal[beta];
        }
        IIee = M.norm(sff_e);
      }
      const double bound = 2.0 * b + l * IIee;
      const double margin = bound + slack - second;
      ++rep.checks;
      rep.max_second_difference = std::max(rep.max_second_difference, second);
      if (margin < rep.worst_margin) {
        rep.worst_margin = margin;
        rep.worst_node = i;
      }
    }
  }
  if (rep.checks == 0) rep.worst_margin = 0.0;
  rep.passed = rep.worst_margin >= 0.0;
  return rep;
}

}  // namespace otlab
