#include "otlab/inequalities.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "otlab/error.hpp"
#include "otlab/random.hpp"

namespace otlab {

namespace {

constexpr double kPi = std::numbers::pi;

// Sharp lower bound of Ric_p on the constant-curvature models: (p-1)K for
// K >= 0, pK for K < 0. A line factor adds zero-curvature planes.
double ricci_lower(const ModelManifold& M, int p) {
  const double K = M.base_variant() == Variant::Euclidean ? 0.0 : M.curvature();
  if (M.has_line()) return K >= 0.0 ? 0.0 : p * K;
  return K >= 0.0 ? (p - 1) * K : p * K;
}

constexpr int kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};

void check_sigma_r(double sigma, double r) {
  if (!(sigma > 0.0 && sigma < 1.0)) raise(ErrorKind::HypothesisViolation, "sigma must lie in (0, 1)");
  if (!(r > 0.0)) raise(ErrorKind::HypothesisViolation, "r must be positive");
}

TargetDomain annulus_domain(const ModelManifold& M, const SubmanifoldMesh& mesh, TargetDomain dom, int samples,
                            std::uint64_t seed) {
  const DomainSpec& spec = dom.spec;
  check_sigma_r(spec.sigma, spec.r);
  if (M.base_variant() != Variant::Euclidean) {
    raise(ErrorKind::Unsupported, "annulus domains are built in flat ambients only");
  }
  const int D = M.dim();
  if (D > static_cast<int>(std::size(kPrimes))) raise(ErrorKind::Unsupported, "annulus dimension");
  const NodeDistances nd(mesh);
  const double inner = spec.sigma * spec.r;
  const double outer = spec.r;
  // Every admissible point is within r of the nearest surface point to x0.
  const double bound = outer + nd.nearest(dom.center).second;

  // Halton points with a seeded Cranley-Patterson shift.
  Rng rng(seed);
  Eigen::VectorXd shift(D);
  for (int k = 0; k < D; ++k) shift[k] = uniform01(rng);
  const long cap = 2000L * samples + 100000L;
  long accepted = 0;
  long index = 0;
  while (accepted < samples && index < cap) {
    ++index;
    Vector p = dom.center;
    double r2 = 0.0;
    for (int k = 0; k < D; ++k) {
      double q = radical_inverse(static_cast<std::uint64_t>(index), kPrimes[k]) + shift[k];
      if (q >= 1.0) q -= 1.0;
      const double c = (2.0 * q - 1.0) * bound;
      p[k] += c;
      r2 += c * c;
    }
    if (r2 > bound * bound) continue;
    const Eigen::ArrayXd d = nd.all(p);
    if (d.minCoeff() < inner || d.maxCoeff() > outer) continue;
    dom.samples.push_back(std::move(p));
    ++accepted;
  }
  dom.candidates = index;
  if (accepted == 0) raise(ErrorKind::EmptyDomain, "no point lies in the annulus around the surface");

  const double box = std::pow(2.0 * bound, D);
  const double frac = static_cast<double>(accepted) / static_cast<double>(index);
  dom.volume.name = "vol(Omega)";
  dom.volume.value = box * frac;
  dom.volume.error = box * std::sqrt(frac * (1.0 - frac) / static_cast<double>(index));
  dom.volume.analytic = false;
  dom.volume.method = "quasi-monte-carlo";
  // Annulus B_{sigma(2-delta)r, delta r}(x0) inside Omega for x0 on the surface.
  const double reach = nd.all(dom.center).maxCoeff();
  const double delta = 1.0 - reach / spec.r;
  const double a = spec.sigma * (2.0 - delta);
  if (delta > 0.0 && a < delta) {
    dom.volume.lower_bound = ball_volume(D) * std::pow(spec.r, D) * (std::pow(delta, D) - std::pow(a, D));
  }
  return dom;
}

Vector sphere_sample(const ModelManifold& M, Rng& rng) {
  return M.sphere_point_from_normal(standard_normal_vector(rng, M.embedding_dim()));
}

}  // namespace

std::string domain_kind_name(DomainKind kind) {
  switch (kind) {
    case DomainKind::AnnulusAroundSigma: return "annulus";
    case DomainKind::WholeManifold: return "whole_manifold";
    case DomainKind::ComplementOfTube: return "complement_of_tube";
    case DomainKind::GeodesicBall: return "geodesic_ball";
  }
  return "unknown";
}

DomainKind domain_kind_from_name(const std::string& name) {
  for (DomainKind k : {DomainKind::AnnulusAroundSigma, DomainKind::WholeManifold, DomainKind::ComplementOfTube,
                       DomainKind::GeodesicBall}) {
    if (domain_kind_name(k) == name) return k;
  }
  raise(ErrorKind::ParseError, "unknown domain variant '" + name + "'");
}

Vector chart_center(const SubmanifoldMesh& mesh) {
  if (!mesh.geometry) raise(ErrorKind::Unsupported, "mesh has no chart");
  return mesh.geometry->point(Param::Zero());
}

TargetDomain build_target_domain(const ModelManifold& M, const SubmanifoldMesh& mesh, const DomainSpec& spec,
                                 int samples, std::uint64_t seed) {
  if (samples < 1) raise(ErrorKind::Unsupported, "sample count must be positive");
  if (mesh.nodes.empty()) raise(ErrorKind::EmptyDomain, "empty mesh");
  TargetDomain dom;
  dom.spec = spec;
  dom.center = spec.center ? *spec.center : chart_center(mesh);

  if (spec.kind == DomainKind::AnnulusAroundSigma) {
    dom = annulus_domain(M, mesh, std::move(dom), samples, seed);
  } else if (spec.kind == DomainKind::GeodesicBall) {
    if (!(spec.r > 0.0)) raise(ErrorKind::HypothesisViolation, "ball radius must be positive");
    const double radius = 0.5 * spec.r;
    Rng rng(seed);
    for (int k = 0; k < samples; ++k) dom.samples.push_back(sample_geodesic_ball(M, dom.center, radius, rng));
    dom.candidates = samples;
    dom.volume = {"vol(B_{r/2}(x0))", geodesic_ball_volume(M, radius), 0.0, true, "analytic", 0.0};
  } else {
    if (!M.is_compact()) raise(ErrorKind::UnboundedDomain, "whole-manifold domains need a closed ambient");
    const bool tube = spec.kind == DomainKind::ComplementOfTube;
    if (tube && !(spec.eps > 0.0)) raise(ErrorKind::HypothesisViolation, "tube radius must be positive");
    const NodeDistances nd(mesh);
    // Antipodes of surface points are cut points of the cost; redraw there.
    const double cut = kPi * M.radius() - kCutTolerance;
    const double margin = 2.0 * mesh.spacing;
    Rng rng(seed);
    const long cap = 1000L * samples + 100000L;
    long index = 0;
    while (static_cast<int>(dom.samples.size()) < samples && index < cap) {
      ++index;
      Vector p = sphere_sample(M, rng);
      const Eigen::ArrayXd d = nd.all(p);
      if (d.maxCoeff() >= cut) continue;
      if (tube && d.minCoeff() <= spec.eps + margin && distance_to_surface(mesh, p) <= spec.eps) continue;
      dom.samples.push_back(std::move(p));
    }
    dom.candidates = index;
    if (dom.samples.empty()) raise(ErrorKind::EmptyDomain, "tube covers the manifold");
    if (tube) {
      const TubularEstimate est =
          tubular_volume(M, mesh, spec.eps, {derive_seed(seed, 1), spec.volume_samples});
      dom.volume = {"vol(M \\ N_eps)", est.complement_volume, est.standard_error, false, "monte-carlo", 0.0};
    } else {
      dom.volume = {"vol(M)", M.volume(), 0.0, true, "analytic", 0.0};
    }
  }
  const double w = 1.0 / static_cast<double>(dom.samples.size());
  dom.weights.assign(dom.samples.size(), w);
  return dom;
}

std::string inequality_kind_name(InequalityKind kind) {
  switch (kind) {
    case InequalityKind::NonNegLimit: return "nonneg_limit";
    case InequalityKind::NonNegFinite: return "nonneg_finite";
    case InequalityKind::ClosedPositive: return "closed_positive";
    case InequalityKind::PositiveTube: return "positive_tube";
    case InequalityKind::NegativeLocal: return "negative_local";
  }
  return "unknown";
}

InequalityKind inequality_kind_from_name(const std::string& name) {
  for (InequalityKind k : {InequalityKind::NonNegLimit, InequalityKind::NonNegFinite, InequalityKind::ClosedPositive,
                           InequalityKind::PositiveTube, InequalityKind::NegativeLocal}) {
    if (inequality_kind_name(k) == name) return k;
  }
  raise(ErrorKind::ParseError, "unknown inequality variant '" + name + "'");
}

InequalityTerms compute_terms(const SubmanifoldMesh& mesh, const ScalarField& f) {
  if (static_cast<int>(f.values.size()) != mesh.size()) raise(ErrorKind::LengthMismatch, "field values");
  if (mesh.n < 2) raise(ErrorKind::Unsupported, "surface dimension must be at least 2");
  for (double v : f.values) {
    if (!(v > 0.0)) raise(ErrorKind::NonPositiveField, "f must be positive at every node");
  }
  const ModelManifold& M = mesh.manifold;
  const double q = static_cast<double>(mesh.n) / (mesh.n - 1);
  const std::vector<Vector> grad = intrinsic_gradient(mesh, f);

  InequalityTerms t;
  for (int i = 0; i < mesh.size(); ++i) {
    const double w = mesh.nodes[i].weight;
    const double v = f.values[i];
    t.area += w;
    t.integral_f += w * v;
    t.integral_f_power += w * std::pow(v, q);
    t.integral_gradient += w * M.norm(grad[i]);
    t.integral_mean_curvature += w * v * M.norm(mesh.nodes[i].geometry.mean_curvature);
  }
  if (!mesh.boundary.empty()) {
    const std::vector<double> fb = boundary_values(mesh, f);
    for (std::size_t k = 0; k < fb.size(); ++k) {
      if (!(fb[k] > 0.0)) raise(ErrorKind::NonPositiveField, "f must be positive on the boundary");
      t.integral_boundary += mesh.boundary[k].weight * fb[k];
      t.boundary_length += mesh.boundary[k].weight;
    }
  }
  return t;
}

std::pair<ModelManifold, SubmanifoldMesh> hypersurface_lift(const ModelManifold& M, const SubmanifoldMesh& mesh) {
  if (mesh.m != 1) raise(ErrorKind::HypothesisViolation, "the lift applies to hypersurfaces");
  return {ModelManifold::product_with_line(M), lift_mesh(mesh)};
}

InequalityReport evaluate_inequality(const ModelManifold& M_in, const SubmanifoldMesh& mesh_in, const ScalarField& f,
                                     const InequalityParams& params, const TargetDomain* domain) {
  const InequalityKind kind = params.kind;
  const bool nonneg = kind == InequalityKind::NonNegLimit || kind == InequalityKind::NonNegFinite;
  if (M_in.dim() != mesh_in.manifold.dim() || M_in.variant() != mesh_in.manifold.variant()) {
    raise(ErrorKind::HypothesisViolation, "mesh was built in a different ambient");
  }

  InequalityReport rep;
  rep.kind = kind;
  rep.params = params;

  ModelManifold M = M_in;
  const SubmanifoldMesh* mesh = &mesh_in;
  SubmanifoldMesh lifted_mesh;
  if (mesh_in.m == 1) {
    if (!(nonneg && params.lift)) {
      raise(ErrorKind::HypothesisViolation, "codimension one needs the product lift (nonnegative variants only)");
    }
    auto lifted = hypersurface_lift(M_in, mesh_in);
    M = lifted.first;
    lifted_mesh = std::move(lifted.second);
    mesh = &lifted_mesh;
    rep.lifted = true;
  }
  const int n = mesh->n;
  const int m = mesh->m;
  rep.n = n;
  rep.m = m;
  rep.terms = compute_terms(*mesh, f);
  const InequalityTerms& t = rep.terms;
  const double extrinsic = t.integral_boundary + t.integral_gradient + t.integral_mean_curvature;
  const double fp = std::pow(t.integral_f_power, static_cast<double>(n - 1) / n);
  const double bm = ball_volume(m);
  const double K = M.base_variant() == Variant::Euclidean ? 0.0 : M.curvature();
  const double k1 = params.k1.value_or(K);
  const double k2 = params.k2.value_or(K);
  auto constant = [&](const std::string& name, double v) { rep.constants.emplace_back(name, v); };
  auto volume_from = [&](DomainKind want) -> const TargetDomain* {
    if (!domain) return nullptr;
    if (domain->spec.kind != want) raise(ErrorKind::HypothesisViolation, "domain variant does not match");
    return domain;
  };

  if (nonneg) {
    if (M.is_compact()) raise(ErrorKind::HypothesisViolation, "nonnegative variants need a noncompact ambient");
    if (ricci_lower(M, n) < 0.0 || ricci_lower(M, m) < 0.0) {
      raise(ErrorKind::HypothesisViolation, "intermediate Ricci curvature is not nonnegative");
    }
    if (m < 2) raise(ErrorKind::HypothesisViolation, "codimension must be at least 2");
  }

  switch (kind) {
    case InequalityKind::NonNegLimit: {
      const double theta = params.theta ? *params.theta : asymptotic_volume_ratio(M);
      const double bnm = ball_volume(n + m);
      const double c = n * std::pow(theta, 1.0 / n) * std::pow((n + m) * bnm / (m * bm), 1.0 / n);
      constant("theta", theta);
      constant("|B^{n+m}|", bnm);
      constant("|B^m|", bm);
      constant("lhs_constant", c);
      rep.lhs = c * fp;
      rep.rhs = extrinsic;
      break;
    }
    case InequalityKind::NonNegFinite: {
      check_sigma_r(params.sigma, params.r);
      TargetDomain built;
      const TargetDomain* dom = volume_from(DomainKind::AnnulusAroundSigma);
      if (dom && (dom->spec.sigma != params.sigma || dom->spec.r != params.r)) {
        raise(ErrorKind::HypothesisViolation, "annulus parameters do not match");
      }
      if (!dom) {
        DomainSpec spec;
        spec.kind = DomainKind::AnnulusAroundSigma;
        spec.sigma = params.sigma;
        spec.r = params.r;
        spec.center = params.center;
        built = build_target_domain(M, *mesh, spec, params.domain_samples, params.seed);
        dom = &built;
      }
      const double vol = dom->volume.value;
      const double s2 = 1.0 - params.sigma * params.sigma;
      const double c = n * std::pow(2.0 * vol / (m * bm * s2), 1.0 / n);
      const double rmn = std::pow(params.r, static_cast<double>(m) / n);
      constant("sigma", params.sigma);
      constant("r", params.r);
      constant("|B^m|", bm);
      constant("fiber_bound", 0.5 * m * bm * std::pow(params.r, m) * s2);
      constant("r^{m/n}", rmn);
      rep.volumes.push_back(dom->volume);
      rep.lhs = c * fp;
      rep.rhs = rmn * (n * t.integral_f + params.r * extrinsic);
      break;
    }
    case InequalityKind::ClosedPositive:
    case InequalityKind::PositiveTube: {
      if (!M.is_compact()) raise(ErrorKind::HypothesisViolation, "positive variants need a closed ambient");
      if (m < 2) raise(ErrorKind::HypothesisViolation, "codimension must be at least 2");
      const double diam = M.diameter();
      constant("diam(M)", diam);
      constant("|B^m|", bm);
      if (kind == InequalityKind::ClosedPositive) {
        if (ricci_lower(M, n) < 0.0 || ricci_lower(M, m) < 0.0) {
          raise(ErrorKind::HypothesisViolation, "intermediate Ricci curvature is negative somewhere");
        }
        const VolumeRecord vol{"vol(M)", M.volume(), 0.0, true, "analytic", 0.0};
        rep.volumes.push_back(vol);
        rep.lhs = std::pow(vol.value / (bm * std::pow(diam, m)), 1.0 / n) * fp;
        rep.rhs = t.integral_f + diam / n * extrinsic;
        break;
      }
      if (!(k1 > 0.0 && k2 > 0.0)) raise(ErrorKind::HypothesisViolation, "k1 and k2 must be positive");
      if ((n - 1) * k1 > ricci_lower(M, n) * (1.0 + 1e-12) || (m - 1) * k2 > ricci_lower(M, m) * (1.0 + 1e-12)) {
        raise(ErrorKind::HypothesisViolation, "Ric_n >= (n-1) k1 or Ric_m >= (m-1) k2 fails");
      }
      if (!(params.eps > 0.0)) raise(ErrorKind::HypothesisViolation, "tube radius must be positive");
      const double a1 = params.eps * std::sqrt(k1 * (n - 1) / n);
      const double a2 = params.eps * std::sqrt(k2 * (m - 1) / m);
      VolumeRecord vol;
      if (const TargetDomain* dom = volume_from(DomainKind::ComplementOfTube)) {
        if (dom->spec.eps != params.eps) raise(ErrorKind::HypothesisViolation, "tube radius does not match");
        vol = dom->volume;
      } else {
        const TubularEstimate est =
            tubular_volume(M, *mesh, params.eps, {derive_seed(params.seed, 1), params.volume_samples});
        vol = {"vol(M \\ N_eps)", est.complement_volume, est.standard_error, false, "monte-carlo", 0.0};
      }
      constant("eps", params.eps);
      constant("k1", k1);
      constant("k2", k2);
      constant("alpha1", a1);
      constant("alpha2", a2);
      constant("cos(alpha1)", std::cos(a1));
      constant("sinc(alpha1)", sinc(a1));
      constant("sinc(alpha2)", sinc(a2));
      rep.volumes.push_back(vol);
      rep.lhs = std::pow(vol.value / (bm * std::pow(diam, m) * std::pow(sinc(a2), m)), 1.0 / n) * fp;
      rep.rhs = std::cos(a1) * t.integral_f + diam * sinc(a1) / n * extrinsic;
      break;
    }
    case InequalityKind::NegativeLocal: {
      if (!(k1 < 0.0 && k2 < 0.0)) raise(ErrorKind::HypothesisViolation, "k1 and k2 must be negative");
      if (n * k1 > ricci_lower(M, n) || m * k2 > ricci_lower(M, m)) {
        raise(ErrorKind::HypothesisViolation, "Ric_n >= n k1 or Ric_m >= m k2 fails");
      }
      if (!(params.r > 0.0)) raise(ErrorKind::HypothesisViolation, "r must be positive");
      const Vector x0 = params.center ? *params.center : chart_center(*mesh);
      const double reach = NodeDistances(*mesh).all(x0).maxCoeff();
      if (reach > 0.5 * params.r) {
        raise(ErrorKind::HypothesisViolation, "surface leaves the ball of radius r/2 (max distance " +
                                                  std::to_string(reach) + ")");
      }
      if (const TargetDomain* dom = volume_from(DomainKind::GeodesicBall)) {
        if (dom->spec.r != params.r) raise(ErrorKind::HypothesisViolation, "ball radius does not match");
      }
      const double b1 = params.r * std::sqrt(-k1);
      const double b2 = params.r * std::sqrt(-k2);
      const VolumeRecord vol{"vol(B_{r/2}(x0))", geodesic_ball_volume(M, 0.5 * params.r), 0.0, true, "analytic",
                             0.0};
      constant("r", params.r);
      constant("k1", k1);
      constant("k2", k2);
      constant("max_distance_to_x0", reach);
      constant("cosh(r sqrt(-k1))", std::cosh(b1));
      constant("sinh(r sqrt(-k1))", std::sinh(b1));
      constant("sinh(r sqrt(-k2))", std::sinh(b2));
      rep.volumes.push_back(vol);
      rep.lhs = std::pow(vol.value * std::pow(-k2, 0.5 * m) / (bm * std::pow(std::sinh(b2), m)), 1.0 / n) * fp;
      rep.rhs = std::cosh(b1) * t.integral_f + std::sinh(b1) / (n * std::sqrt(-k1)) * extrinsic;
      break;
    }
  }
  rep.ratio = rep.lhs / rep.rhs;
  rep.passed = rep.ratio <= 1.0 + params.report_tol;
  return rep;
}

std::string scan_family_name(ScanFamily family) {
  switch (family) {
    case ScanFamily::FlatDiskRadius: return "flat_disk_radius";
    case ScanFamily::GeodesicBall: return "geodesic_ball";
    case ScanFamily::TubeRadius: return "tube_radius";
    case ScanFamily::HyperbolicRadius: return "hyperbolic_radius";
  }
  return "unknown";
}

ScanFamily scan_family_from_name(const std::string& name) {
  for (ScanFamily f : {ScanFamily::FlatDiskRadius, ScanFamily::GeodesicBall, ScanFamily::TubeRadius,
                       ScanFamily::HyperbolicRadius}) {
    if (scan_family_name(f) == name) return f;
  }
  raise(ErrorKind::ParseError, "unknown scan family '" + name + "'");
}

ScanTable sharpness_scan(ScanFamily family, const std::vector<double>& grid, const ScanOptions& options) {
  ScanTable table;
  table.family = family;
  const Resolution res{options.radial_cells, 0};
  for (double p : grid) {
    ModelManifold M = ModelManifold::euclidean(4);
    ChartSpec chart;
    InequalityParams params;
    params.volume_samples = options.volume_samples;
    params.seed = options.seed;
    switch (family) {
      case ScanFamily::FlatDiskRadius:
        chart = {ChartKind::FlatDisk, p, {}};
        params.kind = InequalityKind::NonNegLimit;
        break;
      case ScanFamily::GeodesicBall:
        M = ModelManifold::sphere(4);
        chart = {ChartKind::GeodesicBallInSubsphere, p, {}};
        params.kind = InequalityKind::ClosedPositive;
        break;
      case ScanFamily::TubeRadius:
        M = ModelManifold::sphere(4);
        chart = {ChartKind::GeodesicBallInSubsphere, 0.25 * kPi, {}};
        params.kind = InequalityKind::PositiveTube;
        params.eps = p;
        break;
      case ScanFamily::HyperbolicRadius:
        M = ModelManifold::hyperbolic(4);
        chart = {ChartKind::GeodesicDiskInHyperbolicSubspace, 0.4, {}};
        params.kind = InequalityKind::NegativeLocal;
        params.r = p;
        break;
    }
    const SubmanifoldMesh mesh = build_submanifold(M, chart, res);
    const ScalarField f = ScalarField::constant(mesh, 1.0);
    ScanRow row{p, evaluate_inequality(M, mesh, f, params)};
    if (table.rows.empty() || row.report.ratio > table.max_ratio) {
      table.max_ratio = row.report.ratio;
      table.argmax = p;
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

IbpReport integration_by_parts_check(const SubmanifoldMesh& mesh, const ScalarField& f,
                                     const std::vector<double>& phi, double r_bound) {
  if (static_cast<int>(phi.size()) != mesh.size()) raise(ErrorKind::LengthMismatch, "potential values");
  const InequalityTerms t = compute_terms(mesh, f);
  const std::vector<Matrix> hess = least_squares_hessian(mesh, phi);
  IbpReport rep;
  for (int i = 0; i < mesh.size(); ++i) rep.lhs -= mesh.nodes[i].weight * f.values[i] * hess[i].trace();
  rep.rhs = r_bound * (t.integral_boundary + t.integral_gradient);
  rep.slack = 0.05 * rep.rhs;
  rep.margin = rep.rhs + rep.slack - rep.lhs;
  rep.passed = rep.margin >= 0.0;
  return rep;
}

}  // namespace otlab
