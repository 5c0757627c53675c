#include <cmath>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "otlab/error.hpp"
#include "otlab/inequalities.hpp"
#include "otlab/submanifold.hpp"

using namespace otlab;

namespace {

SubmanifoldMesh flat_disk(double rho, int cells, int dim = 4) {
  return build_submanifold(ModelManifold::euclidean(dim), {ChartKind::FlatDisk, rho, {}}, {cells, 0});
}

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::IoError;
}

InequalityParams params_for(InequalityKind kind) {
  InequalityParams p;
  p.kind = kind;
  return p;
}

}  // namespace

TEST_CASE("flat disk attains equality in the nonnegative limit") {
  for (const double rho : {0.5, 1.0, 2.0}) {
    const auto mesh = flat_disk(rho, 24);
    const auto M = ModelManifold::euclidean(4);
    const auto rep = evaluate_inequality(M, mesh, ScalarField::constant(mesh, 1.0),
                                         params_for(InequalityKind::NonNegLimit));
    // n theta^{1/n} ((n+m)|B^{n+m}| / (m |B^m|))^{1/n} |Sigma|^{1/2} with theta = 1,
    // against the boundary length 2 pi rho.
    const double c = 2.0 * std::sqrt(4.0 * oracle::ball_volume(4) / (2.0 * oracle::ball_volume(2)));
    const double lhs = c * std::sqrt(oracle::pi * rho * rho);
    const double rhs = 2.0 * oracle::pi * rho;
    INFO("rho = " << rho);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-14));
    CHECK(rep.lhs == doctest::Approx(lhs).epsilon(1e-3));
    CHECK(rep.rhs == doctest::Approx(rhs).epsilon(1e-12));
    CHECK(std::abs(rep.ratio - 1.0) <= 1e-3);
    CHECK(rep.passed);
    CHECK(rep.n == 2);
    CHECK(rep.m == 2);
  }
}

TEST_CASE("hemisphere in the closed positive variant") {
  const auto M = ModelManifold::sphere(4);
  const auto mesh = build_submanifold(M, {ChartKind::GeodesicBallInSubsphere, oracle::pi / 2, {}}, {32, 0});
  const auto rep = evaluate_inequality(M, mesh, ScalarField::constant(mesh, 1.0),
                                       params_for(InequalityKind::ClosedPositive));
  // vol(S^4) = 8 pi^2 / 3, diam = pi, |Sigma| = 2 pi, boundary a great circle, H = 0.
  const double vol = oracle::sphere_area(4);
  const double area = 2.0 * oracle::pi;
  const double lhs = std::sqrt(vol / (oracle::ball_volume(2) * oracle::pi * oracle::pi)) * std::sqrt(area);
  const double rhs = area + oracle::pi / 2.0 * (2.0 * oracle::pi);
  CHECK(vol == doctest::Approx(8.0 * oracle::pi * oracle::pi / 3.0));
  CHECK(rep.lhs == doctest::Approx(lhs).epsilon(2e-3));
  CHECK(rep.rhs == doctest::Approx(rhs).epsilon(2e-3));
  CHECK(rep.ratio == doctest::Approx(lhs / rhs).epsilon(2e-3));
  CHECK(rep.ratio == doctest::Approx(0.143).epsilon(5e-3));
  CHECK(rep.terms.integral_mean_curvature <= 1e-10);
}

TEST_CASE("codimension one needs the lift") {
  const auto M = ModelManifold::euclidean(3);
  const auto mesh = flat_disk(1.0, 24, 3);
  const auto f = ScalarField::constant(mesh, 1.0);
  auto p = params_for(InequalityKind::NonNegLimit);
  CHECK(kind_of([&] { evaluate_inequality(M, mesh, f, p); }) == ErrorKind::HypothesisViolation);
  p.lift = true;
  const auto rep = evaluate_inequality(M, mesh, f, p);
  CHECK(rep.lifted);
  CHECK(rep.m == 2);
  CHECK(std::abs(rep.ratio - 1.0) <= 1e-3);

  const auto S = ModelManifold::sphere(3);
  const auto smesh = build_submanifold(S, {ChartKind::GeodesicBallInSubsphere, 0.5, {}}, {16, 0});
  auto q = params_for(InequalityKind::ClosedPositive);
  q.lift = true;
  CHECK(kind_of([&] { evaluate_inequality(S, smesh, ScalarField::constant(smesh, 1.0), q); }) ==
        ErrorKind::HypothesisViolation);
  const auto lifted = hypersurface_lift(M, mesh);
  CHECK(lifted.first.dim() == 4);
  CHECK(lifted.second.m == 2);
  CHECK(kind_of([&] { hypersurface_lift(M, flat_disk(1.0, 8)); }) == ErrorKind::HypothesisViolation);
}

TEST_CASE("hypotheses of each variant") {
  const auto E = ModelManifold::euclidean(4);
  const auto S = ModelManifold::sphere(4);
  const auto H = ModelManifold::hyperbolic(4);
  const auto disk = flat_disk(1.0, 12);
  const auto cap = build_submanifold(S, {ChartKind::GeodesicBallInSubsphere, 0.5, {}}, {12, 0});
  const auto hdisk = build_submanifold(H, {ChartKind::GeodesicDiskInHyperbolicSubspace, 0.4, {}}, {12, 0});
  auto one = [](const SubmanifoldMesh& m) { return ScalarField::constant(m, 1.0); };
  CHECK(kind_of([&] { evaluate_inequality(S, cap, one(cap), params_for(InequalityKind::NonNegLimit)); }) ==
        ErrorKind::HypothesisViolation);
  CHECK(kind_of([&] { evaluate_inequality(H, hdisk, one(hdisk), params_for(InequalityKind::NonNegLimit)); }) ==
        ErrorKind::HypothesisViolation);
  CHECK(kind_of([&] { evaluate_inequality(E, disk, one(disk), params_for(InequalityKind::ClosedPositive)); }) ==
        ErrorKind::HypothesisViolation);
  CHECK(kind_of([&] { evaluate_inequality(S, cap, one(cap), params_for(InequalityKind::NegativeLocal)); }) ==
        ErrorKind::HypothesisViolation);
  // Mesh built in another ambient.
  CHECK(kind_of([&] { evaluate_inequality(S, disk, one(disk), params_for(InequalityKind::ClosedPositive)); }) ==
        ErrorKind::HypothesisViolation);
  // The disk of radius 0.4 leaves the ball of radius r/2 = 0.3.
  auto neg = params_for(InequalityKind::NegativeLocal);
  neg.r = 0.6;
  CHECK(kind_of([&] { evaluate_inequality(H, hdisk, one(hdisk), neg); }) == ErrorKind::HypothesisViolation);
  // k1 beyond the curvature lower bound.
  auto tube = params_for(InequalityKind::PositiveTube);
  tube.k1 = 2.0;
  CHECK(kind_of([&] { evaluate_inequality(S, cap, one(cap), tube); }) == ErrorKind::HypothesisViolation);
  CHECK(kind_of([&] { evaluate_inequality(E, disk, ScalarField::constant(disk, -1.0),
                                          params_for(InequalityKind::NonNegLimit)); }) ==
        ErrorKind::NonPositiveField);
}

TEST_CASE("target domain volumes") {
  const auto S = ModelManifold::sphere(4);
  const auto cap = build_submanifold(S, {ChartKind::GeodesicBallInSubsphere, 0.5, {}}, {12, 0});
  DomainSpec whole;
  whole.kind = DomainKind::WholeManifold;
  const auto dw = build_target_domain(S, cap, whole, 500, 3);
  CHECK(dw.volume.value == doctest::Approx(8.0 * oracle::pi * oracle::pi / 3.0).epsilon(1e-14));
  CHECK(dw.volume.analytic);
  CHECK(dw.samples.size() == 500);
  double wsum = 0.0;
  for (double w : dw.weights) wsum += w;
  CHECK(wsum == doctest::Approx(1.0));

  // Hyperbolic ball of radius r/2: |S^3| int_0^{r/2} sinh^3.
  const auto H = ModelManifold::hyperbolic(4);
  const auto hdisk = build_submanifold(H, {ChartKind::GeodesicDiskInHyperbolicSubspace, 0.4, {}}, {12, 0});
  DomainSpec ball;
  ball.kind = DomainKind::GeodesicBall;
  ball.r = 2.0;
  const auto db = build_target_domain(H, hdisk, ball, 300, 4);
  const double ref = oracle::sphere_area(3) * oracle::simpson([](double s) { return std::pow(std::sinh(s), 3); },
                                                              0.0, 1.0, 2000);
  CHECK(db.volume.value == doctest::Approx(ref).epsilon(1e-10));
  for (const auto& y : db.samples) CHECK(H.distance(db.center, y) <= 1.0 + 1e-12);

  // Annulus around a tiny disk approximates the shell between sigma r and r.
  const auto E = ModelManifold::euclidean(4);
  const auto dot = flat_disk(1e-3, 4);
  DomainSpec ann;
  ann.kind = DomainKind::AnnulusAroundSigma;
  ann.sigma = 0.5;
  ann.r = 1.0;
  const auto da = build_target_domain(E, dot, ann, 4000, 5);
  const double shell = oracle::ball_volume(4) * (1.0 - std::pow(0.5, 4));
  CHECK(da.volume.value == doctest::Approx(shell).epsilon(1e-2));
  CHECK(da.volume.method == "quasi-monte-carlo");
  CHECK(da.volume.lower_bound <= da.volume.value);
  CHECK(da.volume.lower_bound > 0.0);
  const NodeDistances nd(dot);
  for (const auto& y : da.samples) {
    const auto d = nd.all(y);
    CHECK(d.minCoeff() >= 0.5);
    CHECK(d.maxCoeff() <= 1.0);
  }
  CHECK(kind_of([&] { build_target_domain(S, cap, ann, 10, 1); }) == ErrorKind::Unsupported);
  CHECK(kind_of([&] { build_target_domain(E, dot, whole, 10, 1); }) == ErrorKind::UnboundedDomain);
  ann.sigma = 1.0;
  CHECK(kind_of([&] { build_target_domain(E, dot, ann, 10, 1); }) == ErrorKind::HypothesisViolation);
}

TEST_CASE("scale covariance and homogeneity") {
  const auto M = ModelManifold::euclidean(4);
  // f(u) = g(u / rho): both sides scale like rho, the ratio is invariant.
  std::vector<double> ratios;
  for (const double rho : {0.7, 1.0, 3.0}) {
    const auto mesh = flat_disk(rho, 16);
    const auto f = ScalarField::from_function(
        mesh, [rho](const Param& u) { return std::exp(0.4 * u[0] / rho - 0.2 * u[1] / rho); },
        [rho](const Param& u) {
          const double e = std::exp(0.4 * u[0] / rho - 0.2 * u[1] / rho);
          return Param(0.4 * e / rho, -0.2 * e / rho);
        });
    ratios.push_back(evaluate_inequality(M, mesh, f, params_for(InequalityKind::NonNegLimit)).ratio);
  }
  CHECK(std::abs(ratios[1] - ratios[0]) <= 1e-10);
  CHECK(std::abs(ratios[2] - ratios[0]) <= 1e-10);
  CHECK(ratios[0] < 1.0);

  const auto mesh = flat_disk(1.0, 16);
  auto fn = [](const Param& u) { return 1.0 + 0.5 * u[0] * u[0]; };
  auto gr = [](const Param& u) { return Param(u[0], 0.0); };
  const auto one = evaluate_inequality(M, mesh, ScalarField::from_function(mesh, fn, gr),
                                       params_for(InequalityKind::NonNegLimit));
  const auto two = evaluate_inequality(
      M, mesh, ScalarField::from_function(mesh, [&](const Param& u) { return 2.0 * fn(u); },
                                          [&](const Param& u) { return Param(2.0 * gr(u)); }),
      params_for(InequalityKind::NonNegLimit));
  CHECK(two.lhs == doctest::Approx(2.0 * one.lhs).epsilon(1e-13));
  CHECK(two.rhs == doctest::Approx(2.0 * one.rhs).epsilon(1e-13));
  CHECK(two.ratio == doctest::Approx(one.ratio).epsilon(1e-13));
}

TEST_CASE("tube variant tends to the closed one as eps -> 0") {
  const auto M = ModelManifold::sphere(4);
  const auto mesh = build_submanifold(M, {ChartKind::GeodesicBallInSubsphere, oracle::pi / 4, {}}, {16, 0});
  const auto f = ScalarField::constant(mesh, 1.0);
  const double closed = evaluate_inequality(M, mesh, f, params_for(InequalityKind::ClosedPositive)).ratio;
  double prev = 1e300;
  for (const double eps : {0.2, 0.05, 0.01}) {
    auto p = params_for(InequalityKind::PositiveTube);
    p.eps = eps;
    p.volume_samples = 20000;
    const auto rep = evaluate_inequality(M, mesh, f, p);
    const double gap = std::abs(rep.ratio - closed);
    INFO("eps = " << eps);
    CHECK(gap <= prev + 1e-6);
    prev = gap;
  }
  CHECK(prev <= 1e-3);
}

TEST_CASE("sharpness scans") {
  const auto flat = sharpness_scan(ScanFamily::FlatDiskRadius, {0.5, 1.0, 2.0});
  REQUIRE(flat.rows.size() == 3);
  for (const auto& row : flat.rows) CHECK(std::abs(row.report.ratio - 1.0) <= 1e-3);
  CHECK(std::abs(flat.max_ratio - 1.0) <= 1e-3);

  const auto hyp = sharpness_scan(ScanFamily::HyperbolicRadius, {1.0, 2.0, 4.0});
  REQUIRE(hyp.rows.size() == 3);
  CHECK(hyp.rows[1].report.ratio < hyp.rows[0].report.ratio);
  CHECK(hyp.rows[2].report.ratio < hyp.rows[1].report.ratio);
  CHECK(hyp.argmax == 1.0);
  for (const auto& row : hyp.rows) CHECK(row.report.passed);

  const auto cap = sharpness_scan(ScanFamily::GeodesicBall, {0.25, 0.5, 1.0});
  for (const auto& row : cap.rows) CHECK(row.report.ratio < 1.0);
  CHECK(scan_family_from_name(scan_family_name(ScanFamily::TubeRadius)) == ScanFamily::TubeRadius);
  CHECK(kind_of([] { scan_family_from_name("nope"); }) == ErrorKind::ParseError);
}

TEST_CASE("integration by parts bound") {
  const auto mesh = flat_disk(1.0, 24);
  const auto f = ScalarField::constant(mesh, 1.0);
  // Hess phi = +I: -int f Delta phi = -2 pi is below any nonnegative bound.
  std::vector<double> convex, concave;
  for (const auto& node : mesh.nodes) {
    const double r2 = node.geometry.point.head(2).squaredNorm();
    convex.push_back(0.5 * r2);
    concave.push_back(-2.0 * r2);
  }
  const auto ok = integration_by_parts_check(mesh, f, convex, 1.0);
  CHECK(ok.lhs == doctest::Approx(-2.0 * oracle::pi).epsilon(1e-2));
  CHECK(ok.rhs == doctest::Approx(2.0 * oracle::pi).epsilon(1e-12));
  CHECK(ok.slack == doctest::Approx(0.05 * ok.rhs));
  CHECK(ok.passed);
  // Hess phi = -4 I gives 8 pi against the bound 2 pi.
  const auto bad = integration_by_parts_check(mesh, f, concave, 1.0);
  CHECK(bad.lhs == doctest::Approx(8.0 * oracle::pi).epsilon(1e-2));
  CHECK_FALSE(bad.passed);
  CHECK(kind_of([&] { integration_by_parts_check(mesh, f, {1.0}, 1.0); }) == ErrorKind::LengthMismatch);
}

TEST_CASE("variant names round trip") {
  for (auto k : {InequalityKind::NonNegLimit, InequalityKind::NonNegFinite, InequalityKind::ClosedPositive,
                 InequalityKind::PositiveTube, InequalityKind::NegativeLocal}) {
    CHECK(inequality_kind_from_name(inequality_kind_name(k)) == k);
  }
  for (auto k : {DomainKind::AnnulusAroundSigma, DomainKind::WholeManifold, DomainKind::ComplementOfTube,
                 DomainKind::GeodesicBall}) {
    CHECK(domain_kind_from_name(domain_kind_name(k)) == k);
  }
}
