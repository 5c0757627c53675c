#pragma once

// Both sides of the Michael-Simon-Sobolev inequalities with their exact
// constants, the target domains the transport argument pushes mass into, and
// parameter scans over built-in families.

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "otlab/geometry.hpp"
#include "otlab/submanifold.hpp"

namespace otlab {

enum class DomainKind { AnnulusAroundSigma, WholeManifold, ComplementOfTube, GeodesicBall };

std::string domain_kind_name(DomainKind kind);
DomainKind domain_kind_from_name(const std::string& name);

struct DomainSpec {
  DomainKind kind = DomainKind::WholeManifold;
  double sigma = 0.5;          // annulus inner ratio, 0 < sigma < 1
  double r = 1.0;              // annulus outer radius; the geodesic ball has radius r / 2
  double eps = 0.1;            // tube radius
  std::optional<Vector> center;  // x0; defaults to the chart center
  int volume_samples = 100000;   // Monte Carlo budget for vol(N_eps)
};

struct VolumeRecord {
  std::string name;
  double value = 0.0;
  double error = 0.0;        // one standard error; 0 when analytic
  bool analytic = true;
  std::string method;        // "analytic", "monte-carlo", "quasi-monte-carlo"
  double lower_bound = 0.0;  // analytic containment bound, when one exists
};

struct TargetDomain {
  DomainSpec spec;
  Vector center;
  std::vector<Vector> samples;
  std::vector<double> weights;  // uniform, sum 1
  VolumeRecord volume;
  long candidates = 0;          // draws consumed, rejected ones included
};

/// Samples satisfy the defining distance constraints against every stored
/// mesh point. Throws EmptyDomain, Unsupported, HypothesisViolation.
TargetDomain build_target_domain(const ModelManifold& M, const SubmanifoldMesh& mesh, const DomainSpec& spec,
                                 int samples, std::uint64_t seed);

/// Chart center of the mesh (parameter origin).
Vector chart_center(const SubmanifoldMesh& mesh);

enum class InequalityKind { NonNegLimit, NonNegFinite, ClosedPositive, PositiveTube, NegativeLocal };

std::string inequality_kind_name(InequalityKind kind);
InequalityKind inequality_kind_from_name(const std::string& name);

struct InequalityParams {
  InequalityKind kind = InequalityKind::NonNegLimit;
  std::optional<double> theta;  // asymptotic volume ratio; analytic when absent
  double sigma = 0.5;
  double r = 1.0;
  double eps = 0.1;
  std::optional<double> k1;     // curvature constants; default to the model curvature
  std::optional<double> k2;
  std::optional<Vector> center;
  bool lift = false;            // allow m = 1 through M x R
  double report_tol = 0.02;
  int volume_samples = 100000;
  int domain_samples = 4000;
  std::uint64_t seed = 1;
};

struct InequalityTerms {
  double integral_f = 0.0;
  double integral_f_power = 0.0;  // int f^{n/(n-1)}
  double integral_gradient = 0.0;
  double integral_boundary = 0.0;
  double integral_mean_curvature = 0.0;  // int f |H|
  double area = 0.0;
  double boundary_length = 0.0;
};

/// Quadrature of every integral appearing in the inequalities. Throws
/// NonPositiveField.
InequalityTerms compute_terms(const SubmanifoldMesh& mesh, const ScalarField& f);

struct InequalityReport {
  InequalityKind kind = InequalityKind::NonNegLimit;
  InequalityParams params;
  int n = 2;
  int m = 2;
  bool lifted = false;
  InequalityTerms terms;
  std::vector<std::pair<std::string, double>> constants;  // in display order
  std::vector<VolumeRecord> volumes;
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
  bool passed = true;  // ratio <= 1 + report_tol
};

/// Checks the hypotheses of the variant, then assembles LHS and RHS. A
/// prebuilt domain supplies vol(Omega) or vol(M \ N_eps); otherwise the
/// volume is computed here. Throws HypothesisViolation.
InequalityReport evaluate_inequality(const ModelManifold& M, const SubmanifoldMesh& mesh, const ScalarField& f,
                                     const InequalityParams& params, const TargetDomain* domain = nullptr);

/// Codimension-one surface viewed in M x R.
std::pair<ModelManifold, SubmanifoldMesh> hypersurface_lift(const ModelManifold& M, const SubmanifoldMesh& mesh);

enum class ScanFamily {
  FlatDiskRadius,   // disk of radius p in R^4, NonNegLimit
  GeodesicBall,     // ball of radius p in S^2 inside unit S^4, ClosedPositive
  TubeRadius,       // ball of radius pi/4 in unit S^4, PositiveTube with eps = p
  HyperbolicRadius, // disk of radius 0.4 in H^2 inside H^4, NegativeLocal with r = p
};

std::string scan_family_name(ScanFamily family);
ScanFamily scan_family_from_name(const std::string& name);

struct ScanOptions {
  int radial_cells = 24;
  int volume_samples = 100000;
  std::uint64_t seed = 1;
};

struct ScanRow {
  double parameter = 0.0;
  InequalityReport report;
};

struct ScanTable {
  ScanFamily family = ScanFamily::FlatDiskRadius;
  std::vector<ScanRow> rows;  // grid order
  double max_ratio = 0.0;
  double argmax = 0.0;
};

ScanTable sharpness_scan(ScanFamily family, const std::vector<double>& grid, const ScanOptions& options = {});

struct IbpReport {
  double lhs = 0.0;    // -int f Delta phi, discrete Hessian trace
  double rhs = 0.0;    // r (int_{dSigma} f + int |grad f|)
  double slack = 0.0;  // 0.05 rhs
  double margin = 0.0; // rhs + slack - lhs
  bool passed = true;
};

/// Report-only check of the integration-by-parts bound for a node potential.
IbpReport integration_by_parts_check(const SubmanifoldMesh& mesh, const ScalarField& f,
                                     const std::vector<double>& phi, double r_bound);

}  // namespace otlab
