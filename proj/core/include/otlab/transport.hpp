#pragma once

// Discrete optimal transport for the cost c(x, y) = d(x, y)^2 / 2 between
// surface quadrature nodes and ambient domain samples.

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

#include "otlab/geometry.hpp"
#include "otlab/submanifold.hpp"

namespace otlab {

enum class Provenance { SubmanifoldNodes, DomainSamples, Other };

struct DiscreteMeasure {
  std::vector<Vector> points;
  std::vector<double> weights;  // > 0, sum 1
  Provenance provenance = Provenance::Other;

  /// Normalizes the weights and drops zero-weight points. Throws LengthMismatch
  /// or EmptyDomain.
  static DiscreteMeasure make(std::vector<Vector> points, std::vector<double> weights,
                              Provenance provenance = Provenance::Other);
  int size() const noexcept { return static_cast<int>(points.size()); }
};

/// c_ij = d(x_i, y_j)^2 / 2. Propagates CutLocus for antipodal sphere pairs.
Matrix cost_matrix(const ModelManifold& M, const DiscreteMeasure& source, const DiscreteMeasure& target);

enum class SolverKind { Exact, Entropic };

struct PlanEntry {
  int i = 0;
  int j = 0;
  double mass = 0.0;
};

struct DiscreteCoupling {
  std::vector<double> source_weights;
  std::vector<double> target_weights;
  std::vector<PlanEntry> plan;  // sorted by (i, j)
  double cost = 0.0;
  Vector phi;  // source potentials
  Vector psi;  // target potentials, phi_i + psi_j <= c_ij
  SolverKind solver = SolverKind::Exact;
  double regularization = 0.0;
  double duality_gap = 0.0;
  double marginal_residual = 0.0;  // max abs row/column deviation
  bool converged = true;
  int iterations = 0;

  int sources() const noexcept { return static_cast<int>(source_weights.size()); }
  int targets() const noexcept { return static_cast<int>(target_weights.size()); }
  /// Smallest marginal weight times 1e-12.
  double atom_floor() const;
};

struct ExactOptions {
  int max_sources = 500;
  int max_targets = 2000;
};

/// Network simplex on the transportation problem. Throws SizeCap.
DiscreteCoupling solve_exact(const std::vector<double>& mu, const std::vector<double>& nu, const Matrix& C,
                             const ExactOptions& options = {});

struct EntropicOptions {
  double regularization = 0.0;  // 0 selects 5e-3 * mean(C)
  int max_iter = 20000;
  double stop_tol = 1e-9;
};

/// Log-domain Sinkhorn with regularization scaling. On stalling returns the
/// partial coupling with converged = false.
DiscreteCoupling solve_entropic(const std::vector<double>& mu, const std::vector<double>& nu, const Matrix& C,
                                const EntropicOptions& options = {});

enum class TransformDirection {
  ToTarget,  // psi_j = min_i c_ij - phi_i
  ToSource,  // phi_i = min_j c_ij - psi_j
};

Vector c_transform(const Vector& values, const Matrix& C, TransformDirection direction);

struct CertificationReport {
  Vector phi;    // double c-transform of the solver duals
  Vector phi_c;  // its c-transform on the targets
  double worst_violation = 0.0;
  int atoms_checked = 0;
  double tolerance = 0.0;
  bool passed = true;
};

/// Enforces c-concavity, then checks phi_i + phi^c_j >= c_ij - tol on every
/// atom above the floor. Throws CertificationFailed when raise_on_failure.
CertificationReport certify_support(const DiscreteCoupling& coupling, const Matrix& C, double tol,
                                    bool raise_on_failure = true);

/// phi extended from the target side: phi(y) = min_j d(y, zeta_j)^2 / 2 - phi^c_j.
double c_concave_value(const ModelManifold& M, const std::vector<Vector>& targets, const Vector& phi_c,
                       const Vector& y);

struct PotentialGradient {
  std::vector<Vector> gradient;  // ambient tangent vectors at the nodes
  std::vector<double> reach;     // max_j d(x, zeta_j)
  std::vector<bool> flagged;     // |grad| exceeded reach and was capped
  int flagged_count = 0;
};

PotentialGradient potential_gradient_on_sigma(const SubmanifoldMesh& mesh, const std::vector<double>& phi,
                                              const std::vector<Vector>& targets);

struct FiberAtom {
  int target = 0;
  Vector normal;  // normal part of log_x zeta
  double tangential_residual = 0.0;
  double mass = 0.0;
};

struct FiberReconstruction {
  std::vector<std::vector<FiberAtom>> fibers;  // per source node
  std::vector<double> residuals;               // one per atom, in plan order
  double median = 0.0;
  double p90 = 0.0;
  double max = 0.0;
  double max_normal_leak = 0.0;  // largest tangential component left in a stored normal
};

/// tau = |(log_x zeta)^T + grad phi(x)| for every plan atom.
FiberReconstruction tangency_residuals(const ModelManifold& M, const SubmanifoldMesh& mesh,
                                       const DiscreteCoupling& coupling, const std::vector<Vector>& targets,
                                       const std::vector<Vector>& grad_phi);

struct FiberMassReport {
  std::vector<double> residual;  // |sum_j pi_ij - mu_i|
  std::vector<double> proxy;     // sum_j pi_ij * vol(Omega)
  double max_residual = 0.0;
};

FiberMassReport fiber_mass_residual(const SubmanifoldMesh& mesh, const DiscreteCoupling& coupling,
                                    const FiberReconstruction& fiber, double domain_volume);

/// b(s) = s coth s, b(0) = 1.
double coth_profile(double s);

struct SemiconcavityReport {
  double worst_margin = 0.0;  // min over (node, direction) of bound + slack - second difference
  int worst_node = -1;
  double max_second_difference = 0.0;
  int checks = 0;
  bool passed = true;
};

/// Second differences of the c-concave extension of phi along surface
/// geodesics with step s = 2h, against 2 b(d sqrt(-k) / 2) + d |II(e, e)|.
SemiconcavityReport semiconcavity_check(const ModelManifold& M, const SubmanifoldMesh& mesh,
                                        const DiscreteCoupling& coupling, const std::vector<Vector>& targets,
                                        const Vector& phi_c, double k_lower, double slack);

std::string solver_name(SolverKind kind);

}  // namespace otlab
