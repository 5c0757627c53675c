#pragma once

// Matrix Jacobi fields P'' = -P S along t -> exp(x, t(-grad phi + v)) in a
// parallel frame (e_1..e_n, nu_1..nu_m), the Riccati matrix Q = P^{-1} P', and
// the comparison envelopes for its block traces.

#include <Eigen/Dense>

#include <vector>

#include "otlab/geometry.hpp"
#include "otlab/submanifold.hpp"

namespace otlab {

struct JacobiInitial {
  Matrix P0;
  Matrix dP0;
};

/// P(0) = diag(I_n, 0); P'(0) = [[-Hess - <II, v>, -II(e_i, grad phi)], [0, I_m]].
/// Throws NonSymmetricHessian.
JacobiInitial initial_conditions(const ModelManifold& M, const NodeGeometry& g, const Vector& v,
                                 const Matrix& hess, const Vector& grad_phi);
JacobiInitial initial_conditions(const SubmanifoldMesh& mesh, int node, const Vector& v, const Matrix& hess,
                                 const Vector& grad_phi);

struct JacobiTrajectory {
  ParallelFrame frame;
  int n = 0;
  int m = 0;
  int steps = 0;
  int trim = 10;  // first sample of the window [t0, 1), t0 = trim / steps
  Matrix S;       // constant in the parallel frame on model spaces
  std::vector<double> t;
  std::vector<Matrix> P;
  std::vector<Matrix> dP;
  std::vector<Matrix> Q;      // empty where cond(P) >= 1e12
  std::vector<double> det;
  std::vector<double> trQ1;   // NaN where Q is undefined
  std::vector<double> trQ3;
  double laplacian = 0.0;     // discrete trace of Hess phi
  double mean_curvature_v = 0.0;  // <H, v>
  double symmetry_residual = 0.0;  // max |P'P^T - P P'^T|
  double q_symmetry_residual = 0.0;

  double a() const noexcept { return laplacian + mean_curvature_v; }
  double t0() const noexcept { return static_cast<double>(trim) / steps; }
};

/// Classical RK4 with `steps` uniform steps on [0, 1]. Throws SingularP when
/// det P changes sign on (0, 1], Unsupported when steps < 100.
JacobiTrajectory propagate(const ModelManifold& M, const ParallelFrame& frame, const Matrix& P0,
                           const Matrix& dP0, int steps, double laplacian = 0.0, double mean_curvature_v = 0.0);

struct MonotonicityReport {
  std::vector<double> t;
  std::vector<double> profile;  // t^{-m} (1 - t a / n)^{-n} det P on the window
  double max_increase = 0.0;    // largest successive increase relative to profile(t0)
  bool nonincreasing = true;
};

/// Throws DenominatorVanishes when 1 - t a / n <= 0 on the window.
MonotonicityReport monotonicity_profile(const JacobiTrajectory& traj, double rel_tol = 1e-6);

struct JacobianBoundReport {
  double det_end = 0.0;
  double bound = 0.0;           // (1 - a / n)^n
  double margin = 0.0;          // bound - det P(1)
  double normalization = 0.0;   // t0^{-m} det P(t0)
  double normalization_limit = 0.0;  // t -> 0 limit estimate from the profile at t0 and 2 t0
  bool passed = true;
};

/// det P(1) <= (1 - a/n)^n + slack. Throws NormalizationDrift when the t -> 0
/// limit estimate is off 1 by more than norm_tol.
JacobianBoundReport jacobian_bound_check(const JacobiTrajectory& traj, double rel_slack = 1e-3,
                                         double norm_tol = 1e-4);

struct LaplacianBoundReport {
  double value = 0.0;  // n - a
  double slack = 0.0;
  bool passed = true;
};

LaplacianBoundReport lap_lower_bound_check(const JacobiTrajectory& traj, double slack_fraction = 0.05);

enum class CurvatureCase { NonNeg, Positive, Negative };

/// Closed-form envelopes for tr Q1, tr Q3 and det P.
struct ComparisonProfile {
  CurvatureCase kind = CurvatureCase::NonNeg;
  int n = 2;
  int m = 2;
  double a = 0.0;       // Delta phi + <H, v>
  double k1 = 0.0;
  double k2 = 0.0;
  double scale = 0.0;   // epsilon (Positive) or r (Negative)
  double alpha1 = 0.0;  // eps sqrt(k1 (n-1)/n) or r sqrt(-k1)
  double alpha2 = 0.0;  // eps sqrt(k2 (m-1)/m) or r sqrt(-k2)

  double trq1(double t) const;
  double trq3(double t) const;
  double det(double t) const;
  double g1(double t) const;
  double g2(double t) const;
};

/// Throws ArgOutOfDomain when an envelope leaves its branch on (0, 1).
ComparisonProfile comparison_profiles(CurvatureCase kind, double k1, double k2, double scale, double laplacian,
                                      double mean_curvature_v, int n, int m);

struct TraceComparisonReport {
  double worst_q1 = 0.0;   // max trQ1 - envelope
  double worst_q3 = 0.0;
  double riccati_residual = 0.0;  // max |Q' + S + Q^2| on the window
  double cauchy_schwarz_q1 = 0.0;  // max of trQ1' + tr_n S + (trQ1)^2 / n
  double cauchy_schwarz_q3 = 0.0;
  double det_margin = 0.0;         // min of envelope - det P
  bool passed = true;
};

/// Pointwise envelope checks on the window plus a finite-difference Riccati
/// residual of the regular part Q - diag(0, I_m)/t.
TraceComparisonReport trace_comparison_check(const JacobiTrajectory& traj, const ComparisonProfile& profile,
                                             double tol, double ode_tol = 1e-6);

}  // namespace otlab
