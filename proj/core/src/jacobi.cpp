#include "otlab/jacobi.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <type_traits>

#include "otlab/error.hpp"

namespace otlab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double tanc(double x) {
  if (std::abs(x) < 1e-4) return 1.0 + x * x / 3.0;
  return std::tan(x) / x;
}

}  // namespace

JacobiInitial initial_conditions(const ModelManifold& M, const NodeGeometry& g, const Vector& v,
                                 const Matrix& hess, const Vector& grad_phi) {
  const int n = static_cast<int>(g.tangent.size());
  const int m = static_cast<int>(g.normal.size());
  if (hess.rows() != n || hess.cols() != n) raise(ErrorKind::LengthMismatch, "Hessian must be n x n");
  const double asym = (hess - hess.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-8) raise(ErrorKind::NonSymmetricHessian, "Hessian asymmetry " + std::to_string(asym));

  JacobiInitial out;
  out.P0 = Matrix::Zero(n + m, n + m);
  out.P0.topLeftCorner(n, n).setIdentity();
  out.dP0 = Matrix::Zero(n + m, n + m);
  Matrix upper = -0.5 * (hess + hess.transpose());
  for (int b = 0; b < m; ++b) upper -= M.inner(v, g.normal[b]) * g.sff[b];
  out.dP0.topLeftCorner(n, n) = upper;
  Eigen::VectorXd gc(n);
  for (int j = 0; j < n; ++j) gc[j] = M.inner(grad_phi, g.tangent[j]);
  for (int b = 0; b < m; ++b) out.dP0.block(0, n + b, n, 1) = -(g.sff[b] * gc);
  out.dP0.bottomRightCorner(m, m).setIdentity();
  return out;
}

JacobiInitial initial_conditions(const SubmanifoldMesh& mesh, int node, const Vector& v, const Matrix& hess,
                                 const Vector& grad_phi) {
  return initial_conditions(mesh.manifold, geometry_at_node(mesh, node), v, hess, grad_phi);
}

JacobiTrajectory propagate(const ModelManifold& M, const ParallelFrame& frame, const Matrix& P0,
                           const Matrix& dP0, int steps, double laplacian, double mean_curvature_v) {
  if (steps < 100) raise(ErrorKind::Unsupported, "Jacobi propagation needs at least 100 steps");
  const int d = frame.size();
  if (P0.rows() != d || P0.cols() != d || dP0.rows() != d || dP0.cols() != d) {
    raise(ErrorKind::LengthMismatch, "initial data must match the frame size");
  }
  JacobiTrajectory traj;
  traj.frame = frame;
  traj.n = frame.tangent_count;
  traj.m = d - frame.tangent_count;
  traj.steps = steps;
  traj.laplacian = laplacian;
  traj.mean_curvature_v = mean_curvature_v;
  traj.S = curvature_matrix(M, frame, 0.0);
  const Matrix& S = traj.S;

  const double h = 1.0 / steps;
  Matrix P = P0;
  Matrix V = dP0;
  traj.t.reserve(steps + 1);
  traj.P.reserve(steps + 1);
  traj.dP.reserve(steps + 1);
  auto record = [&](double t) {
    traj.t.push_back(t);
    traj.P.push_back(P);
    traj.dP.push_back(V);
    const double det = P.determinant();
    traj.det.push_back(det);
    const Matrix W = V * P.transpose();
    traj.symmetry_residual = std::max(traj.symmetry_residual, (W - W.transpose()).cwiseAbs().maxCoeff());
    Eigen::JacobiSVD<Matrix> svd(P);
    const auto& sv = svd.singularValues();
    const double cond = sv[d - 1] > 0.0 ? sv[0] / sv[d - 1] : std::numeric_limits<double>::infinity();
    if (cond < 1e12) {
      Matrix Q = P.partialPivLu().solve(V);
      traj.q_symmetry_residual =
          std::max(traj.q_symmetry_residual, (Q - Q.transpose()).cwiseAbs().maxCoeff());
      traj.trQ1.push_back(Q.topLeftCorner(traj.n, traj.n).trace());
      traj.trQ3.push_back(Q.bottomRightCorner(traj.m, traj.m).trace());
      traj.Q.push_back(std::move(Q));
    } else {
      traj.trQ1.push_back(kNaN);
      traj.trQ3.push_back(kNaN);
      traj.Q.emplace_back();
    }
  };
  record(0.0);
  for (int k = 0; k < steps; ++k) {
    // y = (P, V), y' = (V, -P S)
    const Matrix k1p = V;
    const Matrix k1v = -P * S;
    const Matrix k2p = V + 0.5 * h * k1v;
    const Matrix k2v = -(P + 0.5 * h * k1p) * S;
    const Matrix k3p = V + 0.5 * h * k2v;
    const Matrix k3v = -(P + 0.5 * h * k2p) * S;
    const Matrix k4p = V + h * k3v;
    const Matrix k4v = -(P + h * k3p) * S;
    P += (h / 6.0) * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
    V += (h / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
    record((k + 1) * h);
    if (!(traj.det.back() > 0.0)) {
      raise(ErrorKind::SingularP, "det P reaches " + std::to_string(traj.det.back()) + " at t = " +
                                      std::to_string(traj.t.back()));
    }
  }
  return traj;
}

MonotonicityReport monotonicity_profile(const JacobiTrajectory& traj, double rel_tol) {
  MonotonicityReport rep;
  const double a = traj.a();
  for (int k = traj.trim; k < traj.steps; ++k) {
    const double t = traj.t[k];
    const double base = 1.0 - t * a / traj.n;
    if (!(base > 0.0)) {
      raise(ErrorKind::DenominatorVanishes, "1 - t a / n = " + std::to_string(base) + " at t = " +
                                                std::to_string(t));
    }
    rep.t.push_back(t);
    rep.profile.push_back(std::pow(t, -traj.m) * std::pow(base, -traj.n) * traj.det[k]);
  }
  const double scale = rep.profile.front();
  for (std::size_t k = 1; k < rep.profile.size(); ++k) {
    rep.max_increase = std::max(rep.max_increase, (rep.profile[k] - rep.profile[k - 1]) / scale);
  }
  rep.nonincreasing = rep.max_increase <= rel_tol;
  return rep;
}

JacobianBoundReport jacobian_bound_check(const JacobiTrajectory& traj, double rel_slack, double norm_tol) {
  JacobianBoundReport rep;
  const double a = traj.a();
  const int k0 = traj.trim;
  const double t0 = traj.t[k0];
  rep.normalization = std::pow(t0, -traj.m) * traj.det[k0];
  auto profile = [&](int k) {
    const double t = traj.t[k];
    return std::pow(t, -traj.m) * std::pow(1.0 - t * a / traj.n, -traj.n) * traj.det[k];
  };
  // The profile is 1 + O(t^2); eliminate the quadratic term.
  rep.normalization_limit = (4.0 * profile(k0) - profile(2 * k0)) / 3.0;
  if (!(std::abs(rep.normalization_limit - 1.0) <= norm_tol)) {
    raise(ErrorKind::NormalizationDrift,
          "t -> 0 limit of t^{-m} det P estimated at " + std::to_string(rep.normalization_limit));
  }
  const double base = 1.0 - a / traj.n;
  if (!(base >= 0.0)) raise(ErrorKind::DenominatorVanishes, "1 - a / n is negative");
  rep.det_end = traj.det.back();
  rep.bound = std::pow(base, traj.n);
  rep.margin = rep.bound - rep.det_end;
  rep.passed = rep.margin >= -rel_slack * rep.bound;
  return rep;
}

LaplacianBoundReport lap_lower_bound_check(const JacobiTrajectory& traj, double slack_fraction) {
  LaplacianBoundReport rep;
  rep.value = traj.n - traj.a();
  rep.slack = slack_fraction * traj.n;
  rep.passed = rep.value >= -rep.slack;
  return rep;
}

double ComparisonProfile::g1(double t) const {
  switch (kind) {
    case CurvatureCase::NonNeg: return kNaN;
    case CurvatureCase::Positive: return -t * alpha1 + std::atan(-a / (n * alpha1));
    case CurvatureCase::Negative: return t * alpha1 + std::atanh(-a / (n * alpha1));
  }
  return kNaN;
}

double ComparisonProfile::g2(double t) const {
  switch (kind) {
    case CurvatureCase::NonNeg: return kNaN;
    case CurvatureCase::Positive: return -t * alpha2 + 0.5 * std::numbers::pi;
    case CurvatureCase::Negative: return t * alpha2;
  }
  return kNaN;
}

double ComparisonProfile::trq1(double t) const {
  switch (kind) {
    case CurvatureCase::NonNeg: return -a / (1.0 - t * a / n);
    case CurvatureCase::Positive:
      // n alpha1 tan(G1(t)), written to stay smooth as alpha1 -> 0.
      return (-a - n * alpha1 * std::tan(alpha1 * t)) / (1.0 - (a / n) * t * tanc(alpha1 * t));
    case CurvatureCase::Negative: return n * alpha1 * std::tanh(g1(t));
  }
  return kNaN;
}

double ComparisonProfile::trq3(double t) const {
  switch (kind) {
    case CurvatureCase::NonNeg: return m / t;
    case CurvatureCase::Positive: return m / (t * tanc(alpha2 * t));  // m alpha2 cot(alpha2 t)
    case CurvatureCase::Negative: {
      const double x = alpha2 * t;
      return m / (t * std::tanh(x) / x);  // m alpha2 coth(alpha2 t)
    }
  }
  return kNaN;
}

double ComparisonProfile::det(double t) const {
  switch (kind) {
    case CurvatureCase::NonNeg: return std::pow(1.0 - t * a / n, n) * std::pow(t, m);
    case CurvatureCase::Positive:
      return std::pow(std::cos(alpha1 * t) - (a / n) * t * sinc(alpha1 * t), n) *
             std::pow(t * sinc(alpha2 * t), m);
    case CurvatureCase::Negative:
      return std::pow(std::cosh(alpha1 * t) - (a / n) * t * sinhc(alpha1 * t), n) *
             std::pow(t * sinhc(alpha2 * t), m);
  }
  return kNaN;
}

ComparisonProfile comparison_profiles(CurvatureCase kind, double k1, double k2, double scale, double laplacian,
                                      double mean_curvature_v, int n, int m) {
  ComparisonProfile p;
  p.kind = kind;
  p.n = n;
  p.m = m;
  p.a = laplacian + mean_curvature_v;
  p.k1 = k1;
  p.k2 = k2;
  p.scale = scale;
  switch (kind) {
    case CurvatureCase::NonNeg:
      if (!(1.0 - p.a / n > 0.0)) raise(ErrorKind::ArgOutOfDomain, "1 - a/n must be positive");
      break;
    case CurvatureCase::Positive: {
      if (!(k1 > 0.0 && k2 > 0.0 && scale > 0.0)) {
        raise(ErrorKind::ArgOutOfDomain, "positive case needs k1, k2, eps > 0");
      }
      p.alpha1 = scale * std::sqrt(k1 * (n - 1.0) / n);
      p.alpha2 = scale * std::sqrt(k2 * (m - 1.0) / m);
      // G1 decreases from atan(-a/(n alpha1)); it must stay above -pi/2 on (0, 1].
      const double end = std::cos(p.alpha1) - (p.a / n) * sinc(p.alpha1);
      if (!(p.alpha1 < std::numbers::pi && end > 0.0)) {
        raise(ErrorKind::ArgOutOfDomain, "G1 leaves (-pi/2, pi/2) before t = 1");
      }
      if (!(p.alpha2 < std::numbers::pi)) raise(ErrorKind::ArgOutOfDomain, "G2 leaves (-pi/2, pi/2]");
      break;
    }
    case CurvatureCase::Negative: {
      if (!(k1 < 0.0 && k2 < 0.0 && scale > 0.0)) {
        raise(ErrorKind::ArgOutOfDomain, "negative case needs k1, k2 < 0 and r > 0");
      }
      p.alpha1 = scale * std::sqrt(-k1);
      p.alpha2 = scale * std::sqrt(-k2);
      if (!(std::abs(p.a / (n * p.alpha1)) < 1.0)) {
        raise(ErrorKind::ArgOutOfDomain, "|atanh argument| >= 1");
      }
      break;
    }
  }
  return p;
}

TraceComparisonReport trace_comparison_check(const JacobiTrajectory& traj, const ComparisonProfile& profile,
                                             double tol, double ode_tol) {
  TraceComparisonReport rep;
  const int n = traj.n;
  const int m = traj.m;
  const int d = n + m;
  const double h = 1.0 / traj.steps;
  rep.worst_q1 = rep.worst_q3 = -std::numeric_limits<double>::infinity();
  rep.cauchy_schwarz_q1 = rep.cauchy_schwarz_q3 = -std::numeric_limits<double>::infinity();
  rep.det_margin = std::numeric_limits<double>::infinity();
  Matrix Pi = Matrix::Zero(d, d);
  Pi.bottomRightCorner(m, m).setIdentity();
  const double trS1 = traj.S.topLeftCorner(n, n).trace();
  const double trS3 = traj.S.bottomRightCorner(m, m).trace();
  auto regular = [&](int k) -> Matrix { return traj.Q[k] - Pi / traj.t[k]; };

  for (int k = traj.trim; k <= traj.steps; ++k) {
    const double t = traj.t[k];
    rep.det_margin = std::min(rep.det_margin, profile.det(t) - traj.det[k]);
    if (traj.Q[k].size() == 0) continue;
    rep.worst_q1 = std::max(rep.worst_q1, traj.trQ1[k] - profile.trq1(t));
    rep.worst_q3 = std::max(rep.worst_q3, traj.trQ3[k] - profile.trq3(t));
    if (k < traj.trim + 4 || k > traj.steps - 4) continue;
    bool defined = true;
    for (int o = -4; o <= 4; ++o) defined = defined && traj.Q[k + o].size() != 0;
    if (!defined) continue;
    // Eighth-order central differences: near a focal point just past t = 1 the
    // high derivatives of Q grow like |Q|^j, and lower orders leave 1e-5 errors.
    auto ddt = [&](auto&& g) {
      using T = std::decay_t<decltype(g(k))>;
      static constexpr double c[4] = {4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0};
      T acc = T(c[0] * (g(k + 1) - g(k - 1)));
      for (int o = 2; o <= 4; ++o) acc = T(acc + c[o - 1] * (g(k + o) - g(k - o)));
      return T(acc / h);
    };
    // R = Q - Pi/t satisfies R' + S + R^2 + (R Pi + Pi R)/t = 0.
    const Matrix R = regular(k);
    const Matrix dR = ddt([&](int j) -> Matrix { return regular(j); });
    const Matrix res = dR + traj.S + R * R + (R * Pi + Pi * R) / t;
    rep.riccati_residual = std::max(rep.riccati_residual, res.cwiseAbs().maxCoeff());
    const double dq1 = ddt([&](int j) { return traj.trQ1[j]; });
    rep.cauchy_schwarz_q1 = std::max(rep.cauchy_schwarz_q1, dq1 + trS1 + traj.trQ1[k] * traj.trQ1[k] / n);
    // tr R3 = trQ3 - m/t: tr R3' <= -tr S3 - (tr R3)^2/m - 2 tr R3 / t.
    const double r3 = traj.trQ3[k] - m / t;
    const double dr3 = ddt([&](int j) { return traj.trQ3[j] - m / traj.t[j]; });
    rep.cauchy_schwarz_q3 = std::max(rep.cauchy_schwarz_q3, dr3 + trS3 + r3 * r3 / m + 2.0 * r3 / t);
  }
  rep.passed = rep.worst_q1 <= tol && rep.worst_q3 <= tol && rep.riccati_residual <= ode_tol &&
               rep.cauchy_schwarz_q1 <= 1e-5 && rep.cauchy_schwarz_q3 <= 1e-5;
  return rep;
}

}  // namespace otlab
