#include "otlab/geometry.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "otlab/error.hpp"

namespace otlab {

namespace {

constexpr double kPi = std::numbers::pi;

// Integral of sin^k(t) over [0, a] by the reduction formula.
double sin_power_integral(int k, double a) {
  if (k == 0) return a;
  if (k == 1) return 1.0 - std::cos(a);
  return -std::pow(std::sin(a), k - 1) * std::cos(a) / k +
         (k - 1.0) / k * sin_power_integral(k - 2, a);
}

double sinh_power_integral(int k, double a) {
  if (k == 0) return a;
  if (k == 1) return std::cosh(a) - 1.0;
  return std::pow(std::sinh(a), k - 1) * std::cosh(a) / k -
         (k - 1.0) / k * sinh_power_integral(k - 2, a);
}

}  // namespace

double sinc(double x) {
  if (std::abs(x) < 1e-4) return 1.0 - x * x / 6.0 + x * x * x * x / 120.0;
  return std::sin(x) / x;
}

double sinhc(double x) {
  if (std::abs(x) < 1e-4) return 1.0 + x * x / 6.0 + x * x * x * x / 120.0;
  return std::sinh(x) / x;
}

ModelManifold ModelManifold::euclidean(int dim) {
  if (dim < 1) raise(ErrorKind::Unsupported, "dimension must be positive");
  return {Variant::Euclidean, dim, 0.0, false};
}

ModelManifold ModelManifold::sphere(int dim, double curvature) {
  if (dim < 1) raise(ErrorKind::Unsupported, "dimension must be positive");
  if (!(curvature > 0.0)) raise(ErrorKind::Unsupported, "sphere requires K > 0");
  return {Variant::Sphere, dim, curvature, false};
}

ModelManifold ModelManifold::hyperbolic(int dim, double curvature) {
  if (dim < 1) raise(ErrorKind::Unsupported, "dimension must be positive");
  if (!(curvature < 0.0)) raise(ErrorKind::Unsupported, "hyperbolic space requires K < 0");
  return {Variant::Hyperbolic, dim, curvature, false};
}

ModelManifold ModelManifold::product_with_line(const ModelManifold& base) {
  if (base.line_) raise(ErrorKind::Unsupported, "nested line products are not modeled");
  return {base.kind_, base.base_dim_, base.curvature_, true};
}

ModelManifold ModelManifold::base() const { return {kind_, base_dim_, curvature_, false}; }

double ModelManifold::radius() const noexcept {
  if (kind_ == Variant::Euclidean) return std::numeric_limits<double>::infinity();
  return 1.0 / std::sqrt(std::abs(curvature_));
}

double ModelManifold::base_inner(const Vector& a, const Vector& b) const {
  const int e = base_embedding_dim();
  double s = a.head(e).dot(b.head(e));
  if (kind_ == Variant::Hyperbolic) s -= 2.0 * a[0] * b[0];
  return s;
}

double ModelManifold::inner(const Vector& a, const Vector& b) const {
  double s = base_inner(a, b);
  if (line_) s += a[embedding_dim() - 1] * b[embedding_dim() - 1];
  return s;
}

double ModelManifold::norm(const Vector& v) const { return std::sqrt(std::max(0.0, inner(v, v))); }

Vector ModelManifold::origin() const {
  Vector x = Vector::Zero(embedding_dim());
  if (kind_ != Variant::Euclidean) x[0] = radius();
  return x;
}

Vector ModelManifold::origin_direction(int i) const {
  if (i < 0 || i >= dim()) raise(ErrorKind::IndexOutOfRange, "origin direction index");
  Vector e = Vector::Zero(embedding_dim());
  if (i < base_dim_) {
    e[kind_ == Variant::Euclidean ? i : i + 1] = 1.0;
  } else {
    e[embedding_dim() - 1] = 1.0;
  }
  return e;
}

Vector ModelManifold::project_tangent(const Vector& x, const Vector& w) const {
  Vector out = w;
  if (kind_ == Variant::Sphere || kind_ == Variant::Hyperbolic) {
    const int e = base_embedding_dim();
    const Vector xb = x.head(e);
    const double r2 = radius() * radius();
    // <x,x> = +R^2 on the sphere and -R^2 on the hyperboloid.
    const double xx = kind_ == Variant::Sphere ? r2 : -r2;
    out.head(e) -= (base_inner(x, w) / xx) * xb;
  }
  return out;
}

double ModelManifold::point_residual(const Vector& x) const {
  if (x.size() != embedding_dim()) return std::numeric_limits<double>::infinity();
  const double r2 = kind_ == Variant::Euclidean ? 0.0 : radius() * radius();
  switch (kind_) {
    case Variant::Sphere: return std::abs(base_inner(x, x) - r2) / r2;
    case Variant::Hyperbolic: {
      const double res = std::abs(base_inner(x, x) + r2) / r2;
      return x[0] > 0.0 ? res : std::numeric_limits<double>::infinity();
    }
    default: return 0.0;
  }
}

double ModelManifold::tangency_residual(const Vector& x, const Vector& v) const {
  if (kind_ == Variant::Euclidean) return 0.0;
  return std::abs(base_inner(x, v)) / (radius() * std::max(1.0, norm(v)));
}

Vector ModelManifold::geodesic_point(const Vector& x, const Vector& v, double t) const {
  Vector y = x + t * v;
  if (kind_ == Variant::Euclidean) return y;
  const int e = base_embedding_dim();
  const Vector xb = x.head(e);
  const Vector vb = v.head(e);
  const double s = std::sqrt(std::max(0.0, base_inner(vb, vb)));
  const double R = radius();
  const double tau = s * t / R;
  if (kind_ == Variant::Sphere) {
    // R sin(tau) / s = t sinc(tau)
    y.head(e) = std::cos(tau) * xb + t * sinc(tau) * vb;
  } else {
    y.head(e) = std::cosh(tau) * xb + t * sinhc(tau) * vb;
  }
  return y;
}

Vector ModelManifold::geodesic_velocity(const Vector& x, const Vector& v, double t) const {
  Vector w = v;
  if (kind_ == Variant::Euclidean) return w;
  const int e = base_embedding_dim();
  const Vector xb = x.head(e);
  const Vector vb = v.head(e);
  const double s = std::sqrt(std::max(0.0, base_inner(vb, vb)));
  const double R = radius();
  const double tau = s * t / R;
  if (kind_ == Variant::Sphere) {
    w.head(e) = -(s * s * t / (R * R)) * sinc(tau) * xb + std::cos(tau) * vb;
  } else {
    w.head(e) = (s * s * t / (R * R)) * sinhc(tau) * xb + std::cosh(tau) * vb;
  }
  return w;
}

Vector ModelManifold::exp_map(const Vector& x, const Vector& v) const { return geodesic_point(x, v, 1.0); }

Vector ModelManifold::log_map(const Vector& x, const Vector& y) const {
  Vector u = y - x;
  if (kind_ == Variant::Euclidean) return u;
  const int e = base_embedding_dim();
  const Vector xb = x.head(e);
  const Vector yb = y.head(e);
  const double R = radius();
  const double r2 = R * R;
  if (kind_ == Variant::Sphere) {
    const double c = base_inner(xb, yb) / r2;
    const Vector w = yb - c * xb;
    const double wn = std::sqrt(std::max(0.0, base_inner(w, w)));
    const double theta = std::atan2(wn / R, c);
    if (R * theta >= kPi * R - kCutTolerance) {
      raise(ErrorKind::CutLocus, "points are antipodal within cut tolerance");
    }
    if (wn == 0.0) {
      u.head(e).setZero();
    } else {
      u.head(e) = (R * theta / wn) * w;
    }
  } else {
    const double c = -base_inner(xb, yb) / r2;
    const Vector w = yb - c * xb;
    const double wn = std::sqrt(std::max(0.0, base_inner(w, w)));
    const double d = R * std::asinh(wn / R);
    if (wn == 0.0) {
      u.head(e).setZero();
    } else {
      u.head(e) = (d / wn) * w;
    }
  }
  return u;
}

double ModelManifold::distance(const Vector& x, const Vector& y) const {
  if (kind_ == Variant::Euclidean) return (y - x).norm();
  const int e = base_embedding_dim();
  const double R = radius();
  const double r2 = R * R;
  const Vector xb = x.head(e);
  const Vector yb = y.head(e);
  double db = 0.0;
  if (kind_ == Variant::Sphere) {
    const double c = base_inner(xb, yb) / r2;
    const Vector w = yb - c * xb;
    db = R * std::atan2(std::sqrt(std::max(0.0, base_inner(w, w))) / R, c);
  } else {
    const double c = -base_inner(xb, yb) / r2;
    const Vector w = yb - c * xb;
    db = R * std::asinh(std::sqrt(std::max(0.0, base_inner(w, w))) / R);
  }
  if (!line_) return db;
  const double dl = y[embedding_dim() - 1] - x[embedding_dim() - 1];
  return std::hypot(db, dl);
}

Vector ModelManifold::parallel_transport(const Vector& x, const Vector& v, const Vector& e_vec,
                                         double t) const {
  Vector out = e_vec;
  if (kind_ == Variant::Euclidean) return out;
  const int e = base_embedding_dim();
  const Vector xb = x.head(e);
  const Vector vb = v.head(e);
  const double s = std::sqrt(std::max(0.0, base_inner(vb, vb)));
  if (s == 0.0) return out;
  const Vector uhat = vb / s;
  const Vector eb = e_vec.head(e);
  const double a = base_inner(eb, uhat);
  const Vector perp = eb - a * uhat;
  const double R = radius();
  const double tau = s * t / R;
  if (kind_ == Variant::Sphere) {
    out.head(e) = a * (-std::sin(tau) / R * xb + std::cos(tau) * uhat) + perp;
  } else {
    out.head(e) = a * (std::sinh(tau) / R * xb + std::cosh(tau) * uhat) + perp;
  }
  return out;
}

double ModelManifold::curvature_form(const Vector& w, const Vector& a, const Vector& b) const {
  if (kind_ == Variant::Euclidean) return 0.0;
  const double ww = base_inner(w, w);
  return curvature_ * (ww * base_inner(a, b) - base_inner(w, a) * base_inner(w, b));
}

double ModelManifold::diameter() const {
  if (is_compact()) return kPi * radius();
  return std::numeric_limits<double>::infinity();
}

double ModelManifold::volume() const {
  if (!is_compact()) raise(ErrorKind::Unsupported, "volume of a noncompact model space");
  return std::pow(radius(), base_dim_) * unit_sphere_area(base_dim_);
}

Vector ModelManifold::sphere_point_from_normal(const Vector& gaussian) const {
  if (!is_compact()) raise(ErrorKind::Unsupported, "uniform sampling needs the sphere");
  const double nrm = gaussian.norm();
  if (nrm == 0.0) return origin();
  return (radius() / nrm) * gaussian;
}

ParallelFrame build_parallel_frame(const ModelManifold& M, const Vector& x, const Vector& v,
                                   const std::vector<Vector>& tangent_basis,
                                   const std::vector<Vector>& normal_basis, int samples) {
  if (samples < 2) raise(ErrorKind::Unsupported, "parallel frame needs at least two samples");
  ParallelFrame frame;
  frame.base_point = x;
  frame.velocity = v;
  frame.speed = M.norm(v);
  frame.tangent_count = static_cast<int>(tangent_basis.size());
  frame.initial = tangent_basis;
  frame.initial.insert(frame.initial.end(), normal_basis.begin(), normal_basis.end());
  frame.times.resize(samples);
  frame.points.resize(samples);
  frame.velocities.resize(samples);
  frame.frames.resize(samples);
  for (int k = 0; k < samples; ++k) {
    const double t = static_cast<double>(k) / (samples - 1);
    frame.times[k] = t;
    frame.points[k] = M.geodesic_point(x, v, t);
    frame.velocities[k] = M.geodesic_velocity(x, v, t);
    frame.frames[k] = frame_at(M, frame, t);
  }
  return frame;
}

std::vector<Vector> frame_at(const ModelManifold& M, const ParallelFrame& frame, double t) {
  std::vector<Vector> out;
  out.reserve(frame.initial.size());
  for (const auto& e : frame.initial) {
    out.push_back(M.parallel_transport(frame.base_point, frame.velocity, e, t));
  }
  return out;
}

Matrix curvature_matrix(const ModelManifold& M, const ParallelFrame& frame, double t) {
  const auto basis = frame_at(M, frame, t);
  const Vector w = M.geodesic_velocity(frame.base_point, frame.velocity, t);
  const int d = static_cast<int>(basis.size());
  Matrix S(d, d);
  for (int a = 0; a < d; ++a) {
    for (int b = a; b < d; ++b) {
      S(a, b) = M.curvature_form(w, basis[a], basis[b]);
      S(b, a) = S(a, b);
    }
  }
  return S;
}

double intermediate_ricci(const ModelManifold& M, const Vector& x, const std::vector<Vector>& plane,
                          const Vector& w) {
  (void)x;
  double worst = 0.0;
  for (std::size_t i = 0; i < plane.size(); ++i) {
    for (std::size_t j = 0; j < plane.size(); ++j) {
      const double g = M.inner(plane[i], plane[j]) - (i == j ? 1.0 : 0.0);
      worst = std::max(worst, std::abs(g));
    }
  }
  if (worst > 1e-8) {
    raise(ErrorKind::NonOrthonormalPlane, "Gram residual " + std::to_string(worst));
  }
  double sum = 0.0;
  for (const auto& e : plane) sum += M.curvature_form(w, e, e);
  return sum;
}

std::vector<Vector> tangent_basis(const ModelManifold& M, const Vector& x) {
  std::vector<Vector> basis;
  const int E = M.embedding_dim();
  for (int i = 0; i < E && static_cast<int>(basis.size()) < M.dim(); ++i) {
    Vector w = Vector::Zero(E);
    w[i] = 1.0;
    w = M.project_tangent(x, w);
    for (const auto& b : basis) w -= M.inner(w, b) * b;
    const double nrm = M.norm(w);
    if (nrm < 1e-6) continue;
    w /= nrm;
    for (const auto& b : basis) w -= M.inner(w, b) * b;  // second pass for round-off
    basis.push_back(w / M.norm(w));
  }
  return basis;
}

double ball_volume(int k) {
  if (k < 1) raise(ErrorKind::Unsupported, "ball dimension must be >= 1");
  return std::pow(kPi, 0.5 * k) / std::tgamma(0.5 * k + 1.0);
}

double unit_sphere_area(int k) {
  if (k < 0) raise(ErrorKind::Unsupported, "sphere dimension must be >= 0");
  return 2.0 * std::pow(kPi, 0.5 * (k + 1)) / std::tgamma(0.5 * (k + 1));
}

double geodesic_ball_volume(const ModelManifold& M, double r) {
  const int d = M.dim();
  if (M.has_line()) {
    if (M.base_variant() == Variant::Euclidean) return ball_volume(d) * std::pow(r, d);
    raise(ErrorKind::Unsupported, "geodesic balls in curved line products");
  }
  switch (M.base_variant()) {
    case Variant::Euclidean: return ball_volume(d) * std::pow(r, d);
    case Variant::Sphere: {
      const double R = M.radius();
      const double a = std::min(r, kPi * R) / R;
      return unit_sphere_area(d - 1) * std::pow(R, d) * sin_power_integral(d - 1, a);
    }
    case Variant::Hyperbolic: {
      const double R = M.radius();
      return unit_sphere_area(d - 1) * std::pow(R, d) * sinh_power_integral(d - 1, r / R);
    }
    default: break;
  }
  raise(ErrorKind::Unsupported, "geodesic ball volume");
}

double asymptotic_volume_ratio(const ModelManifold& M) {
  if (M.base_variant() == Variant::Euclidean) return 1.0;
  if (M.variant() == Variant::Sphere) {
    raise(ErrorKind::Unsupported, "asymptotic volume ratio of a compact space");
  }
  raise(ErrorKind::Unsupported, "asymptotic volume ratio outside the nonnegatively curved flat cases");
}

}  // namespace otlab
