#include <algorithm>
#include <cmath>
#include <numbers>

#include "otlab/error.hpp"
#include "otlab/submanifold.hpp"

namespace otlab {

namespace {

constexpr double kPi = std::numbers::pi;

Vector unit(int dim, int i) {
  Vector e = Vector::Zero(dim);
  e[i] = 1.0;
  return e;
}

Param clamp_disk(const Param& u, double rho) {
  const double r = u.norm();
  return r > rho ? Param(u * (rho / r)) : u;
}

// Shared pieces of the disk-like charts parametrized by normal polar coordinates.
struct Polar {
  double s;
  Param dir;    // unit radial direction in the parameter plane
  Param ortho;  // dir rotated by +90 degrees
};

Polar polar_of(const Param& u) {
  const double s = u.norm();
  Param dir = s > 0.0 ? Param(u / s) : Param(1.0, 0.0);
  return {s, dir, Param(-dir.y(), dir.x())};
}

class FlatDiskChart final : public Chart {
 public:
  FlatDiskChart(const ModelManifold& M, double rho) : M_(M), rho_(rho) {}

  const ModelManifold& manifold() const override { return M_; }

  NodeGeometry evaluate(const Param& u) const override {
    const int E = M_.embedding_dim();
    NodeGeometry g;
    g.point = Vector::Zero(E);
    g.point[0] = u.x();
    g.point[1] = u.y();
    g.tangent = {unit(E, 0), unit(E, 1)};
    for (int i = 2; i < E; ++i) g.normal.push_back(unit(E, i));
    g.sff.assign(g.normal.size(), Matrix::Zero(2, 2));
    g.mean_curvature = Vector::Zero(E);
    g.jacobian = Matrix::Zero(E, 2);
    g.jacobian(0, 0) = 1.0;
    g.jacobian(1, 1) = 1.0;
    return g;
  }

  Vector point(const Param& u) const override {
    Vector p = Vector::Zero(M_.embedding_dim());
    p[0] = u.x();
    p[1] = u.y();
    return p;
  }

  Param clamp(const Param& u) const override { return clamp_disk(u, rho_); }
  Eigen::Vector3d key(const Param& u) const override { return {u.x(), u.y(), 0.0}; }

  Vector surface_exp(const Param& u, const Vector& xi, Param* landed) const override {
    const Param v = u + Param(xi[0], xi[1]);
    if (landed) *landed = v;
    return point(v);
  }

  Param param_of(const Vector& p) const override { return clamp(Param(p[0], p[1])); }

 private:
  ModelManifold M_;
  double rho_;
};

// Geodesic ball of radius rho in the totally geodesic S^2 = S^{n+m} cap span(E0, E1, E2),
// or its hyperbolic analogue in the hyperboloid model.
class CurvedDiskChart final : public Chart {
 public:
  CurvedDiskChart(const ModelManifold& M, double rho) : M_(M), rho_(rho), R_(M.radius()) {
    sphere_ = M.base_variant() == Variant::Sphere;
  }

  const ModelManifold& manifold() const override { return M_; }

  NodeGeometry evaluate(const Param& u) const override {
    const int E = M_.embedding_dim();
    const Polar pol = polar_of(u);
    const double a = pol.s / R_;
    const double c = sphere_ ? std::cos(a) : std::cosh(a);
    const double sn = sphere_ ? std::sin(a) : std::sinh(a);
    const double area_factor = pol.s > 0.0 ? (sphere_ ? sinc(a) : sinhc(a)) : 1.0;  // R sin(s/R) / s

    Vector radial = Vector::Zero(E);  // dir embedded in span(E1, E2)
    radial[1] = pol.dir.x();
    radial[2] = pol.dir.y();
    Vector angular = Vector::Zero(E);
    angular[1] = pol.ortho.x();
    angular[2] = pol.ortho.y();

    NodeGeometry g;
    g.point = R_ * c * unit(E, 0) + R_ * sn * radial;
    Vector e_s = (sphere_ ? -sn : sn) * unit(E, 0) + c * radial;
    g.tangent = {e_s, angular};
    for (int i = 3; i < E; ++i) g.normal.push_back(unit(E, i));
    g.sff.assign(g.normal.size(), Matrix::Zero(2, 2));
    g.mean_curvature = Vector::Zero(E);
    // d point / du = e_s dir^T + (R sin(s/R) / s) angular ortho^T
    g.jacobian = e_s * pol.dir.transpose() + area_factor * angular * pol.ortho.transpose();
    return g;
  }

  Param clamp(const Param& u) const override { return clamp_disk(u, rho_); }
  Eigen::Vector3d key(const Param& u) const override { return {u.x(), u.y(), 0.0}; }

  Vector surface_exp(const Param& u, const Vector& xi, Param* landed) const override {
    const Vector q = M_.exp_map(point(u), xi);
    if (landed) *landed = param_from_point(q);
    return q;
  }

  Param param_of(const Vector& p) const override { return clamp(param_from_point(p)); }

 private:
  Param param_from_point(const Vector& p) const {
    const double planar = std::hypot(p[1], p[2]);
    double s;
    if (sphere_) {
      s = R_ * std::atan2(planar, p[0]);
    } else {
      s = R_ * std::asinh(planar / R_);
    }
    if (planar == 0.0) return Param::Zero();
    return Param(p[1], p[2]) * (s / planar);
  }

  ModelManifold M_;
  double rho_;
  double R_;
  bool sphere_ = true;
};

class GraphChart final : public Chart {
 public:
  GraphChart(const ModelManifold& M, double rho, QuadraticHeight h) : M_(M), rho_(rho), h_(h) {}

  const ModelManifold& manifold() const override { return M_; }

  NodeGeometry evaluate(const Param& u) const override {
    const int E = M_.embedding_dim();
    const Param dh = h_.gradient(u);
    const Eigen::Matrix2d hess = h_.hessian();
    NodeGeometry g;
    g.point = point(u);
    Vector X1 = unit(E, 0) + dh.x() * unit(E, 2);
    Vector X2 = unit(E, 1) + dh.y() * unit(E, 2);
    const double n1 = X1.norm();
    const Vector e1 = X1 / n1;
    const double p = X2.dot(e1);
    const Vector w2 = X2 - p * e1;
    const double n2 = w2.norm();
    const Vector e2 = w2 / n2;
    g.tangent = {e1, e2};
    const double W = std::sqrt(1.0 + dh.squaredNorm());
    Vector nu = (-dh.x() * unit(E, 0) - dh.y() * unit(E, 1) + unit(E, 2)) / W;
    g.normal.push_back(nu);
    for (int i = 3; i < E; ++i) g.normal.push_back(unit(E, i));
    // e_i = sum_a C(i, a) X_a
    Eigen::Matrix2d C;
    C << 1.0 / n1, 0.0, -p / (n1 * n2), 1.0 / n2;
    const Eigen::Matrix2d II = C * hess * C.transpose() / W;
    g.sff.assign(g.normal.size(), Matrix::Zero(2, 2));
    g.sff[0] = II;
    g.mean_curvature = II.trace() * nu;
    g.jacobian = Matrix::Zero(E, 2);
    g.jacobian.col(0) = X1;
    g.jacobian.col(1) = X2;
    return g;
  }

  Vector point(const Param& u) const override {
    Vector x = Vector::Zero(M_.embedding_dim());
    x[0] = u.x();
    x[1] = u.y();
    x[2] = h_.value(u);
    return x;
  }

  Param clamp(const Param& u) const override { return clamp_disk(u, rho_); }
  Eigen::Vector3d key(const Param& u) const override { return {u.x(), u.y(), 0.0}; }

  Vector surface_exp(const Param& u, const Vector& xi, Param* landed) const override {
    // Second-order surface geodesic x + xi + II(xi, xi) / 2, read back through the graph.
    const NodeGeometry g = evaluate(u);
    Eigen::Vector2d c(g.tangent[0].dot(xi), g.tangent[1].dot(xi));
    const Vector y = g.point + xi + 0.5 * c.dot(g.sff[0] * c) * g.normal[0];
    const Param v(y[0], y[1]);
    if (landed) *landed = v;
    return point(v);
  }

  Param param_of(const Vector& p) const override { return clamp(Param(p[0], p[1])); }

 private:
  ModelManifold M_;
  double rho_;
  QuadraticHeight h_;
};

// Band |polar angle - pi/2| <= beta of the great S^2 = S^{n+m} cap span(E0, E1, E2).
class BandChart final : public Chart {
 public:
  BandChart(const ModelManifold& M, double beta) : M_(M), beta_(beta), R_(M.radius()) {}

  const ModelManifold& manifold() const override { return M_; }

  NodeGeometry evaluate(const Param& u) const override {
    const int E = M_.embedding_dim();
    const double th = u.x();
    const double az = u.y();
    NodeGeometry g;
    g.point = point(u);
    Vector e_th = std::cos(th) * std::cos(az) * unit(E, 0) + std::cos(th) * std::sin(az) * unit(E, 1) -
                  std::sin(th) * unit(E, 2);
    Vector e_az = -std::sin(az) * unit(E, 0) + std::cos(az) * unit(E, 1);
    g.tangent = {e_th, e_az};
    for (int i = 3; i < E; ++i) g.normal.push_back(unit(E, i));
    g.sff.assign(g.normal.size(), Matrix::Zero(2, 2));
    g.mean_curvature = Vector::Zero(E);
    g.jacobian = Matrix::Zero(E, 2);
    g.jacobian.col(0) = R_ * e_th;
    g.jacobian.col(1) = R_ * std::sin(th) * e_az;
    return g;
  }

  Vector point(const Param& u) const override {
    Vector x = Vector::Zero(M_.embedding_dim());
    x[0] = R_ * std::sin(u.x()) * std::cos(u.y());
    x[1] = R_ * std::sin(u.x()) * std::sin(u.y());
    x[2] = R_ * std::cos(u.x());
    return x;
  }

  Param clamp(const Param& u) const override {
    return {std::clamp(u.x(), 0.5 * kPi - beta_, 0.5 * kPi + beta_), u.y()};
  }

  Eigen::Vector3d key(const Param& u) const override {
    const Vector p = point(u);
    return {p[0], p[1], p[2]};
  }

  Vector surface_exp(const Param& u, const Vector& xi, Param* landed) const override {
    const Vector q = M_.exp_map(point(u), xi);
    if (landed) *landed = param_from_point(q);
    return q;
  }

  Param param_of(const Vector& p) const override { return clamp(param_from_point(p)); }

 private:
  static Param param_from_point(const Vector& p) {
    return {std::atan2(std::hypot(p[0], p[1]), p[2]), std::atan2(p[1], p[0])};
  }

  ModelManifold M_;
  double beta_;
  double R_;
};

class LiftedChart final : public Chart {
 public:
  explicit LiftedChart(std::shared_ptr<const Chart> base)
      : base_(std::move(base)), M_(ModelManifold::product_with_line(base_->manifold())) {}

  const ModelManifold& manifold() const override { return M_; }

  NodeGeometry evaluate(const Param& u) const override {
    NodeGeometry b = base_->evaluate(u);
    const int E = M_.embedding_dim();
    NodeGeometry g;
    g.point = extend(b.point);
    for (const auto& v : b.tangent) g.tangent.push_back(extend(v));
    for (const auto& v : b.normal) g.normal.push_back(extend(v));
    g.normal.push_back(unit(E, E - 1));
    g.sff = b.sff;
    g.sff.push_back(Matrix::Zero(2, 2));
    g.mean_curvature = extend(b.mean_curvature);
    g.jacobian = Matrix::Zero(E, 2);
    g.jacobian.topRows(E - 1) = b.jacobian;
    return g;
  }

  Vector point(const Param& u) const override { return extend(base_->point(u)); }
  Param clamp(const Param& u) const override { return base_->clamp(u); }
  Eigen::Vector3d key(const Param& u) const override { return base_->key(u); }

  Vector surface_exp(const Param& u, const Vector& xi, Param* landed) const override {
    return extend(base_->surface_exp(u, xi.head(xi.size() - 1), landed));
  }

  Param param_of(const Vector& p) const override { return base_->param_of(p.head(p.size() - 1)); }

 private:
  static Vector extend(const Vector& v) {
    Vector out = Vector::Zero(v.size() + 1);
    out.head(v.size()) = v;
    return out;
  }

  std::shared_ptr<const Chart> base_;
  ModelManifold M_;
};

}  // namespace

double QuadraticHeight::value(const Param& u) const {
  return 0.5 * (a11 * u.x() * u.x() + 2.0 * a12 * u.x() * u.y() + a22 * u.y() * u.y()) + b1 * u.x() +
         b2 * u.y();
}

Param QuadraticHeight::gradient(const Param& u) const {
  return {a11 * u.x() + a12 * u.y() + b1, a12 * u.x() + a22 * u.y() + b2};
}

Eigen::Matrix2d QuadraticHeight::hessian() const {
  Eigen::Matrix2d h;
  h << a11, a12, a12, a22;
  return h;
}

std::string chart_kind_name(ChartKind kind) {
  switch (kind) {
    case ChartKind::FlatDisk: return "flat_disk";
    case ChartKind::GeodesicBallInSubsphere: return "subsphere_ball";
    case ChartKind::GeodesicDiskInHyperbolicSubspace: return "hyperbolic_disk";
    case ChartKind::GraphOverDisk: return "graph_over_disk";
    case ChartKind::EquatorialSubsphereBand: return "subsphere_band";
  }
  return "unknown";
}

ChartKind chart_kind_from_name(const std::string& name) {
  for (ChartKind k : {ChartKind::FlatDisk, ChartKind::GeodesicBallInSubsphere,
                      ChartKind::GeodesicDiskInHyperbolicSubspace, ChartKind::GraphOverDisk,
                      ChartKind::EquatorialSubsphereBand}) {
    if (chart_kind_name(k) == name) return k;
  }
  raise(ErrorKind::UnsupportedChart, "unknown chart '" + name + "'");
}

std::shared_ptr<const Chart> make_chart(const ModelManifold& M, const ChartSpec& spec) {
  if (M.has_line()) {
    raise(ErrorKind::UnsupportedChart, "charts are built on the base space; lift afterwards");
  }
  if (M.dim() < 3) raise(ErrorKind::UnsupportedChart, "surfaces need codimension >= 1");
  if (!(spec.radius > 0.0)) raise(ErrorKind::UnsupportedChart, "chart radius must be positive");
  switch (spec.kind) {
    case ChartKind::FlatDisk:
      if (M.base_variant() != Variant::Euclidean) break;
      return std::make_shared<FlatDiskChart>(M, spec.radius);
    case ChartKind::GraphOverDisk:
      if (M.base_variant() != Variant::Euclidean) break;
      return std::make_shared<GraphChart>(M, spec.radius, spec.height);
    case ChartKind::GeodesicBallInSubsphere:
      if (M.base_variant() != Variant::Sphere) break;
      if (spec.radius >= kPi * M.radius()) {
        raise(ErrorKind::UnsupportedChart, "subsphere ball radius must stay below pi R");
      }
      return std::make_shared<CurvedDiskChart>(M, spec.radius);
    case ChartKind::GeodesicDiskInHyperbolicSubspace:
      if (M.base_variant() != Variant::Hyperbolic) break;
      return std::make_shared<CurvedDiskChart>(M, spec.radius);
    case ChartKind::EquatorialSubsphereBand:
      if (M.base_variant() != Variant::Sphere) break;
      if (spec.radius > 0.5 * kPi) raise(ErrorKind::UnsupportedChart, "band half-width exceeds pi/2");
      return std::make_shared<BandChart>(M, spec.radius);
  }
  raise(ErrorKind::UnsupportedChart,
        chart_kind_name(spec.kind) + " is not available in this ambient variant");
}

std::shared_ptr<const Chart> lift_chart(std::shared_ptr<const Chart> chart) {
  return std::make_shared<LiftedChart>(std::move(chart));
}

}  // namespace otlab
