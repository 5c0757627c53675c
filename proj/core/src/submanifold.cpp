#include "otlab/submanifold.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <unordered_map>

#include "otlab/error.hpp"

namespace otlab {

namespace {

constexpr double kPi = std::numbers::pi;

// sqrt det of the induced metric in chart parameters.
double area_density(const ModelManifold& M, const Matrix& J) {
  const Vector c0 = J.col(0);
  const Vector c1 = J.col(1);
  const double g00 = M.inner(c0, c0);
  const double g01 = M.inner(c0, c1);
  const double g11 = M.inner(c1, c1);
  return std::sqrt(std::max(0.0, g00 * g11 - g01 * g01));
}

Eigen::Matrix2d induced_metric(const ModelManifold& M, const Matrix& J) {
  const Vector c0 = J.col(0);
  const Vector c1 = J.col(1);
  Eigen::Matrix2d G;
  G(0, 0) = M.inner(c0, c0);
  G(0, 1) = G(1, 0) = M.inner(c0, c1);
  G(1, 1) = M.inner(c1, c1);
  return G;
}

int default_angular_cells(int radial_cells, double angular_extent_ratio) {
  return std::max(8, static_cast<int>(std::lround(angular_extent_ratio * radial_cells)));
}

SubmanifoldMesh build_on_base(const ModelManifold& M, const ChartSpec& spec, const Resolution& res) {
  if (res.radial_cells < 1 || res.angular_cells < 0) {
    raise(ErrorKind::ResolutionTooCoarse, "cell counts must be positive");
  }
  SubmanifoldMesh mesh;
  mesh.manifold = M;
  mesh.n = 2;
  mesh.m = M.dim() - 2;
  mesh.chart = spec;
  mesh.resolution = res;
  mesh.geometry = make_chart(M, spec);
  const Chart& chart = *mesh.geometry;

  const int Nr = res.radial_cells;
  if (spec.kind == ChartKind::EquatorialSubsphereBand) {
    const double beta = spec.radius;
    const double dth = 2.0 * beta / Nr;
    const int Na = res.angular_cells > 0 ? res.angular_cells : default_angular_cells(Nr, kPi / beta);
    const double daz = 2.0 * kPi / Na;
    mesh.spacing = M.radius() * dth;
    for (int i = 0; i < Nr; ++i) {
      const double th = 0.5 * kPi - beta + (i + 0.5) * dth;
      for (int j = 0; j < Na; ++j) {
        MeshNode node;
        node.param = Param(th, (j + 0.5) * daz);
        node.geometry = chart.evaluate(node.param);
        node.weight = area_density(M, node.geometry.jacobian) * dth * daz;
        mesh.nodes.push_back(std::move(node));
      }
    }
    if (beta < 0.5 * kPi - 1e-12) {
      for (double th : {0.5 * kPi - beta, 0.5 * kPi + beta}) {
        for (int j = 0; j < Na; ++j) {
          BoundaryNode b;
          b.param = Param(th, (j + 0.5) * daz);
          const NodeGeometry g = chart.evaluate(b.param);
          b.point = g.point;
          b.weight = M.norm(Vector(g.jacobian.col(1))) * daz;
          mesh.boundary.push_back(std::move(b));
        }
      }
    }
  } else {
    const double rho = spec.radius;
    const double ds = rho / Nr;
    const int Na = res.angular_cells > 0 ? res.angular_cells : default_angular_cells(Nr, 2.0 * kPi);
    const double da = 2.0 * kPi / Na;
    mesh.spacing = ds;
    for (int i = 0; i < Nr; ++i) {
      const double s = (i + 0.5) * ds;
      for (int j = 0; j < Na; ++j) {
        const double a = (j + 0.5) * da;
        MeshNode node;
        node.param = Param(s * std::cos(a), s * std::sin(a));
        node.geometry = chart.evaluate(node.param);
        node.weight = area_density(M, node.geometry.jacobian) * s * ds * da;
        mesh.nodes.push_back(std::move(node));
      }
    }
    for (int j = 0; j < Na; ++j) {
      const double a = (j + 0.5) * da;
      BoundaryNode b;
      b.param = Param(rho * std::cos(a), rho * std::sin(a));
      const NodeGeometry g = chart.evaluate(b.param);
      b.point = g.point;
      const Vector dtheta = g.jacobian * Param(-b.param.y(), b.param.x());
      b.weight = M.norm(dtheta) * da;
      mesh.boundary.push_back(std::move(b));
    }
  }
  if (mesh.size() < 16) {
    raise(ErrorKind::ResolutionTooCoarse, "mesh has " + std::to_string(mesh.size()) + " interior nodes");
  }
  return mesh;
}

Vector append_zero(const Vector& v) {
  Vector out = Vector::Zero(v.size() + 1);
  out.head(v.size()) = v;
  return out;
}

}  // namespace

SubmanifoldMesh build_submanifold(const ModelManifold& M, const ChartSpec& chart, const Resolution& res) {
  if (M.has_line()) return lift_mesh(build_on_base(M.base(), chart, res));
  return build_on_base(M, chart, res);
}

SubmanifoldMesh lift_mesh(const SubmanifoldMesh& mesh) {
  if (mesh.lifted) raise(ErrorKind::Unsupported, "mesh is already lifted");
  SubmanifoldMesh out = mesh;
  out.lifted = true;
  out.geometry = lift_chart(mesh.geometry);
  out.manifold = out.geometry->manifold();
  out.m = mesh.m + 1;
  for (std::size_t i = 0; i < out.nodes.size(); ++i) {
    out.nodes[i].geometry = out.geometry->evaluate(out.nodes[i].param);
  }
  for (auto& b : out.boundary) b.point = append_zero(b.point);
  return out;
}

const NodeGeometry& geometry_at_node(const SubmanifoldMesh& mesh, int node) {
  if (node < 0 || node >= mesh.size()) {
    raise(ErrorKind::IndexOutOfRange, "node " + std::to_string(node) + " of " + std::to_string(mesh.size()));
  }
  return mesh.nodes[node].geometry;
}

ScalarField ScalarField::from_function(const SubmanifoldMesh& mesh, std::function<double(const Param&)> f,
                                       std::function<Param(const Param&)> grad) {
  ScalarField out;
  out.values.reserve(mesh.nodes.size());
  for (const auto& node : mesh.nodes) {
    const double v = f(node.param);
    if (!(v > 0.0)) raise(ErrorKind::NonPositiveField, "f must be positive at every node");
    out.values.push_back(v);
  }
  out.evaluate = std::move(f);
  out.param_gradient = std::move(grad);
  return out;
}

ScalarField ScalarField::constant(const SubmanifoldMesh& mesh, double c) {
  if (!(c > 0.0)) raise(ErrorKind::NonPositiveField, "constant field must be positive");
  return from_function(mesh, [c](const Param&) { return c; }, [](const Param&) { return Param::Zero(); });
}

Eigen::VectorXd tangent_coordinates(const SubmanifoldMesh& mesh, int node, const Vector& y) {
  const NodeGeometry& g = geometry_at_node(mesh, node);
  const Vector u = mesh.manifold.log_map(g.point, y);
  Eigen::VectorXd xi(mesh.n);
  for (int a = 0; a < mesh.n; ++a) xi[a] = mesh.manifold.inner(u, g.tangent[a]);
  return xi;
}

NeighborIndex::NeighborIndex(const SubmanifoldMesh& mesh, double radius) : radius_(radius) {
  const int N = mesh.size();
  lists_.assign(N, {});
  std::vector<Eigen::Vector3d> keys(N);
  for (int i = 0; i < N; ++i) keys[i] = mesh.geometry->key(mesh.nodes[i].param);

  auto cell_of = [radius](const Eigen::Vector3d& k) {
    return Eigen::Vector3i(static_cast<int>(std::floor(k.x() / radius)),
                           static_cast<int>(std::floor(k.y() / radius)),
                           static_cast<int>(std::floor(k.z() / radius)));
  };
  auto code = [](const Eigen::Vector3i& c) {
    return (static_cast<std::int64_t>(c.x()) * 73856093) ^ (static_cast<std::int64_t>(c.y()) * 19349663) ^
           (static_cast<std::int64_t>(c.z()) * 83492791);
  };
  std::unordered_map<std::int64_t, std::vector<int>> grid;
  for (int i = 0; i < N; ++i) grid[code(cell_of(keys[i]))].push_back(i);

  const double r2 = radius * radius;
  for (int i = 0; i < N; ++i) {
    const Eigen::Vector3i c = cell_of(keys[i]);
    auto& list = lists_[i];
    for (int dx = -1; dx <= 1; ++dx) {
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dz = -1; dz <= 1; ++dz) {
          auto it = grid.find(code(c + Eigen::Vector3i(dx, dy, dz)));
          if (it == grid.end()) continue;
          for (int j : it->second) {
            if (j != i && (keys[j] - keys[i]).squaredNorm() <= r2) list.push_back(j);
          }
        }
      }
    }
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }
}

Vector gradient_from_param(const SubmanifoldMesh& mesh, int node, const Param& dfdu) {
  const NodeGeometry& g = geometry_at_node(mesh, node);
  const Eigen::Matrix2d G = induced_metric(mesh.manifold, g.jacobian);
  return g.jacobian * G.ldlt().solve(dfdu);
}

std::vector<Vector> least_squares_gradient(const SubmanifoldMesh& mesh, const std::vector<double>& values) {
  if (static_cast<int>(values.size()) != mesh.size()) raise(ErrorKind::LengthMismatch, "node values");
  const double h = mesh.spacing;
  const NeighborIndex index(mesh, 2.0 * h * (1.0 + 1e-9));
  std::vector<Vector> out(mesh.size());
  for (int i = 0; i < mesh.size(); ++i) {
    const auto& nb = index[i];
    if (static_cast<int>(nb.size()) < mesh.n + 1) {
      raise(ErrorKind::DegenerateStencil, "node " + std::to_string(i) + " has " +
                                              std::to_string(nb.size()) + " stencil neighbors");
    }
    Eigen::MatrixXd AtA = Eigen::MatrixXd::Zero(mesh.n, mesh.n);
    Eigen::VectorXd Atb = Eigen::VectorXd::Zero(mesh.n);
    for (int j : nb) {
      const Eigen::VectorXd xi = tangent_coordinates(mesh, i, mesh.nodes[j].geometry.point);
      const double w = 1.0 / (1.0 + xi.squaredNorm() / (h * h));
      AtA += w * xi * xi.transpose();
      Atb += w * xi * (values[j] - values[i]);
    }
    AtA.diagonal().array() += 1e-12;
    const Eigen::VectorXd c = AtA.ldlt().solve(Atb);
    const NodeGeometry& g = mesh.nodes[i].geometry;
    Vector grad = Vector::Zero(g.point.size());
    for (int a = 0; a < mesh.n; ++a) grad += c[a] * g.tangent[a];
    out[i] = grad;
  }
  return out;
}

std::vector<Matrix> least_squares_hessian(const SubmanifoldMesh& mesh, const std::vector<double>& values) {
  if (static_cast<int>(values.size()) != mesh.size()) raise(ErrorKind::LengthMismatch, "node values");
  const int n = mesh.n;
  const int q = n + n * (n + 1) / 2;
  const double h = mesh.spacing;
  const NeighborIndex index(mesh, 3.0 * h * (1.0 + 1e-9));
  std::vector<Matrix> out(mesh.size());
  for (int i = 0; i < mesh.size(); ++i) {
    const auto& nb = index[i];
    if (static_cast<int>(nb.size()) < q) {
      raise(ErrorKind::DegenerateStencil, "node " + std::to_string(i) + " has too few Hessian neighbors");
    }
    Eigen::MatrixXd AtA = Eigen::MatrixXd::Zero(q, q);
    Eigen::VectorXd Atb = Eigen::VectorXd::Zero(q);
    Eigen::VectorXd row(q);
    for (int j : nb) {
      const Eigen::VectorXd xi = tangent_coordinates(mesh, i, mesh.nodes[j].geometry.point);
      int c = 0;
      for (int a = 0; a < n; ++a) row[c++] = xi[a];
      for (int a = 0; a < n; ++a) {
        for (int b = a; b < n; ++b) row[c++] = a == b ? 0.5 * xi[a] * xi[a] : xi[a] * xi[b];
      }
      const double w = 1.0 / (1.0 + xi.squaredNorm() / (h * h));
      AtA += w * row * row.transpose();
      Atb += w * row * (values[j] - values[i]);
    }
    AtA.diagonal().array() += 1e-12;
    const Eigen::VectorXd c = AtA.ldlt().solve(Atb);
    Matrix H(n, n);
    int k = n;
    for (int a = 0; a < n; ++a) {
      for (int b = a; b < n; ++b) {
        H(a, b) = H(b, a) = c[k++];
      }
    }
    out[i] = H;
  }
  return out;
}

std::vector<Vector> intrinsic_gradient(const SubmanifoldMesh& mesh, const ScalarField& f) {
  if (static_cast<int>(f.values.size()) != mesh.size()) raise(ErrorKind::LengthMismatch, "field values");
  if (!f.param_gradient) return least_squares_gradient(mesh, f.values);
  std::vector<Vector> out(mesh.size());
  for (int i = 0; i < mesh.size(); ++i) {
    out[i] = gradient_from_param(mesh, i, f.param_gradient(mesh.nodes[i].param));
  }
  return out;
}

double integrate(const SubmanifoldMesh& mesh, const std::vector<double>& field, Region region) {
  double sum = 0.0;
  if (region == Region::Interior) {
    if (field.size() != mesh.nodes.size()) raise(ErrorKind::LengthMismatch, "interior field length");
    for (std::size_t i = 0; i < field.size(); ++i) sum += mesh.nodes[i].weight * field[i];
  } else {
    if (field.size() != mesh.boundary.size()) raise(ErrorKind::LengthMismatch, "boundary field length");
    for (std::size_t i = 0; i < field.size(); ++i) sum += mesh.boundary[i].weight * field[i];
  }
  return sum;
}

std::vector<double> boundary_values(const SubmanifoldMesh& mesh, const ScalarField& f) {
  if (!f.evaluate) raise(ErrorKind::Unsupported, "boundary values need a pointwise field");
  std::vector<double> out;
  out.reserve(mesh.boundary.size());
  for (const auto& b : mesh.boundary) out.push_back(f.evaluate(b.param));
  return out;
}

NodeDistances::NodeDistances(const SubmanifoldMesh& mesh) : manifold_(mesh.manifold) {
  const int E = mesh.manifold.embedding_dim();
  points_.resize(E, mesh.nodes.size() + mesh.boundary.size());
  int c = 0;
  for (const auto& node : mesh.nodes) points_.col(c++) = node.geometry.point;
  for (const auto& b : mesh.boundary) points_.col(c++) = b.point;
}

Eigen::ArrayXd NodeDistances::all(const Vector& p) const {
  const ModelManifold& M = manifold_;
  const int E = M.embedding_dim();
  const int Eb = M.has_line() ? E - 1 : E;
  Eigen::ArrayXd base;
  if (M.base_variant() == Variant::Euclidean) {
    base = (points_.topRows(Eb).colwise() - p.head(Eb)).colwise().squaredNorm().transpose().array().sqrt();
  } else {
    const double R = M.radius();
    Vector q = p.head(Eb) / (R * R);
    if (M.base_variant() == Variant::Sphere) {
      const Eigen::ArrayXd c = (points_.topRows(Eb).transpose() * q).array().min(1.0).max(-1.0);
      base = R * c.acos();
    } else {
      q[0] = -q[0];
      const Eigen::ArrayXd c = (-(points_.topRows(Eb).transpose() * q).array()).max(1.0);
      // acosh(c) = log(c + sqrt(c^2 - 1))
      base = R * (c + (c.square() - 1.0).sqrt()).log();
    }
  }
  if (!M.has_line()) return base;
  const Eigen::ArrayXd dl = points_.row(E - 1).transpose().array() - p[E - 1];
  return (base.square() + dl.square()).sqrt();
}

std::pair<int, double> NodeDistances::nearest(const Vector& p) const {
  const Eigen::ArrayXd d = all(p);
  Eigen::Index idx = 0;
  const double v = d.minCoeff(&idx);
  return {static_cast<int>(idx), v};
}

namespace {

// Gauss-Newton projection of p onto the chart, measured with the embedding metric.
double project_distance(const SubmanifoldMesh& mesh, const Vector& p, Param u) {
  const ModelManifold& M = mesh.manifold;
  const Chart& chart = *mesh.geometry;
  for (int it = 0; it < 12; ++it) {
    const NodeGeometry g = chart.evaluate(u);
    const Vector r = p - g.point;
    const Eigen::Matrix2d G = induced_metric(M, g.jacobian);
    const Param rhs(M.inner(Vector(g.jacobian.col(0)), r), M.inner(Vector(g.jacobian.col(1)), r));
    const Param step = G.ldlt().solve(rhs);
    if (!step.allFinite()) break;
    const Param next = chart.clamp(u + step);
    const double moved = (next - u).norm();
    u = next;
    if (moved < 1e-12 * (1.0 + u.norm())) break;
  }
  return M.distance(p, chart.point(u));
}

}  // namespace

double distance_to_surface(const SubmanifoldMesh& mesh, const Vector& p) {
  const NodeDistances nd(mesh);
  const auto [idx, d0] = nd.nearest(p);
  const Param u = idx < mesh.size() ? mesh.nodes[idx].param : mesh.boundary[idx - mesh.size()].param;
  return std::min(d0, project_distance(mesh, p, u));
}

Vector sample_geodesic_ball(const ModelManifold& M, const Vector& center, double r, Rng& rng) {
  const int D = M.dim();
  const auto basis = tangent_basis(M, center);
  Vector dir = Vector::Zero(center.size());
  double nrm = 0.0;
  while (nrm < 1e-12) {
    dir.setZero();
    for (const auto& b : basis) dir += standard_normal(rng) * b;
    nrm = M.norm(dir);
  }
  dir /= nrm;
  double rho = 0.0;
  const bool flat = M.base_variant() == Variant::Euclidean;
  if (flat) {
    rho = r * std::pow(uniform01(rng), 1.0 / D);
  } else {
    if (M.has_line()) raise(ErrorKind::Unsupported, "ball sampling in curved line products");
    const double R = M.radius();
    const bool sph = M.base_variant() == Variant::Sphere;
    const double rr = sph ? std::min(r, kPi * R) : r;
    auto J = [&](double s) {
      return std::pow(sph ? std::sin(s / R) : std::sinh(s / R), D - 1);
    };
    const double Jmax = sph ? (rr >= 0.5 * kPi * R ? 1.0 : J(rr)) : J(rr);
    for (;;) {
      const double s = rr * uniform01(rng);
      if (uniform01(rng) * Jmax <= J(s)) {
        rho = s;
        break;
      }
    }
  }
  return M.exp_map(center, rho * dir);
}

TubularEstimate tubular_volume(const ModelManifold& M, const SubmanifoldMesh& mesh, double eps,
                               const MonteCarloSampler& sampler, const std::optional<BoundingBall>& bounding) {
  if (!(eps > 0.0)) raise(ErrorKind::Unsupported, "tube radius must be positive");
  if (sampler.samples < 1) raise(ErrorKind::Unsupported, "sample count must be positive");
  const bool compact = M.is_compact();
  if (!compact && !bounding) raise(ErrorKind::UnboundedDomain, "noncompact ambient needs a bounding ball");

  TubularEstimate est;
  est.samples = sampler.samples;
  est.domain_volume = compact ? M.volume() : geodesic_ball_volume(M, bounding->radius);

  const NodeDistances nd(mesh);
  // A surface point is never farther than this from its nearest stored node.
  const double margin = 2.0 * mesh.spacing;
  Rng rng(sampler.seed);
  for (int k = 0; k < sampler.samples; ++k) {
    Vector p = compact ? M.sphere_point_from_normal(standard_normal_vector(rng, M.embedding_dim()))
                       : sample_geodesic_ball(M, bounding->center, bounding->radius, rng);
    const auto [idx, d0] = nd.nearest(p);
    bool hit = d0 <= eps;
    if (!hit && d0 <= eps + margin) {
      const Param u = idx < mesh.size() ? mesh.nodes[idx].param : mesh.boundary[idx - mesh.size()].param;
      hit = project_distance(mesh, p, u) <= eps;
    }
    if (hit) ++est.hits;
  }
  const double frac = static_cast<double>(est.hits) / est.samples;
  est.tube_volume = est.domain_volume * frac;
  est.standard_error = est.domain_volume * std::sqrt(frac * (1.0 - frac) / est.samples);
  est.complement_volume = est.domain_volume - est.tube_volume;
  return est;
}

}  // namespace otlab
