#pragma once

// Quadrature meshes of compact surfaces with boundary inside a model space.
//
// Every built-in chart is two-dimensional (n = 2) and parametrized by a
// planar parameter u: normal polar coordinates u = s (cos t, sin t) for the
// disk-like charts, and (polar angle, azimuth) for the subsphere band.

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "otlab/geometry.hpp"
#include "otlab/random.hpp"

namespace otlab {

using Param = Eigen::Vector2d;

enum class ChartKind {
  FlatDisk,
  GeodesicBallInSubsphere,
  GeodesicDiskInHyperbolicSubspace,
  GraphOverDisk,
  EquatorialSubsphereBand,
};

std::string chart_kind_name(ChartKind kind);
ChartKind chart_kind_from_name(const std::string& name);

/// Graph height h(u) = 1/2 (a11 u1^2 + 2 a12 u1 u2 + a22 u2^2) + b1 u1 + b2 u2.
struct QuadraticHeight {
  double a11 = 1.0, a12 = 0.0, a22 = 1.0, b1 = 0.0, b2 = 0.0;

  double value(const Param& u) const;
  Param gradient(const Param& u) const;
  Eigen::Matrix2d hessian() const;
};

struct ChartSpec {
  ChartKind kind = ChartKind::FlatDisk;
  /// Disk/ball radius rho, or the half-width beta of the band around the equator.
  double radius = 1.0;
  QuadraticHeight height;  // GraphOverDisk only
};

struct Resolution {
  int radial_cells = 16;
  int angular_cells = 0;  // 0 selects round(2 pi * radial_cells / angular extent)
};

/// Extrinsic data at one point of the surface.
struct NodeGeometry {
  Vector point;
  std::vector<Vector> tangent;  // e_1..e_n
  std::vector<Vector> normal;   // nu_{n+1}..nu_{n+m}
  std::vector<Matrix> sff;      // II^beta_ij = <II(e_i, e_j), nu_beta>, one n x n block per normal
  Vector mean_curvature;        // H = sum_i II(e_i, e_i)
  Matrix jacobian;              // d point / d u, embedding_dim x 2
};

/// Analytic evaluation hooks of a chart.
class Chart {
 public:
  virtual ~Chart() = default;

  virtual const ModelManifold& manifold() const = 0;
  virtual NodeGeometry evaluate(const Param& u) const = 0;
  virtual Vector point(const Param& u) const { return evaluate(u).point; }
  /// Nearest admissible parameter (clamps to the chart domain).
  virtual Param clamp(const Param& u) const = 0;
  /// 3-vector used for chart-neighbor search; distances approximate intrinsic ones.
  virtual Eigen::Vector3d key(const Param& u) const = 0;
  /// Point of the surface reached from u along tangent vector xi (first-order
  /// accurate in the surface geodesic sense, exact for totally geodesic charts).
  virtual Vector surface_exp(const Param& u, const Vector& xi, Param* landed = nullptr) const = 0;
  /// Chart parameter of a point lying on (or next to) the surface.
  virtual Param param_of(const Vector& p) const = 0;
};

std::shared_ptr<const Chart> make_chart(const ModelManifold& M, const ChartSpec& spec);

/// Lifts a chart of M into M x R (zero line coordinate, extra normal along the line).
std::shared_ptr<const Chart> lift_chart(std::shared_ptr<const Chart> chart);

struct MeshNode {
  Param param;
  double weight = 0.0;
  NodeGeometry geometry;
};

struct BoundaryNode {
  Param param;
  double weight = 0.0;
  Vector point;
};

struct SubmanifoldMesh {
  ModelManifold manifold = ModelManifold::euclidean(4);
  int n = 2;
  int m = 2;
  ChartSpec chart;
  Resolution resolution;
  bool lifted = false;
  double spacing = 0.0;  // chart mesh spacing h
  std::vector<MeshNode> nodes;
  std::vector<BoundaryNode> boundary;
  std::shared_ptr<const Chart> geometry;

  int size() const noexcept { return static_cast<int>(nodes.size()); }
};

SubmanifoldMesh build_submanifold(const ModelManifold& M, const ChartSpec& chart, const Resolution& res);

/// Same surface inside M x R: one extra normal along the line, II padded with zeros.
SubmanifoldMesh lift_mesh(const SubmanifoldMesh& mesh);

/// Extrinsic data stored at a node; throws IndexOutOfRange.
const NodeGeometry& geometry_at_node(const SubmanifoldMesh& mesh, int node);

/// Node values f(x) > 0 with an optional analytic gradient in chart parameters.
struct ScalarField {
  std::vector<double> values;
  std::function<Param(const Param&)> param_gradient;  // (df/du1, df/du2)
  std::function<double(const Param&)> evaluate;       // optional pointwise evaluation

  static ScalarField from_function(const SubmanifoldMesh& mesh, std::function<double(const Param&)> f,
                                   std::function<Param(const Param&)> grad = {});
  static ScalarField constant(const SubmanifoldMesh& mesh, double c);
};

/// Tangent coordinates (in the node's orthonormal tangent frame) of another point.
Eigen::VectorXd tangent_coordinates(const SubmanifoldMesh& mesh, int node, const Vector& y);

/// Chart neighbors of every node within the given chart radius.
class NeighborIndex {
 public:
  NeighborIndex(const SubmanifoldMesh& mesh, double radius);
  const std::vector<int>& operator[](int node) const { return lists_[node]; }
  double radius() const noexcept { return radius_; }

 private:
  double radius_;
  std::vector<std::vector<int>> lists_;
};

/// Ambient tangent vector from chart-parameter partials: J (J^T G J)^{-1} df.
Vector gradient_from_param(const SubmanifoldMesh& mesh, int node, const Param& dfdu);

/// Gradient of node values by a weighted least-squares linear fit (radius 2h,
/// ridge 1e-12). Throws DegenerateStencil with fewer than n+1 stencil points.
std::vector<Vector> least_squares_gradient(const SubmanifoldMesh& mesh, const std::vector<double>& values);

/// Per-node intrinsic Hessian from a quadratic least-squares fit (radius 3h).
std::vector<Matrix> least_squares_hessian(const SubmanifoldMesh& mesh, const std::vector<double>& values);

std::vector<Vector> intrinsic_gradient(const SubmanifoldMesh& mesh, const ScalarField& f);

enum class Region { Interior, Boundary };

double integrate(const SubmanifoldMesh& mesh, const std::vector<double>& field, Region region);

/// Values of a field along the boundary nodes (requires ScalarField::evaluate).
std::vector<double> boundary_values(const SubmanifoldMesh& mesh, const ScalarField& f);

/// Distances from one ambient point to all stored mesh points (interior nodes
/// followed by boundary nodes), evaluated as one batched product.
class NodeDistances {
 public:
  explicit NodeDistances(const SubmanifoldMesh& mesh);
  Eigen::ArrayXd all(const Vector& p) const;
  /// Index into the interior+boundary list and distance of the nearest point.
  std::pair<int, double> nearest(const Vector& p) const;
  int size() const noexcept { return static_cast<int>(points_.cols()); }

 private:
  ModelManifold manifold_;
  Matrix points_;  // embedding_dim x (nodes + boundary)
};

/// Ambient distance from p to the surface: nearest node, then chart projection.
double distance_to_surface(const SubmanifoldMesh& mesh, const Vector& p);

struct MonteCarloSampler {
  std::uint64_t seed = 1;
  int samples = 20000;
};

struct BoundingBall {
  Vector center;
  double radius = 1.0;
};

struct TubularEstimate {
  double tube_volume = 0.0;        // vol(N_eps)
  double standard_error = 0.0;
  double complement_volume = 0.0;  // vol(domain) - vol(N_eps)
  double domain_volume = 0.0;
  int hits = 0;
  int samples = 0;
};

/// Uniform point in the geodesic ball B_r(center) of M.
Vector sample_geodesic_ball(const ModelManifold& M, const Vector& center, double r, Rng& rng);

TubularEstimate tubular_volume(const ModelManifold& M, const SubmanifoldMesh& mesh, double eps,
                               const MonteCarloSampler& sampler,
                               const std::optional<BoundingBall>& bounding = std::nullopt);

/// Structured text record of a mesh (see docs/mesh_format.md).
void export_mesh(const SubmanifoldMesh& mesh, std::ostream& out);
SubmanifoldMesh import_mesh(std::istream& in);

}  // namespace otlab
