#pragma once

// Closed-form Riemannian kernels on the model ambient spaces.
//
// Points and tangent vectors live in the embedding chart of each model:
//   Euclidean       R^d, standard inner product
//   Sphere          radius-R sphere in R^{d+1}, R = 1/sqrt(K)
//   Hyperbolic      hyperboloid <x,x>_L = -R^2, x_0 > 0, in Minkowski R^{d,1}
//   ProductWithLine (base coordinates, t) with the flat factor appended last

#include <Eigen/Dense>

#include <limits>
#include <vector>

namespace otlab {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class Variant { Euclidean, Sphere, Hyperbolic, ProductWithLine };

/// Sphere log refuses pairs with d >= pi R - kCutTolerance.
inline constexpr double kCutTolerance = 1e-6;

class ModelManifold {
 public:
  static ModelManifold euclidean(int dim);
  static ModelManifold sphere(int dim, double curvature = 1.0);
  static ModelManifold hyperbolic(int dim, double curvature = -1.0);
  static ModelManifold product_with_line(const ModelManifold& base);

  Variant variant() const noexcept { return line_ ? Variant::ProductWithLine : kind_; }
  /// Variant of the curved factor (never ProductWithLine).
  Variant base_variant() const noexcept { return kind_; }
  ModelManifold base() const;
  bool has_line() const noexcept { return line_; }

  /// Intrinsic dimension n+m.
  int dim() const noexcept { return base_dim_ + (line_ ? 1 : 0); }
  int embedding_dim() const noexcept { return base_embedding_dim() + (line_ ? 1 : 0); }
  double curvature() const noexcept { return curvature_; }
  /// Curvature radius 1/sqrt|K|; infinity for the flat factor.
  double radius() const noexcept;

  /// Metric of the embedding chart restricted to tangent vectors.
  double inner(const Vector& a, const Vector& b) const;
  double norm(const Vector& v) const;

  /// Distinguished point: origin, north pole R e_0, or hyperboloid apex.
  Vector origin() const;
  /// i-th coordinate direction of the tangent space at origin() (i < dim()).
  Vector origin_direction(int i) const;

  Vector project_tangent(const Vector& x, const Vector& w) const;
  double point_residual(const Vector& x) const;
  double tangency_residual(const Vector& x, const Vector& v) const;

  Vector exp_map(const Vector& x, const Vector& v) const;
  /// Initial velocity of the minimal geodesic from x to y. Throws CutLocus on
  /// (near-)antipodal sphere pairs.
  Vector log_map(const Vector& x, const Vector& y) const;
  double distance(const Vector& x, const Vector& y) const;

  /// Point and velocity at time t of t -> exp(x, t v).
  Vector geodesic_point(const Vector& x, const Vector& v, double t) const;
  Vector geodesic_velocity(const Vector& x, const Vector& v, double t) const;
  /// Parallel transport of e (tangent at x) to time t along t -> exp(x, t v).
  Vector parallel_transport(const Vector& x, const Vector& v, const Vector& e, double t) const;

  /// <R(a, w) w, b>. For constant curvature K on the curved factor:
  /// K (|w|^2 <a,b> - <w,a><w,b>) evaluated on the curved components.
  double curvature_form(const Vector& w, const Vector& a, const Vector& b) const;

  bool is_compact() const noexcept { return kind_ == Variant::Sphere && !line_; }
  double diameter() const;
  /// Total volume (compact variant only).
  double volume() const;

  /// Uniformly distributed point (sphere only) from a standard normal draw.
  Vector sphere_point_from_normal(const Vector& gaussian) const;

 private:
  ModelManifold(Variant kind, int base_dim, double curvature, bool line)
      : kind_(kind), base_dim_(base_dim), curvature_(curvature), line_(line) {}

  int base_embedding_dim() const noexcept {
    return kind_ == Variant::Euclidean ? base_dim_ : base_dim_ + 1;
  }
  double base_inner(const Vector& a, const Vector& b) const;

  Variant kind_;
  int base_dim_;
  double curvature_;
  bool line_;
};

/// Orthonormal frame transported along the geodesic t -> exp(x, t v), t in [0,1].
struct ParallelFrame {
  Vector base_point;
  Vector velocity;
  double speed = 0.0;
  int tangent_count = 0;  // first tangent_count vectors are E_i, the rest N_alpha
  std::vector<Vector> initial;              // frame at t = 0
  std::vector<double> times;                // uniform samples on [0,1]
  std::vector<Vector> points;               // gamma(t_k)
  std::vector<Vector> velocities;           // gamma'(t_k)
  std::vector<std::vector<Vector>> frames;  // frames[k][a]

  int size() const noexcept { return static_cast<int>(initial.size()); }
};

ParallelFrame build_parallel_frame(const ModelManifold& M, const Vector& x, const Vector& v,
                                   const std::vector<Vector>& tangent_basis,
                                   const std::vector<Vector>& normal_basis, int samples);

/// Frame vectors at an arbitrary time (closed-form transport).
std::vector<Vector> frame_at(const ModelManifold& M, const ParallelFrame& frame, double t);

/// S_ab(t) = R(gamma', F_a, gamma', F_b) in the transported frame.
Matrix curvature_matrix(const ModelManifold& M, const ParallelFrame& frame, double t);

/// Ric_p(P, w) = sum_i <R(w, e_i) w, e_i> over an orthonormal basis of P.
double intermediate_ricci(const ModelManifold& M, const Vector& x, const std::vector<Vector>& plane,
                          const Vector& w);

/// Orthonormal basis of T_x M (Gram-Schmidt on projected coordinate axes).
std::vector<Vector> tangent_basis(const ModelManifold& M, const Vector& x);

/// |B^k| = pi^{k/2} / Gamma(k/2 + 1).
double ball_volume(int k);
/// Area of the unit sphere S^k in R^{k+1}.
double unit_sphere_area(int k);
/// Volume of a geodesic ball of radius r in M.
double geodesic_ball_volume(const ModelManifold& M, double r);
/// Asymptotic volume ratio; analytic for the flat noncompact variants.
double asymptotic_volume_ratio(const ModelManifold& M);

/// sin(x)/x with the continuous extension sinc(0) = 1.
double sinc(double x);
/// sinh(x)/x with value 1 at 0.
double sinhc(double x);

}  // namespace otlab
