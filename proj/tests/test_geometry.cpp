#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "otlab/error.hpp"
#include "otlab/geometry.hpp"

using namespace otlab;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

// Random point: exp of a bounded random tangent vector at the origin.
Vector random_point(const ModelManifold& M, std::mt19937_64& rng, double scale) {
  Vector v = Vector::Zero(M.embedding_dim());
  for (int i = 0; i < M.dim(); ++i) v += oracle::gaussian(rng, 1)[0] * M.origin_direction(i);
  v *= scale / std::max(1.0, M.norm(v));
  return M.exp_map(M.origin(), v);
}

Vector random_tangent(const ModelManifold& M, const Vector& x, std::mt19937_64& rng, double len) {
  Vector v = M.project_tangent(x, oracle::gaussian(rng, M.embedding_dim()));
  return len * v / M.norm(v);
}

std::vector<ModelManifold> models() {
  return {ModelManifold::euclidean(4), ModelManifold::sphere(4, 1.0), ModelManifold::sphere(4, 4.0),
          ModelManifold::hyperbolic(4, -1.0), ModelManifold::hyperbolic(4, -0.25),
          ModelManifold::product_with_line(ModelManifold::sphere(3, 1.0))};
}

}  // namespace

TEST_CASE("exp_map closed forms") {
  const auto E = ModelManifold::euclidean(2);
  const Vector p = E.exp_map(vec({0, 0}), vec({1, 2}));
  CHECK(p[0] == doctest::Approx(1.0));
  CHECK(p[1] == doctest::Approx(2.0));

  const auto S = ModelManifold::sphere(2);
  const Vector q = S.exp_map(S.origin(), (oracle::pi / 2) * S.origin_direction(0));
  CHECK(std::abs(q[0]) < 1e-14);
  CHECK(q[1] == doctest::Approx(1.0));
  CHECK(std::abs(q[2]) < 1e-14);

  const auto H = ModelManifold::hyperbolic(2);
  const Vector y = H.exp_map(H.origin(), H.origin_direction(1));
  CHECK(y[0] == doctest::Approx(std::cosh(1.0)).epsilon(1e-14));
  CHECK(std::abs(y[1]) < 1e-14);
  CHECK(y[2] == doctest::Approx(std::sinh(1.0)).epsilon(1e-14));
}

TEST_CASE("log_map closed forms and the cut locus") {
  const auto E = ModelManifold::euclidean(2);
  const Vector u = E.log_map(vec({1, 0}), vec({4, 4}));
  CHECK(u[0] == doctest::Approx(3.0));
  CHECK(u[1] == doctest::Approx(4.0));
  CHECK(E.distance(vec({1, 0}), vec({4, 4})) == doctest::Approx(5.0));

  const auto S = ModelManifold::sphere(2);
  const Vector a = vec({1, 0, 0});
  const Vector b = vec({0, 1, 0});
  const Vector w = S.log_map(a, b);
  CHECK(S.norm(w) == doctest::Approx(oracle::pi / 2));
  CHECK(std::abs(w[2]) < 1e-14);  // stays on the equator
  CHECK(w[1] > 0.0);

  bool cut = false;
  try {
    S.log_map(a, -a);
  } catch (const Error& e) {
    cut = e.kind() == ErrorKind::CutLocus;
  }
  CHECK(cut);
}

TEST_CASE("distances agree with independent formulas") {
  std::mt19937_64 rng(11);
  const auto S = ModelManifold::sphere(4, 4.0);  // R = 1/2
  const auto H = ModelManifold::hyperbolic(4, -0.25);  // R = 2
  for (int k = 0; k < 50; ++k) {
    const Vector x = random_point(S, rng, 0.6);
    const Vector y = random_point(S, rng, 0.6);
    CHECK(S.distance(x, y) == doctest::Approx(0.5 * oracle::sphere_angle(x, y, 0.5)).epsilon(1e-12));
    const Vector p = random_point(H, rng, 2.0);
    const Vector q = random_point(H, rng, 2.0);
    CHECK(H.distance(p, q) == doctest::Approx(oracle::hyperboloid_distance(p, q, 2.0)).epsilon(1e-9));
  }
}

TEST_CASE("exp and log invert each other below the injectivity radius") {
  std::mt19937_64 rng(12);
  for (const auto& M : models()) {
    const double inj = M.is_compact() ? 0.9 * oracle::pi * M.radius() : 3.0;
    for (int k = 0; k < 40; ++k) {
      const Vector x = random_point(M, rng, 1.0);
      const Vector v = random_tangent(M, x, rng, inj * (k + 1) / 41.0);
      CHECK(M.point_residual(x) < 1e-12);
      CHECK(M.tangency_residual(x, v) < 1e-10);
      const Vector back = M.log_map(x, M.exp_map(x, v));
      CHECK((back - v).norm() <= 1e-9 * std::max(1.0, v.norm()));
    }
  }
}

TEST_CASE("distance symmetry and triangle inequality") {
  std::mt19937_64 rng(13);
  for (const auto& M : models()) {
    for (int k = 0; k < 30; ++k) {
      const Vector x = random_point(M, rng, 1.0);
      const Vector y = random_point(M, rng, 1.0);
      const Vector z = random_point(M, rng, 1.0);
      CHECK(std::abs(M.distance(x, y) - M.distance(y, x)) <= 1e-10);
      CHECK(M.distance(x, z) <= M.distance(x, y) + M.distance(y, z) + 1e-10);
    }
  }
}

TEST_CASE("parallel frames stay orthonormal and parallel") {
  std::mt19937_64 rng(14);
  for (const auto& M : models()) {
    const Vector x = random_point(M, rng, 0.5);
    const auto basis = tangent_basis(M, x);
    const Vector v = random_tangent(M, x, rng, 1.3);
    const std::vector<Vector> tan(basis.begin(), basis.begin() + 2);
    const std::vector<Vector> nor(basis.begin() + 2, basis.end());
    const ParallelFrame F = build_parallel_frame(M, x, v, tan, nor, 11);
    for (const auto& fr : F.frames) {
      for (std::size_t a = 0; a < fr.size(); ++a) {
        for (std::size_t b = 0; b < fr.size(); ++b) {
          CHECK(std::abs(M.inner(fr[a], fr[b]) - (a == b ? 1.0 : 0.0)) <= 1e-10);
        }
      }
    }
    // Covariant derivative = tangential part of the chart derivative; the
    // central difference leaves O(h^2).
    double prev = 0.0;
    for (double h : {1e-2, 5e-3}) {
      const double t = 0.4;
      const auto ep = frame_at(M, F, t + h);
      const auto em = frame_at(M, F, t - h);
      const Vector g = M.geodesic_point(x, v, t);
      double worst = 0.0;
      for (std::size_t a = 0; a < ep.size(); ++a) {
        const Vector d = M.project_tangent(g, (ep[a] - em[a]) / (2.0 * h));
        worst = std::max(worst, d.norm());
      }
      if (prev > 1e-12) CHECK(worst <= prev / 3.0);
      prev = worst;
      CHECK(worst < 1e-3);
    }
  }
}

TEST_CASE("Euclidean frames are constant; sphere transport fixes the orthogonal complement") {
  const auto E = ModelManifold::euclidean(4);
  std::vector<Vector> t{E.origin_direction(0), E.origin_direction(1)};
  std::vector<Vector> nrm{E.origin_direction(2), E.origin_direction(3)};
  const auto F = build_parallel_frame(E, E.origin(), vec({0.3, -1, 2, 0.5}), t, nrm, 5);
  for (const auto& fr : F.frames) {
    for (int a = 0; a < 4; ++a) CHECK((fr[a] - F.initial[a]).norm() == 0.0);
  }
  const auto S = ModelManifold::sphere(4);
  const Vector x = S.origin();
  const Vector v = 0.9 * S.origin_direction(0);
  const Vector e = S.origin_direction(3);
  CHECK((S.parallel_transport(x, v, e, 1.0) - e).norm() < 1e-14);
}

TEST_CASE("curvature matrix closed forms") {
  const auto E = ModelManifold::euclidean(4);
  std::vector<Vector> t{E.origin_direction(0), E.origin_direction(1)};
  std::vector<Vector> nrm{E.origin_direction(2), E.origin_direction(3)};
  CHECK(curvature_matrix(E, build_parallel_frame(E, E.origin(), vec({1, 2, 3, 4}), t, nrm, 2), 0.5).norm() == 0.0);

  const auto S = ModelManifold::sphere(4);
  std::vector<Vector> st{S.origin_direction(0), S.origin_direction(1)};
  std::vector<Vector> sn{S.origin_direction(2), S.origin_direction(3)};
  const Matrix Ss = curvature_matrix(S, build_parallel_frame(S, S.origin(), S.origin_direction(0), st, sn, 2), 0.7);
  Matrix expect = Matrix::Identity(4, 4);
  expect(0, 0) = 0.0;
  CHECK((Ss - expect).cwiseAbs().maxCoeff() < 1e-12);

  // Speed 2, velocity orthogonal to the listed vectors.
  const auto H = ModelManifold::hyperbolic(4);
  std::vector<Vector> ht{H.origin_direction(0), H.origin_direction(1)};
  std::vector<Vector> hn{H.origin_direction(2)};
  const Matrix Sh = curvature_matrix(H, build_parallel_frame(H, H.origin(), 2.0 * H.origin_direction(3), ht, hn, 2), 0.3);
  CHECK((Sh + 4.0 * Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("curvature matrix spectrum and the line factor") {
  std::mt19937_64 rng(15);
  for (const auto& M : models()) {
    const Vector x = random_point(M, rng, 0.5);
    const auto basis = tangent_basis(M, x);
    const Vector v = random_tangent(M, x, rng, 1.7);
    const std::vector<Vector> tan(basis.begin(), basis.begin() + 2);
    const std::vector<Vector> nor(basis.begin() + 2, basis.end());
    const auto F = build_parallel_frame(M, x, v, tan, nor, 2);
    const Matrix S = curvature_matrix(M, F, 0.6);
    CHECK((S - S.transpose()).cwiseAbs().maxCoeff() < 1e-12);
    if (M.variant() == Variant::ProductWithLine) {
      // The line direction spans a zero row of S in any frame it belongs to.
      const Vector line = M.origin_direction(M.dim() - 1);
      const auto Fl = build_parallel_frame(M, x, v, {line}, {}, 2);
      CHECK(std::abs(curvature_matrix(M, Fl, 0.6)(0, 0)) < 1e-12);
      continue;
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(S);
    const double s2 = M.inner(v, v);
    const double K = M.variant() == Variant::Euclidean ? 0.0 : M.curvature();
    std::vector<double> ev(es.eigenvalues().data(), es.eigenvalues().data() + 4);
    std::sort(ev.begin(), ev.end(), [](double a, double b) { return std::abs(a) < std::abs(b); });
    CHECK(std::abs(ev[0]) < 1e-10);
    for (int i = 1; i < 4; ++i) CHECK(ev[i] == doctest::Approx(K * s2).epsilon(1e-10));
  }
}

TEST_CASE("intermediate Ricci curvature") {
  const auto S = ModelManifold::sphere(5);
  const Vector x = S.origin();
  const std::vector<Vector> plane{S.origin_direction(0), S.origin_direction(1), S.origin_direction(2)};
  CHECK(intermediate_ricci(S, x, plane, Vector::Zero(6)) == 0.0);
  CHECK(intermediate_ricci(S, x, plane, S.origin_direction(4)) == doctest::Approx(3.0));
  const auto H = ModelManifold::hyperbolic(5);
  const std::vector<Vector> hp{H.origin_direction(0), H.origin_direction(1), H.origin_direction(2)};
  CHECK(intermediate_ricci(H, H.origin(), hp, H.origin_direction(1)) == doctest::Approx(-2.0));

  bool raised = false;
  try {
    intermediate_ricci(S, x, {S.origin_direction(0), S.origin_direction(0)}, S.origin_direction(4));
  } catch (const Error& e) {
    raised = e.kind() == ErrorKind::NonOrthonormalPlane;
  }
  CHECK(raised);
}

TEST_CASE("intermediate Ricci matches a curvature-matrix sum and the model lower bounds") {
  std::mt19937_64 rng(16);
  for (const auto& M : {ModelManifold::sphere(5, 2.0), ModelManifold::hyperbolic(5, -0.5)}) {
    const double k = M.curvature();
    for (int trial = 0; trial < 40; ++trial) {
      const Vector x = random_point(M, rng, 0.8);
      const Vector w = random_tangent(M, x, rng, 1.0);
      const int p = 1 + trial % 4;
      // Random orthonormal p-plane by Gram-Schmidt.
      std::vector<Vector> plane;
      while (static_cast<int>(plane.size()) < p) {
        Vector e = M.project_tangent(x, oracle::gaussian(rng, M.embedding_dim()));
        for (const auto& f : plane) e -= M.inner(e, f) * f;
        plane.push_back(e / M.norm(e));
      }
      const double ric = intermediate_ricci(M, x, plane, w);
      const auto F = build_parallel_frame(M, x, w, plane, {}, 2);
      CHECK(std::abs(ric - curvature_matrix(M, F, 0.0).trace()) <= 1e-10);
      const double lower = k > 0 ? (p - 1) * k : p * k;
      CHECK(ric >= lower - 1e-10);
    }
  }
}

TEST_CASE("ball volumes and sinc") {
  CHECK(ball_volume(1) == doctest::Approx(2.0));
  CHECK(ball_volume(2) == doctest::Approx(oracle::pi));
  CHECK(ball_volume(4) == doctest::Approx(oracle::pi * oracle::pi / 2.0));
  for (int k = 1; k <= 9; ++k) {
    CHECK(ball_volume(k) == doctest::Approx(oracle::ball_volume(k)).epsilon(1e-14));
    CHECK(unit_sphere_area(k) == doctest::Approx(oracle::sphere_area(k)).epsilon(1e-14));
  }
  CHECK(sinc(0.0) == 1.0);
  CHECK(sinc(1e-9) == doctest::Approx(1.0));
  CHECK(sinc(0.5) == doctest::Approx(std::sin(0.5) / 0.5));
  CHECK(sinhc(0.0) == 1.0);
}

TEST_CASE("model volumes") {
  CHECK(ModelManifold::sphere(4).volume() == doctest::Approx(8.0 * oracle::pi * oracle::pi / 3.0));
  CHECK(ModelManifold::sphere(4).diameter() == doctest::Approx(oracle::pi));
  const auto H = ModelManifold::hyperbolic(4);
  const double r = 0.8;
  const double ref = oracle::sphere_area(3) * oracle::simpson([](double s) { return std::pow(std::sinh(s), 3); }, 0, r);
  CHECK(geodesic_ball_volume(H, r) == doctest::Approx(ref).epsilon(1e-9));
}

TEST_CASE("asymptotic volume ratio") {
  CHECK(asymptotic_volume_ratio(ModelManifold::euclidean(3)) == 1.0);
  CHECK(asymptotic_volume_ratio(ModelManifold::product_with_line(ModelManifold::euclidean(3))) == 1.0);
  for (const auto& M : {ModelManifold::sphere(3), ModelManifold::hyperbolic(3)}) {
    bool raised = false;
    try {
      asymptotic_volume_ratio(M);
    } catch (const Error& e) {
      raised = e.kind() == ErrorKind::Unsupported;
    }
    CHECK(raised);
  }
}
