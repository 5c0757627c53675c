// Microbenchmarks of the hot paths: exp/log maps, mesh construction, the
// exact and entropic solvers, and Jacobi propagation.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "otlab/geometry.hpp"
#include "otlab/jacobi.hpp"
#include "otlab/submanifold.hpp"
#include "otlab/transport.hpp"

using namespace otlab;

namespace {

ModelManifold model(int which) {
  switch (which) {
    case 1: return ModelManifold::sphere(4);
    case 2: return ModelManifold::hyperbolic(4);
    default: return ModelManifold::euclidean(4);
  }
}

std::vector<double> uniform_weights(int n) { return std::vector<double>(n, 1.0 / n); }

Matrix random_cost(int s, int t, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::vector<Vector> a, b;
  for (int i = 0; i < s; ++i) a.push_back(Vector::NullaryExpr(4, [&](Eigen::Index) { return U(rng); }));
  for (int j = 0; j < t; ++j) b.push_back(Vector::NullaryExpr(4, [&](Eigen::Index) { return U(rng); }));
  return cost_matrix(ModelManifold::euclidean(4), DiscreteMeasure::make(a, uniform_weights(s)),
                     DiscreteMeasure::make(b, uniform_weights(t)));
}

}  // namespace

static void BM_ExpLog(benchmark::State& state) {
  const ModelManifold M = model(static_cast<int>(state.range(0)));
  const Vector x = M.origin();
  const Vector v = 0.7 * M.origin_direction(0) + 0.4 * M.origin_direction(2);
  for (auto _ : state) {
    const Vector y = M.exp_map(x, v);
    benchmark::DoNotOptimize(M.log_map(x, y));
  }
}
BENCHMARK(BM_ExpLog)->Arg(0)->Arg(1)->Arg(2);

static void BM_BuildMesh(benchmark::State& state) {
  const ModelManifold M = ModelManifold::sphere(4);
  const int cells = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(build_submanifold(M, {ChartKind::GeodesicBallInSubsphere, 0.7, {}}, {cells, 0}));
  }
}
BENCHMARK(BM_BuildMesh)->Arg(16)->Arg(40)->Unit(benchmark::kMillisecond);

static void BM_SolveExact(benchmark::State& state) {
  const int s = static_cast<int>(state.range(0));
  const Matrix C = random_cost(s, 2 * s, 11);
  for (auto _ : state) benchmark::DoNotOptimize(solve_exact(uniform_weights(s), uniform_weights(2 * s), C));
}
BENCHMARK(BM_SolveExact)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);

static void BM_SolveEntropic(benchmark::State& state) {
  const Matrix C = random_cost(50, 50, 12);
  for (auto _ : state) benchmark::DoNotOptimize(solve_entropic(uniform_weights(50), uniform_weights(50), C));
}
BENCHMARK(BM_SolveEntropic)->Unit(benchmark::kMillisecond);

static void BM_Propagate(benchmark::State& state) {
  const ModelManifold M = ModelManifold::sphere(4);
  std::vector<Vector> tangent{M.origin_direction(0), M.origin_direction(1)};
  std::vector<Vector> normal{M.origin_direction(2), M.origin_direction(3)};
  const Vector w = 0.8 * normal[1] - 0.3 * tangent[0];
  const ParallelFrame frame = build_parallel_frame(M, M.origin(), w, tangent, normal, 2);
  Matrix P0 = Matrix::Zero(4, 4), dP0 = Matrix::Zero(4, 4);
  P0.topLeftCorner(2, 2).setIdentity();
  dP0.bottomRightCorner(2, 2).setIdentity();
  dP0(0, 0) = -0.2;
  const int steps = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(propagate(M, frame, P0, dP0, steps, 0.2, 0.0));
}
BENCHMARK(BM_Propagate)->Arg(1000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
