#pragma once

// Independent reference computations for the tests. Nothing here calls into
// the library's numerics; only plain Eigen and the standard library.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <numeric>
#include <random>
#include <vector>

namespace oracle {

inline constexpr double pi = std::numbers::pi;

/// Unit-ball volumes from the two-step recursion V_k = 2 pi / k V_{k-2}.
inline double ball_volume(int k) {
  if (k == 0) return 1.0;
  if (k == 1) return 2.0;
  return 2.0 * pi / k * ball_volume(k - 2);
}

/// |S^k| = (k + 1) |B^{k+1}|.
inline double sphere_area(int k) { return (k + 1) * ball_volume(k + 1); }

/// Composite Simpson rule with an even number of panels.
inline double simpson(const std::function<double(double)>& g, double a, double b, int panels = 2000) {
  if (panels % 2) ++panels;
  const double h = (b - a) / panels;
  double s = g(a) + g(b);
  for (int i = 1; i < panels; ++i) s += (i % 2 ? 4.0 : 2.0) * g(a + i * h);
  return s * h / 3.0;
}

/// Minimum assignment cost over all permutations (uniform n x n marginals).
inline double brute_force_assignment(const Eigen::MatrixXd& C) {
  const int n = static_cast<int>(C.rows());
  std::vector<int> p(n);
  std::iota(p.begin(), p.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double c = 0.0;
    for (int i = 0; i < n; ++i) c += C(i, p[i]);
    best = std::min(best, c / n);
  } while (std::next_permutation(p.begin(), p.end()));
  return best;
}

/// Great-circle angle between two points of a sphere of radius R.
inline double sphere_angle(const Eigen::VectorXd& x, const Eigen::VectorXd& y, double R) {
  const double c = std::clamp(x.dot(y) / (R * R), -1.0, 1.0);
  return std::acos(c);
}

/// Hyperboloid distance for K = -1/R^2 from the Minkowski product (time first).
inline double hyperboloid_distance(const Eigen::VectorXd& x, const Eigen::VectorXd& y, double R) {
  const double b = x[0] * y[0] - x.tail(x.size() - 1).dot(y.tail(y.size() - 1));
  return R * std::acosh(std::max(1.0, b / (R * R)));
}

inline Eigen::VectorXd gaussian(std::mt19937_64& rng, int d) {
  std::normal_distribution<double> N(0.0, 1.0);
  Eigen::VectorXd g(d);
  for (int i = 0; i < d; ++i) g[i] = N(rng);
  return g;
}

}  // namespace oracle
