// Primal network simplex for the dense transportation problem.
//
// Nodes 0..S-1 are sources, S..S+T-1 sinks, S+T an artificial root. The
// initial tree uses artificial arcs i -> root (cost 0) and root -> j (cost
// big-M); those arcs are never priced, so they only leave the basis. The tree
// is kept strongly feasible with the last-blocking-arc leaving rule, which
// excludes cycling under degeneracy.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "otlab/error.hpp"
#include "otlab/transport.hpp"

namespace otlab {

namespace {

constexpr int kUp = 1;     // tree arc points from the node to its parent
constexpr int kDown = -1;  // tree arc points from the parent to the node

class NetworkSimplex {
 public:
  NetworkSimplex(const std::vector<double>& mu, const std::vector<double>& nu, const Matrix& C)
      : S_(static_cast<int>(mu.size())), T_(static_cast<int>(nu.size())), root_(S_ + T_) {
    const int real = S_ * T_;
    const int N = S_ + T_ + 1;
    cost_.resize(real + S_ + T_);
    src_.resize(cost_.size());
    dst_.resize(cost_.size());
    double cmax = 0.0;
    for (int i = 0; i < S_; ++i) {
      for (int j = 0; j < T_; ++j) {
        const int a = i * T_ + j;
        cost_[a] = C(i, j);
        src_[a] = i;
        dst_[a] = S_ + j;
        cmax = std::max(cmax, std::abs(C(i, j)));
      }
    }
    scale_ = cmax + 1.0;
    const double big = scale_ * (S_ + T_);
    supply_.assign(N, 0.0);
    for (int i = 0; i < S_; ++i) supply_[i] = mu[i];
    for (int j = 0; j < T_; ++j) supply_[S_ + j] = -nu[j];

    flow_.assign(cost_.size(), 0.0);
    parent_.assign(N, -1);
    pred_.assign(N, -1);
    dir_.assign(N, 0);
    depth_.assign(N, 0);
    pot_.assign(N, 0.0);
    children_.assign(N, {});
    for (int i = 0; i < S_; ++i) {
      const int a = real + i;
      cost_[a] = 0.0;
      src_[a] = i;
      dst_[a] = root_;
      attach(i, a, kUp);
      flow_[a] = mu[i];
      pot_[i] = 0.0;
    }
    for (int j = 0; j < T_; ++j) {
      const int a = real + S_ + j;
      cost_[a] = big;
      src_[a] = root_;
      dst_[a] = S_ + j;
      attach(S_ + j, a, kDown);
      flow_[a] = nu[j];
      pot_[S_ + j] = big;
    }
    block_ = std::max(10, static_cast<int>(std::sqrt(static_cast<double>(real))));
  }

  int run() {
    int pivots = 0;
    const double eps = 1e-12 * scale_;
    for (;;) {
      const int e = find_entering(eps);
      if (e < 0) break;
      pivot(e);
      ++pivots;
    }
    peel_flows();
    return pivots;
  }

  double flow(int i, int j) const { return flow_[i * T_ + j]; }
  double potential(int node) const { return pot_[node]; }

 private:
  void attach(int node, int arc, int dir) {
    parent_[node] = root_;
    pred_[node] = arc;
    dir_[node] = dir;
    depth_[node] = 1;
    children_[root_].push_back(node);
  }

  double reduced_cost(int a) const { return cost_[a] + pot_[src_[a]] - pot_[dst_[a]]; }

  int find_entering(double eps) {
    const int real = S_ * T_;
    int best = -1;
    double best_rc = -eps;
    int in_block = 0;
    for (int k = 0; k < real; ++k) {
      const int a = next_;
      next_ = next_ + 1 == real ? 0 : next_ + 1;
      const double rc = reduced_cost(a);
      if (rc < best_rc) {
        best_rc = rc;
        best = a;
      }
      if (++in_block == block_) {
        if (best >= 0) return best;
        in_block = 0;
      }
    }
    return best;
  }

  static void remove_child(std::vector<int>& list, int node) {
    auto it = std::find(list.begin(), list.end(), node);
    *it = list.back();
    list.pop_back();
  }

  void pivot(int e) {
    const int first = src_[e];
    const int second = dst_[e];
    int a = first;
    int b = second;
    while (a != b) {
      if (depth_[a] >= depth_[b]) {
        a = parent_[a];
      } else {
        b = parent_[b];
      }
    }
    const int join = a;

    constexpr double inf = std::numeric_limits<double>::infinity();
    double delta = inf;
    int out_node = -1;
    bool out_on_first = true;
    for (int u = first; u != join; u = parent_[u]) {
      const double d = dir_[u] == kUp ? flow_[pred_[u]] : inf;
      if (d < delta) {
        delta = d;
        out_node = u;
        out_on_first = true;
      }
    }
    for (int u = second; u != join; u = parent_[u]) {
      const double d = dir_[u] == kDown ? flow_[pred_[u]] : inf;
      if (d <= delta && d < inf) {
        delta = d;
        out_node = u;
        out_on_first = false;
      }
    }
    if (out_node < 0) raise(ErrorKind::NoConvergence, "unbounded pivot in transportation simplex");

    if (delta > 0.0) {
      flow_[e] += delta;
      for (int u = first; u != join; u = parent_[u]) flow_[pred_[u]] -= dir_[u] * delta;
      for (int u = second; u != join; u = parent_[u]) flow_[pred_[u]] += dir_[u] * delta;
    }

    // Re-hang the subtree below the leaving arc from the entering arc.
    const int u_in = out_on_first ? first : second;
    const int v_in = out_on_first ? second : first;
    const double rc = reduced_cost(e);
    const double shift = u_in == first ? -rc : rc;

    std::vector<int> stem;
    for (int u = u_in;; u = parent_[u]) {
      stem.push_back(u);
      if (u == out_node) break;
    }
    std::vector<int> old_parent(stem.size());
    std::vector<int> old_pred(stem.size());
    std::vector<int> old_dir(stem.size());
    for (std::size_t k = 0; k < stem.size(); ++k) {
      old_parent[k] = parent_[stem[k]];
      old_pred[k] = pred_[stem[k]];
      old_dir[k] = dir_[stem[k]];
    }
    remove_child(children_[old_parent.back()], out_node);
    for (std::size_t k = 0; k + 1 < stem.size(); ++k) {
      remove_child(children_[stem[k + 1]], stem[k]);
    }
    for (std::size_t k = stem.size() - 1; k >= 1; --k) {
      const int w = stem[k];
      parent_[w] = stem[k - 1];
      pred_[w] = old_pred[k - 1];
      dir_[w] = -old_dir[k - 1];
      children_[stem[k - 1]].push_back(w);
    }
    parent_[u_in] = v_in;
    pred_[u_in] = e;
    dir_[u_in] = src_[e] == u_in ? kUp : kDown;
    children_[v_in].push_back(u_in);

    // Depths and potentials of the moved subtree.
    std::vector<int> stack{u_in};
    depth_[u_in] = depth_[v_in] + 1;
    while (!stack.empty()) {
      const int w = stack.back();
      stack.pop_back();
      pot_[w] += shift;
      for (int c : children_[w]) {
        depth_[c] = depth_[w] + 1;
        stack.push_back(c);
      }
    }
  }

  // Recomputes tree flows exactly from the supplies, leaves first.
  void peel_flows() {
    std::fill(flow_.begin(), flow_.end(), 0.0);
    std::vector<int> order;
    order.reserve(parent_.size());
    std::vector<int> stack{root_};
    while (!stack.empty()) {
      const int w = stack.back();
      stack.pop_back();
      order.push_back(w);
      for (int c : children_[w]) stack.push_back(c);
    }
    std::vector<double> excess = supply_;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      const int w = *it;
      if (w == root_) continue;
      // An up arc carries w's net supply to the parent; a down arc brings its demand.
      const double f = dir_[w] == kUp ? excess[w] : -excess[w];
      flow_[pred_[w]] = std::max(0.0, f);
      excess[parent_[w]] += excess[w];
    }
  }

  int S_;
  int T_;
  int root_;
  double scale_ = 1.0;
  int block_ = 10;
  int next_ = 0;
  std::vector<double> cost_;
  std::vector<int> src_;
  std::vector<int> dst_;
  std::vector<double> supply_;
  std::vector<double> flow_;
  std::vector<int> parent_;
  std::vector<int> pred_;
  std::vector<int> dir_;
  std::vector<int> depth_;
  std::vector<double> pot_;
  std::vector<std::vector<int>> children_;
};

}  // namespace

DiscreteCoupling solve_exact(const std::vector<double>& mu, const std::vector<double>& nu, const Matrix& C,
                             const ExactOptions& options) {
  const int S = static_cast<int>(mu.size());
  const int T = static_cast<int>(nu.size());
  if (C.rows() != S || C.cols() != T) raise(ErrorKind::LengthMismatch, "cost matrix shape");
  if (S == 0 || T == 0) raise(ErrorKind::EmptyDomain, "empty marginal");
  if (S > options.max_sources || T > options.max_targets) {
    raise(ErrorKind::SizeCap, std::to_string(S) + " x " + std::to_string(T) + " exceeds the exact cap " +
                                  std::to_string(options.max_sources) + " x " +
                                  std::to_string(options.max_targets));
  }
  NetworkSimplex ns(mu, nu, C);
  DiscreteCoupling out;
  out.iterations = ns.run();
  out.solver = SolverKind::Exact;
  out.source_weights = mu;
  out.target_weights = nu;
  out.phi.resize(S);
  out.psi.resize(T);
  for (int i = 0; i < S; ++i) out.phi[i] = -ns.potential(i);
  for (int j = 0; j < T; ++j) out.psi[j] = ns.potential(S + j);
  const double shift = out.psi.mean();
  out.psi.array() -= shift;
  out.phi.array() += shift;

  std::vector<double> rows(S, 0.0);
  std::vector<double> cols(T, 0.0);
  for (int i = 0; i < S; ++i) {
    for (int j = 0; j < T; ++j) {
      const double f = ns.flow(i, j);
      if (f > 0.0) {
        out.plan.push_back({i, j, f});
        out.cost += f * C(i, j);
        rows[i] += f;
        cols[j] += f;
      }
    }
  }
  double res = 0.0;
  double dual = 0.0;
  for (int i = 0; i < S; ++i) {
    res = std::max(res, std::abs(rows[i] - mu[i]));
    dual += mu[i] * out.phi[i];
  }
  for (int j = 0; j < T; ++j) {
    res = std::max(res, std::abs(cols[j] - nu[j]));
    dual += nu[j] * out.psi[j];
  }
  out.marginal_residual = res;
  out.duality_gap = std::abs(out.cost - dual);
  return out;
}

}  // namespace otlab
