#pragma once

// Brute-force references: dense pseudoinverse solves, generalized eigenvalue
// bounds of a Laplacian pencil, all-pairs shortest paths, a straight-line
// transcription of the decomposition rounds, and a dense replay of greedy
// elimination. Single-threaded and deliberately simple.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <queue>
#include <span>
#include <vector>

#include "decompose.hpp"
#include "eliminate.hpp"
#include "error.hpp"
#include "graph.hpp"
#include "random.hpp"
#include "sparse.hpp"

namespace laplax::oracle {

inline constexpr std::size_t kDenseCeiling = 3000;

inline Eigen::MatrixXd dense(const CsrMatrix& A) {
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(A.dim()), static_cast<Eigen::Index>(A.dim()));
  for (const auto& t : A.triplets()) M(static_cast<Eigen::Index>(t.row), static_cast<Eigen::Index>(t.col)) += t.value;
  return M;
}

// Components of the nonzero off-diagonal pattern.
inline std::vector<std::size_t> pattern_components(const Eigen::MatrixXd& M, std::size_t* count) {
  const auto n = static_cast<std::size_t>(M.rows());
  std::vector<std::size_t> label(n, std::numeric_limits<std::size_t>::max());
  std::size_t next = 0;
  for (std::size_t s = 0; s < n; ++s) {
    if (label[s] != std::numeric_limits<std::size_t>::max()) continue;
    std::queue<std::size_t> q;
    q.push(s);
    label[s] = next;
    while (!q.empty()) {
      const std::size_t x = q.front();
      q.pop();
      for (std::size_t y = 0; y < n; ++y)
        if (y != x && M(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y)) != 0.0 &&
            label[y] == std::numeric_limits<std::size_t>::max()) {
          label[y] = next;
          q.push(y);
        }
    }
    ++next;
  }
  *count = next;
  return label;
}

// L^+ b for a Laplacian, via L + sum_c 1_c 1_c^T / |c|, which is positive
// definite and agrees with L^+ on the range of L.
inline Vector dense_pinv_solve(const CsrMatrix& L, std::span<const double> b, std::size_t ceiling = kDenseCeiling) {
  const std::size_t n = L.dim();
  if (n > ceiling) throw InputError("dense oracle ceiling exceeded: n = " + std::to_string(n));
  require(b.size() == n, "right-hand side length mismatch");
  Eigen::MatrixXd M = dense(L);
  std::size_t count = 0;
  const auto label = pattern_components(M, &count);
  std::vector<std::size_t> size(count, 0);
  for (auto c : label) ++size[c];
  Eigen::VectorXd rhs(static_cast<Eigen::Index>(n));
  std::vector<double> mean(count, 0.0);
  for (std::size_t i = 0; i < n; ++i) mean[label[i]] += b[i] / static_cast<double>(size[label[i]]);
  for (std::size_t i = 0; i < n; ++i) rhs(static_cast<Eigen::Index>(i)) = b[i] - mean[label[i]];
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (label[i] == label[j])
        M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) += 1.0 / static_cast<double>(size[label[i]]);
  Eigen::LLT<Eigen::MatrixXd> llt(M);
  if (llt.info() != Eigen::Success) throw AlgorithmError("dense factorization failed");
  Eigen::VectorXd x = llt.solve(rhs);
  Vector out(n);
  std::vector<double> xm(count, 0.0);
  for (std::size_t i = 0; i < n; ++i) xm[label[i]] += x(static_cast<Eigen::Index>(i)) / static_cast<double>(size[label[i]]);
  for (std::size_t i = 0; i < n; ++i) out[i] = x(static_cast<Eigen::Index>(i)) - xm[label[i]];
  return out;
}

// A^+ b for any symmetric positive semidefinite A, by eigendecomposition.
inline Vector dense_psd_pinv_solve(const CsrMatrix& A, std::span<const double> b,
                                   std::size_t ceiling = kDenseCeiling) {
  const std::size_t n = A.dim();
  if (n > ceiling) throw InputError("dense oracle ceiling exceeded: n = " + std::to_string(n));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense(A));
  const Eigen::VectorXd& ev = es.eigenvalues();
  const double cutoff = 1e-11 * std::max(1.0, ev.cwiseAbs().maxCoeff());
  Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(b.data(), static_cast<Eigen::Index>(n));
  Eigen::VectorXd coeff = es.eigenvectors().transpose() * rhs;
  for (Eigen::Index i = 0; i < coeff.size(); ++i) coeff(i) = ev(i) > cutoff ? coeff(i) / ev(i) : 0.0;
  Eigen::VectorXd x = es.eigenvectors() * coeff;
  return Vector(x.data(), x.data() + n);
}

struct DensePencilBounds {
  double lambda_min = 0.0;
  double lambda_max = 0.0;
};

// Extreme generalized eigenvalues of L_H x = lambda L_G x on the common range.
// Both Laplacians must have the same connected components; one vertex per
// component is grounded to remove the shared nullspace.
inline DensePencilBounds pencil_bounds(const CsrMatrix& H, const CsrMatrix& G, std::size_t ceiling = kDenseCeiling) {
  if (H.dim() != G.dim()) throw InputError("pencil dimension mismatch");
  const std::size_t n = G.dim();
  if (n > ceiling) throw InputError("dense oracle ceiling exceeded: n = " + std::to_string(n));
  const Eigen::MatrixXd h = dense(H), g = dense(G);
  std::size_t ch = 0, cg = 0;
  const auto lh = pattern_components(h, &ch);
  const auto lg = pattern_components(g, &cg);
  if (ch != cg || lh != lg) throw InputError("pencil operands have different connected components");
  std::vector<char> grounded(cg, 0);
  std::vector<Eigen::Index> keep;
  for (std::size_t i = 0; i < n; ++i) {
    if (!grounded[lg[i]]) {
      grounded[lg[i]] = 1;
      continue;
    }
    keep.push_back(static_cast<Eigen::Index>(i));
  }
  DensePencilBounds out{1.0, 1.0};
  if (keep.empty()) return out;
  const auto k = static_cast<Eigen::Index>(keep.size());
  Eigen::MatrixXd hr(k, k), gr(k, k);
  for (Eigen::Index a = 0; a < k; ++a)
    for (Eigen::Index b = 0; b < k; ++b) {
      hr(a, b) = h(keep[a], keep[b]);
      gr(a, b) = g(keep[a], keep[b]);
    }
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(hr, gr, Eigen::EigenvaluesOnly | Eigen::Ax_lBx);
  if (es.info() != Eigen::Success) throw AlgorithmError("generalized eigensolver failed");
  out.lambda_min = es.eigenvalues().minCoeff();
  out.lambda_max = es.eigenvalues().maxCoeff();
  return out;
}

inline double rayleigh(const CsrMatrix& H, const CsrMatrix& G, std::span<const double> x) {
  return H.quadratic_form(x) / G.quadratic_form(x);
}

// All-pairs weighted shortest paths (Floyd-Warshall).
inline std::vector<std::vector<double>> all_pairs_shortest_paths(const WeightedMultigraph& g) {
  const std::size_t n = g.num_vertices();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> d(n, std::vector<double>(n, inf));
  for (std::size_t v = 0; v < n; ++v) d[v][v] = 0.0;
  for (const auto& e : g.edges()) {
    d[e.u][e.v] = std::min(d[e.u][e.v], e.w);
    d[e.v][e.u] = std::min(d[e.v][e.u], e.w);
  }
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i) {
      if (d[i][k] == inf) continue;
      for (std::size_t j = 0; j < n; ++j)
        if (d[i][k] + d[k][j] < d[i][j]) d[i][j] = d[i][k] + d[k][j];
    }
  return d;
}

// Sum over edges of d_H(u, v) / w(e) using all-pairs distances.
inline double brute_total_stretch(const WeightedMultigraph& g, const WeightedMultigraph& h) {
  const auto d = all_pairs_shortest_paths(h);
  double total = 0.0;
  for (const auto& e : g.edges()) total += d[e.u][e.v] / e.w;
  return total;
}

// Hop levels from s by a plain queue BFS.
inline std::vector<std::vector<Vertex>> bfs_levels(const WeightedMultigraph& g, Vertex s) {
  std::vector<int> dist(g.num_vertices(), -1);
  std::vector<std::vector<Vertex>> levels{{s}};
  dist[s] = 0;
  std::queue<Vertex> q;
  q.push(s);
  while (!q.empty()) {
    const Vertex x = q.front();
    q.pop();
    for (const auto& e : g.edges()) {
      Vertex y;
      if (e.u == x)
        y = e.v;
      else if (e.v == x)
        y = e.u;
      else
        continue;
      if (dist[y] >= 0) continue;
      dist[y] = dist[x] + 1;
      if (levels.size() <= static_cast<std::size_t>(dist[y])) levels.emplace_back();
      levels[static_cast<std::size_t>(dist[y])].push_back(y);
      q.push(y);
    }
  }
  for (auto& l : levels) std::sort(l.begin(), l.end());
  return levels;
}

// Owner per vertex from a table of per-center hop distances: the center that
// minimizes distance + delay among those whose ball reaches the vertex.
inline std::vector<Vertex> brute_jittered_assignment(const WeightedMultigraph& g, std::span<const CenterStart> starts,
                                                     std::size_t cap, std::span<const char> alive = {}) {
  const std::size_t n = g.num_vertices();
  std::vector<Vertex> owner(n, kNoVertex);
  std::vector<std::size_t> best(n, std::numeric_limits<std::size_t>::max());
  for (const auto& s : starts) {
    if (!alive.empty() && !alive[s.center]) continue;
    if (s.delay > cap) continue;
    // plain BFS inside the alive set
    std::vector<std::size_t> dist(n, std::numeric_limits<std::size_t>::max());
    std::queue<Vertex> q;
    dist[s.center] = 0;
    q.push(s.center);
    while (!q.empty()) {
      const Vertex x = q.front();
      q.pop();
      for (const auto& inc : g.incident(x)) {
        const Vertex y = inc.neighbor;
        if ((!alive.empty() && !alive[y]) || dist[y] != std::numeric_limits<std::size_t>::max()) continue;
        dist[y] = dist[x] + 1;
        q.push(y);
      }
    }
    for (std::size_t v = 0; v < n; ++v) {
      if (dist[v] == std::numeric_limits<std::size_t>::max()) continue;
      const std::size_t cost = dist[v] + s.delay;
      if (cost > cap) continue;
      if (cost < best[v] || (cost == best[v] && s.center < owner[v])) {
        best[v] = cost;
        owner[v] = s.center;
      }
    }
  }
  return owner;
}

// Straight-line rounds of the decomposition with the same random stream per
// round: sample, draw delays in ascending center order, assign by brute force.
inline Decomposition reference_split_graph(const WeightedMultigraph& g, const SplitParams& p) {
  const std::size_t n = g.num_vertices();
  std::size_t logn = 0;
  while ((std::size_t{1} << logn) < n) ++logn;
  logn = std::max<std::size_t>(logn, 1);
  const std::size_t R = p.R ? *p.R : std::max<std::size_t>(1, p.rho / (2 * logn));
  const std::size_t T = p.T ? *p.T : std::min(2 * logn, p.rho / R);

  Decomposition d;
  d.assignment.assign(n, kNoVertex);
  std::vector<char> alive(n, 1);
  for (std::size_t t = 1; t <= T; ++t) {
    std::vector<Vertex> remaining;
    for (Vertex v = 0; v < n; ++v)
      if (alive[v]) remaining.push_back(v);
    if (remaining.empty()) break;
    Rng rng(derive_seed(p.seed, t));
    std::vector<Vertex> S;
    std::vector<CenterStart> starts;
    if (t == T) {
      S = remaining;
      for (Vertex s : S) starts.push_back({s, 0});
    } else {
      double sigma = std::ceil(p.center_constant *
                               std::pow(static_cast<double>(n), static_cast<double>(t) / static_cast<double>(T) - 1.0) *
                               static_cast<double>(remaining.size()) * std::log(static_cast<double>(n)));
      std::size_t k = sigma >= static_cast<double>(remaining.size()) ? remaining.size()
                      : sigma < 1.0                                   ? 1
                                                                      : static_cast<std::size_t>(sigma);
      S = sample_without_replacement<Vertex>(rng, remaining, k);
      for (Vertex s : S) starts.push_back({s, static_cast<std::size_t>(rng.between(0, R))});
    }
    const auto owner = brute_jittered_assignment(g, starts, (T - t + 1) * R, alive);
    std::vector<Vertex> used;
    for (Vertex v : remaining)
      if (owner[v] != kNoVertex) used.push_back(owner[v]);
    std::sort(used.begin(), used.end());
    used.erase(std::unique(used.begin(), used.end()), used.end());
    std::map<Vertex, Vertex> index;
    for (Vertex c : used) {
      index[c] = static_cast<Vertex>(d.centers.size());
      d.centers.push_back(c);
    }
    for (Vertex v : remaining)
      if (owner[v] != kNoVertex) {
        d.assignment[v] = index[owner[v]];
        alive[v] = 0;
      }
    ++d.rounds;
  }
  return d;
}

// Largest hop distance from the center inside the component's induced
// subgraph, per component; SIZE_MAX if some member is unreachable.
inline std::vector<std::size_t> strong_radii(const WeightedMultigraph& g, const Decomposition& d) {
  std::vector<std::size_t> out(d.centers.size(), 0);
  for (std::size_t c = 0; c < d.centers.size(); ++c) {
    std::map<Vertex, std::size_t> dist;
    std::queue<Vertex> q;
    dist[d.centers[c]] = 0;
    q.push(d.centers[c]);
    while (!q.empty()) {
      const Vertex x = q.front();
      q.pop();
      for (const auto& inc : g.incident(x)) {
        const Vertex y = inc.neighbor;
        if (d.assignment[y] != c || dist.count(y)) continue;
        dist[y] = dist[x] + 1;
        out[c] = std::max(out[c], dist[y]);
        q.push(y);
      }
    }
    for (Vertex v = 0; v < g.num_vertices(); ++v)
      if (d.assignment[v] == c && !dist.count(v)) out[c] = std::numeric_limits<std::size_t>::max();
  }
  return out;
}

// Dense Gaussian elimination of the recorded pivots, in order, on L_G; the
// Schur complement on the survivors.
inline Eigen::MatrixXd replay_elimination(const WeightedMultigraph& g, const EliminationRecord& rec) {
  Eigen::MatrixXd M = dense(Laplacian::from_graph(g).matrix());
  std::vector<char> gone(g.num_vertices(), 0);
  for (const auto& p : rec.pivots) {
    const auto v = static_cast<Eigen::Index>(pivot_vertex(p));
    const double pv = M(v, v);
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
      if (gone[static_cast<std::size_t>(i)] || i == v || M(i, v) == 0.0) continue;
      for (Eigen::Index j = 0; j < M.cols(); ++j) {
        if (gone[static_cast<std::size_t>(j)] || j == v || M(v, j) == 0.0) continue;
        M(i, j) -= M(i, v) * M(v, j) / pv;
      }
    }
    gone[static_cast<std::size_t>(v)] = 1;
    M.row(v).setZero();
    M.col(v).setZero();
  }
  const auto k = static_cast<Eigen::Index>(rec.survivors.size());
  Eigen::MatrixXd S(k, k);
  for (Eigen::Index a = 0; a < k; ++a)
    for (Eigen::Index b = 0; b < k; ++b)
      S(a, b) = M(static_cast<Eigen::Index>(rec.survivors[static_cast<std::size_t>(a)]),
                  static_cast<Eigen::Index>(rec.survivors[static_cast<std::size_t>(b)]));
  return S;
}

}  // namespace laplax::oracle
