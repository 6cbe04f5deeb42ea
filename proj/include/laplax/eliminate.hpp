#pragma once

// Greedy partial Cholesky on degree-1 and degree-2 vertices.
//
// Each round flips a coin for every degree-2 vertex (heads with probability
// 1/3); a vertex is marked when it shows heads and none of its neighbours
// showed heads. All degree-1 vertices are then raked into their neighbour,
// and marked vertices still of degree 2 are spliced out, joining their two
// neighbours by the series conductance w1 w2 / (w1 + w2). Parallel edges are
// merged by adding weights. Rounds stop once a component with n - 1 + m edges
// is down to max(1, 2m - 2) vertices.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "error.hpp"
#include "graph.hpp"
#include "random.hpp"
#include "sparse.hpp"

namespace laplax {

struct Degree1Pivot {
  Vertex v;
  Vertex neighbor;
  double w;
  friend bool operator==(const Degree1Pivot&, const Degree1Pivot&) = default;
};

struct Degree2Pivot {
  Vertex v;
  Vertex left;
  Vertex right;
  double w_left;
  double w_right;
  EdgeId replacement;  // id given to the new left-right edge
  friend bool operator==(const Degree2Pivot&, const Degree2Pivot&) = default;
};

using Pivot = std::variant<Degree1Pivot, Degree2Pivot>;

inline Vertex pivot_vertex(const Pivot& p) {
  return std::visit([](const auto& q) { return q.v; }, p);
}

struct EliminationRecord {
  std::size_t n = 0;                     // vertices of the input graph
  std::vector<Pivot> pivots;             // in elimination order
  std::vector<std::size_t> round_end;    // pivots[round_end[r-1] .. round_end[r]) form round r
  std::vector<Vertex> survivors;         // reduced vertex -> input vertex, ascending
  std::vector<Vertex> component;         // input vertex -> component label
  std::size_t component_count = 0;
  std::size_t target = 0;                // vertex budget the rounds aimed for

  std::size_t rounds() const { return round_end.size(); }
  friend bool operator==(const EliminationRecord&, const EliminationRecord&) = default;
};

struct Elimination {
  WeightedMultigraph reduced;
  EliminationRecord record;
};

struct EliminationOptions {
  std::size_t max_rounds = 0;  // 0: 64 ceil(log2 n) + 64
};

inline Elimination greedy_elimination(const WeightedMultigraph& g, std::uint64_t seed,
                                      const EliminationOptions& opt = {}) {
  const std::size_t n = g.num_vertices();
  Elimination out;
  EliminationRecord& rec = out.record;
  rec.n = n;
  rec.component = components(g, &rec.component_count);

  std::vector<std::map<Vertex, double>> adj(n);
  for (const auto& e : g.edges()) {
    adj[e.u][e.v] += e.w;
    adj[e.v][e.u] += e.w;
  }
  // Budget per component from the merged edge count.
  std::vector<std::size_t> comp_vertices(rec.component_count, 0), comp_edges(rec.component_count, 0);
  for (Vertex v = 0; v < n; ++v) {
    ++comp_vertices[rec.component[v]];
    comp_edges[rec.component[v]] += adj[v].size();
  }
  std::size_t target = 0;
  for (std::size_t c = 0; c < rec.component_count; ++c) {
    const std::size_t edges = comp_edges[c] / 2;
    const std::size_t extra = edges + 1 - comp_vertices[c];
    target += extra >= 2 ? std::max<std::size_t>(1, 2 * extra - 2) : 1;
  }
  rec.target = target;

  std::vector<char> alive(n, 1);
  std::size_t alive_count = n;
  EdgeId next_id = g.next_free_id();
  const std::size_t max_rounds = opt.max_rounds ? opt.max_rounds : 64 * log2_ceil(std::max<std::size_t>(n, 2)) + 64;

  auto remove_vertex = [&](Vertex v) {
    for (const auto& [u, w] : adj[v]) adj[u].erase(v);
    adj[v].clear();
    alive[v] = 0;
    --alive_count;
  };

  for (std::size_t round = 1; alive_count > target && round <= max_rounds; ++round) {
    std::vector<Vertex> leaves, twos;
    for (Vertex v = 0; v < n; ++v) {
      if (!alive[v]) continue;
      if (adj[v].size() == 1) leaves.push_back(v);
      if (adj[v].size() == 2) twos.push_back(v);
    }
    if (leaves.empty() && twos.empty()) break;

    Rng rng(derive_seed(seed, round));
    std::vector<char> heads(n, 0);
    for (Vertex v : twos) heads[v] = rng.below(3) == 0;
    std::vector<Vertex> marked;
    for (Vertex v : twos) {
      if (!heads[v]) continue;
      bool ok = true;
      for (const auto& [u, w] : adj[v])
        if (heads[u]) ok = false;
      if (ok) marked.push_back(v);
    }

    for (Vertex v : leaves) {
      if (!alive[v] || adj[v].size() != 1) continue;
      const auto [u, w] = *adj[v].begin();
      // Two adjacent leaves: keep the smaller id.
      if (adj[u].size() == 1 && u > v) continue;
      rec.pivots.push_back(Degree1Pivot{v, u, w});
      remove_vertex(v);
    }
    for (Vertex v : marked) {
      if (!alive[v] || adj[v].size() != 2) continue;
      auto it = adj[v].begin();
      const auto [a, wa] = *it++;
      const auto [b, wb] = *it;
      rec.pivots.push_back(Degree2Pivot{v, a, b, wa, wb, next_id++});
      remove_vertex(v);
      const double w = wa * wb / (wa + wb);
      adj[a][b] += w;
      adj[b][a] += w;
    }
    rec.round_end.push_back(rec.pivots.size());
  }

  std::vector<Vertex> index(n, kNoVertex);
  for (Vertex v = 0; v < n; ++v)
    if (alive[v]) {
      index[v] = static_cast<Vertex>(rec.survivors.size());
      rec.survivors.push_back(v);
    }
  std::vector<Edge> edges;
  for (Vertex v : rec.survivors)
    for (const auto& [u, w] : adj[v])
      if (u > v) edges.push_back({index[v], index[u], w, edges.size()});
  out.reduced = WeightedMultigraph(rec.survivors.size(), std::move(edges));
  return out;
}

namespace detail {

// b after every pivot has pushed its entry onto its neighbours. Entries of
// eliminated vertices hold the value they had when eliminated.
inline Vector forward_substitute(const EliminationRecord& rec, std::span<const double> b) {
  if (b.size() != rec.n)
    throw InputError("right-hand side has " + std::to_string(b.size()) + " entries, elimination record expects " +
                     std::to_string(rec.n));
  Vector work(b.begin(), b.end());
  for (const auto& p : rec.pivots) {
    if (const auto* d1 = std::get_if<Degree1Pivot>(&p)) {
      work[d1->neighbor] += work[d1->v];
    } else {
      const auto& d2 = std::get<Degree2Pivot>(p);
      const double s = d2.w_left + d2.w_right;
      work[d2.left] += d2.w_left / s * work[d2.v];
      work[d2.right] += d2.w_right / s * work[d2.v];
    }
  }
  return work;
}

}  // namespace detail

// Right-hand side of the reduced system.
inline Vector reduce_rhs(const EliminationRecord& rec, std::span<const double> b) {
  const Vector work = detail::forward_substitute(rec, b);
  Vector out(rec.survivors.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = work[rec.survivors[i]];
  return out;
}

// Extends a solution of the reduced system to the input vertices by back
// substitution, then removes the per-component mean.
inline Vector eliminate_solve(const EliminationRecord& rec, std::span<const double> reduced_x,
                              std::span<const double> b) {
  if (reduced_x.size() != rec.survivors.size())
    throw InputError("reduced solution has " + std::to_string(reduced_x.size()) + " entries, record has " +
                     std::to_string(rec.survivors.size()) + " survivors");
  const Vector work = detail::forward_substitute(rec, b);
  Vector x(rec.n, 0.0);
  for (std::size_t i = 0; i < reduced_x.size(); ++i) x[rec.survivors[i]] = reduced_x[i];
  for (auto it = rec.pivots.rbegin(); it != rec.pivots.rend(); ++it) {
    if (const auto* d1 = std::get_if<Degree1Pivot>(&*it)) {
      x[d1->v] = x[d1->neighbor] + work[d1->v] / d1->w;
    } else {
      const auto& d2 = std::get<Degree2Pivot>(*it);
      x[d2.v] = (d2.w_left * x[d2.left] + d2.w_right * x[d2.right] + work[d2.v]) / (d2.w_left + d2.w_right);
    }
  }
  project_mean_zero(x, rec.component, rec.component_count);
  return x;
}

}  // namespace laplax
