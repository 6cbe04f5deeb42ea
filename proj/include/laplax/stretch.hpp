#pragma once

// Exact stretch of graph edges over a subgraph by weighted shortest paths.
// Edge weights act as lengths here: stretch(e) = d_H(u, v) / w(e).

#include <limits>
#include <queue>
#include <span>
#include <vector>

#include "error.hpp"
#include "graph.hpp"
#include "parallel.hpp"

namespace laplax {

class DisconnectedError : public InputError {
public:
  DisconnectedError(Vertex u, Vertex v)
      : InputError("subgraph has no path between " + std::to_string(u) + " and " + std::to_string(v)), u(u), v(v) {}
  Vertex u, v;
};

struct StretchReport {
  std::vector<double> per_edge;  // aligned with G.edges()
  double total = 0.0;
};

// Dijkstra from `s` over h, stopping once every vertex in `targets` is settled.
inline std::vector<double> dijkstra_to(const WeightedMultigraph& h, Vertex s, std::span<const Vertex> targets) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(h.num_vertices(), kInf);
  std::vector<char> wanted(h.num_vertices(), 0);
  std::size_t remaining = 0;
  for (Vertex t : targets)
    if (!wanted[t]) {
      wanted[t] = 1;
      ++remaining;
    }
  using Item = std::pair<double, Vertex>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  dist[s] = 0.0;
  heap.push({0.0, s});
  while (!heap.empty() && remaining > 0) {
    auto [d, x] = heap.top();
    heap.pop();
    if (d > dist[x]) continue;
    if (wanted[x]) {
      wanted[x] = 0;
      --remaining;
    }
    for (const auto& inc : h.incident(x)) {
      const double nd = d + h.edge(inc.edge).w;
      if (nd < dist[inc.neighbor]) {
        dist[inc.neighbor] = nd;
        heap.push({nd, inc.neighbor});
      }
    }
  }
  return dist;
}

// Stretch of every edge of g over h (same vertex set). Sources run in
// parallel; each edge is charged to its smaller endpoint.
inline StretchReport total_stretch(const WeightedMultigraph& g, const WeightedMultigraph& h) {
  require(g.num_vertices() == h.num_vertices(), "graph and subgraph must share a vertex set");
  const std::size_t n = g.num_vertices();
  std::vector<std::vector<std::size_t>> owned(n);
  for (std::size_t k = 0; k < g.num_edges(); ++k) {
    const Edge& e = g.edge(k);
    owned[std::min(e.u, e.v)].push_back(k);
  }
  StretchReport report;
  report.per_edge.assign(g.num_edges(), 0.0);
  parallel_for(
      0, n,
      [&](std::size_t s) {
        if (owned[s].empty()) return;
        std::vector<Vertex> targets;
        for (std::size_t k : owned[s]) targets.push_back(g.edge(k).other(static_cast<Vertex>(s)));
        const auto dist = dijkstra_to(h, static_cast<Vertex>(s), targets);
        for (std::size_t k : owned[s]) {
          const Edge& e = g.edge(k);
          const double d = dist[e.other(static_cast<Vertex>(s))];
          if (!std::isfinite(d)) throw DisconnectedError(e.u, e.v);
          report.per_edge[k] = d / e.w;
        }
      },
      16);
  double total = 0.0;
  for (double s : report.per_edge) total += s;
  report.total = total;
  return report;
}

}  // namespace laplax
