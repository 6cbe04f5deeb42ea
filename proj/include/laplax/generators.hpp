#pragma once

// Graph families for tests, benchmarks and the CLI.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"
#include "graph.hpp"
#include "random.hpp"

namespace laplax::gen {

namespace detail {
inline WeightedMultigraph build(std::size_t n, const std::vector<std::pair<Vertex, Vertex>>& pairs, double w = 1.0) {
  std::vector<Edge> edges;
  edges.reserve(pairs.size());
  for (const auto& [u, v] : pairs) edges.push_back({u, v, w, edges.size()});
  return WeightedMultigraph(n, std::move(edges));
}
inline void guard(double count, const char* what) {
  if (count > 1e9) throw InputError(std::string(what) + " is too large to generate");
}
}  // namespace detail

inline WeightedMultigraph path(std::size_t n) {
  std::vector<std::pair<Vertex, Vertex>> p;
  for (std::size_t i = 1; i < n; ++i) p.emplace_back(static_cast<Vertex>(i - 1), static_cast<Vertex>(i));
  return detail::build(n, p);
}

inline WeightedMultigraph cycle(std::size_t n) {
  require(n >= 3, "a cycle needs at least 3 vertices");
  auto p = std::vector<std::pair<Vertex, Vertex>>{};
  for (std::size_t i = 0; i < n; ++i) p.emplace_back(static_cast<Vertex>(i), static_cast<Vertex>((i + 1) % n));
  return detail::build(n, p);
}

inline WeightedMultigraph star(std::size_t leaves) {
  std::vector<std::pair<Vertex, Vertex>> p;
  for (std::size_t i = 1; i <= leaves; ++i) p.emplace_back(0, static_cast<Vertex>(i));
  return detail::build(leaves + 1, p);
}

// rows x cols grid, vertex r * cols + c.
inline WeightedMultigraph grid(std::size_t rows, std::size_t cols) {
  detail::guard(static_cast<double>(rows) * static_cast<double>(cols), "grid");
  std::vector<std::pair<Vertex, Vertex>> p;
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) {
      const auto v = static_cast<Vertex>(r * cols + c);
      if (c + 1 < cols) p.emplace_back(v, v + 1);
      if (r + 1 < rows) p.emplace_back(v, static_cast<Vertex>(v + cols));
    }
  return detail::build(rows * cols, p);
}

// G(n, p), each pair independently.
inline WeightedMultigraph erdos_renyi(std::size_t n, double prob, std::uint64_t seed) {
  require(prob >= 0.0 && prob <= 1.0, "edge probability must be in [0, 1]");
  detail::guard(static_cast<double>(n) * static_cast<double>(n) * prob / 2, "random graph");
  Rng rng(seed);
  std::vector<std::pair<Vertex, Vertex>> p;
  if (prob > 0.0 && n > 1) {
    // geometric skipping over the pairs (u < v) in row order
    const double lq = std::log1p(-std::min(prob, 1.0 - 1e-16));
    const std::uint64_t total = static_cast<std::uint64_t>(n) * (n - 1) / 2;
    std::uint64_t k = 0, row_start = 0, row_end = n - 1;
    std::size_t u = 0;
    for (bool first = true;; first = false) {
      const double skip = prob >= 1.0 ? 0.0 : std::floor(std::log1p(-rng.unit()) / lq);
      if (skip >= static_cast<double>(total)) break;
      k += static_cast<std::uint64_t>(skip) + (first ? 0 : 1);
      if (k >= total) break;
      while (k >= row_end) {
        ++u;
        row_start = row_end;
        row_end += n - 1 - u;
      }
      p.emplace_back(static_cast<Vertex>(u), static_cast<Vertex>(u + 1 + (k - row_start)));
    }
  }
  return detail::build(n, p);
}

inline WeightedMultigraph erdos_renyi_degree(std::size_t n, double average_degree, std::uint64_t seed) {
  return erdos_renyi(n, n > 1 ? std::min(1.0, average_degree / static_cast<double>(n - 1)) : 0.0, seed);
}

// Random spanning tree (each vertex of a random order attaches to an earlier
// one) plus `extra` further edges between distinct random vertices.
inline WeightedMultigraph random_connected(std::size_t n, std::size_t extra, std::uint64_t seed) {
  require(n >= 1, "graph needs a vertex");
  Rng rng(seed);
  std::vector<Vertex> order(n);
  std::iota(order.begin(), order.end(), Vertex{0});
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
  std::vector<std::pair<Vertex, Vertex>> p;
  std::set<std::pair<Vertex, Vertex>> seen;
  for (std::size_t i = 1; i < n; ++i) {
    const Vertex a = order[i], b = order[rng.below(i)];
    p.emplace_back(a, b);
    seen.insert(std::minmax(a, b));
  }
  const std::size_t capacity = n * (n - 1) / 2;
  extra = std::min(extra, capacity - p.size());
  while (extra > 0) {
    const auto a = static_cast<Vertex>(rng.below(n)), b = static_cast<Vertex>(rng.below(n));
    if (a == b || !seen.insert(std::minmax(a, b)).second) continue;
    p.emplace_back(a, b);
    --extra;
  }
  return detail::build(n, p);
}

// Random tree on n vertices.
inline WeightedMultigraph random_tree(std::size_t n, std::uint64_t seed) { return random_connected(n, 0, seed); }

// Points in the unit square joined when closer than `radius`.
inline WeightedMultigraph geometric(std::size_t n, double radius, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::pair<double, double>> pt(n);
  for (auto& q : pt) q = {rng.unit(), rng.unit()};
  const std::size_t cells = std::max<std::size_t>(1, static_cast<std::size_t>(1.0 / std::max(radius, 1e-9)));
  detail::guard(static_cast<double>(cells) * static_cast<double>(cells), "geometric grid");
  std::vector<std::vector<Vertex>> bucket(cells * cells);
  auto cell = [&](double x) { return std::min(cells - 1, static_cast<std::size_t>(x * static_cast<double>(cells))); };
  for (std::size_t i = 0; i < n; ++i) bucket[cell(pt[i].first) * cells + cell(pt[i].second)].push_back(static_cast<Vertex>(i));
  std::vector<std::pair<Vertex, Vertex>> p;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t cx = cell(pt[i].first), cy = cell(pt[i].second);
    for (std::size_t x = cx ? cx - 1 : 0; x <= std::min(cells - 1, cx + 1); ++x)
      for (std::size_t y = cy ? cy - 1 : 0; y <= std::min(cells - 1, cy + 1); ++y)
        for (Vertex j : bucket[x * cells + y]) {
          if (j <= i) continue;
          const double dx = pt[i].first - pt[j].first, dy = pt[i].second - pt[j].second;
          if (dx * dx + dy * dy < radius * radius) p.emplace_back(static_cast<Vertex>(i), j);
        }
  }
  std::sort(p.begin(), p.end());
  return detail::build(n, p);
}

// Same edges, weights drawn uniformly from [lo, hi].
inline WeightedMultigraph with_uniform_weights(const WeightedMultigraph& g, double lo, double hi, std::uint64_t seed) {
  require(lo > 0.0 && hi >= lo, "weight range must be positive");
  Rng rng(seed);
  std::vector<Edge> edges(g.edges().begin(), g.edges().end());
  for (auto& e : edges) e.w = lo + (hi - lo) * rng.unit();
  return WeightedMultigraph(g.num_vertices(), std::move(edges));
}

// Same edges, each weight `light` or `heavy` with equal probability.
inline WeightedMultigraph with_two_scales(const WeightedMultigraph& g, double light, double heavy, std::uint64_t seed) {
  require(light > 0.0 && heavy > 0.0, "weights must be positive");
  Rng rng(seed);
  std::vector<Edge> edges(g.edges().begin(), g.edges().end());
  for (auto& e : edges) e.w = rng.below(2) ? heavy : light;
  return WeightedMultigraph(g.num_vertices(), std::move(edges));
}

}  // namespace laplax::gen
