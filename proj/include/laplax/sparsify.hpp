#pragma once

// Incremental sparsification: keep a low-stretch subgraph, scaled up, and
// add a few off-subgraph edges sampled in proportion to their stretch.
//
// Weights here are conductances. The stretch of e = (u, v) over the subgraph
// is w_e times the resistance of the subgraph path, i.e. w_e d(u, v) with
// lengths 1 / w.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <vector>

#include "error.hpp"
#include "graph.hpp"
#include "lowstretch.hpp"
#include "oracles.hpp"
#include "parallel.hpp"
#include "random.hpp"
#include "sparse.hpp"
#include "stretch.hpp"

namespace laplax {

struct SparsifyParams {
  double kappa = 10.0;
  double xi = 2.0;
  double c_is = 1.0;
  std::uint64_t seed = 0;
  bool checked = true;
  std::size_t dense_ceiling = 300;  // checked mode verifies only up to this size
  std::size_t max_attempts = 4;
};

struct SparsifyAudit {
  std::size_t q = 0;
  double stretch_sum = 0.0;   // S
  double kappa = 0.0;
  double scale = 1.0;         // factor applied to the subgraph
  double xi_used = 2.0;
  std::optional<double> lambda_min;
  std::optional<double> lambda_max;
  std::size_t attempts = 0;
  bool verified = false;
  bool first_attempt_pass = false;
  bool rescaled = false;
  bool fallback = false;
};

struct Sparsifier {
  WeightedMultigraph graph;
  SparsifyAudit audit;
};

// Graph with the same edges and lengths 1 / w.
inline WeightedMultigraph reciprocal_weights(const WeightedMultigraph& g) {
  std::vector<Edge> edges(g.edges().begin(), g.edges().end());
  for (auto& e : edges) e.w = 1.0 / e.w;
  return WeightedMultigraph(g.num_vertices(), std::move(edges));
}

// Stretch of every edge of g over the subgraph with the listed ids.
inline std::vector<double> conductance_stretch(const WeightedMultigraph& g, std::span<const EdgeId> subgraph) {
  const WeightedMultigraph lengths = reciprocal_weights(g);
  const WeightedMultigraph sub = lengths.edge_subgraph(subgraph);
  return total_stretch(lengths, sub).per_edge;
}

// q draws with replacement from the distribution proportional to `weights`;
// returns the draw count per index. Blocks of 1024 draws use their own
// derived stream so the result does not depend on the thread count.
inline std::vector<std::size_t> sample_proportional(std::span<const double> weights, std::size_t q, std::uint64_t seed) {
  std::vector<double> prefix(weights.size());
  double run = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    require(weights[i] >= 0.0 && std::isfinite(weights[i]), "sampling weights must be finite and nonnegative");
    run += weights[i];
    prefix[i] = run;
  }
  std::vector<std::size_t> counts(weights.size(), 0);
  if (q == 0 || run <= 0.0) return counts;
  constexpr std::size_t kBlock = 1024;
  const std::size_t blocks = (q + kBlock - 1) / kBlock;
  std::vector<std::vector<std::uint32_t>> picks(blocks);
  parallel_for(
      0, blocks,
      [&](std::size_t b) {
        Rng rng(derive_seed(seed, b));
        const std::size_t lo = b * kBlock, hi = std::min(q, lo + kBlock);
        auto& out = picks[b];
        out.reserve(hi - lo);
        for (std::size_t s = lo; s < hi; ++s) {
          const double u = rng.unit() * run;
          auto it = std::upper_bound(prefix.begin(), prefix.end(), u);
          if (it == prefix.end()) --it;
          // skip zero-weight entries that share a prefix value
          while (weights[static_cast<std::size_t>(it - prefix.begin())] == 0.0) ++it;
          out.push_back(static_cast<std::uint32_t>(it - prefix.begin()));
        }
      },
      1);
  for (const auto& block : picks)
    for (auto i : block) ++counts[i];
  return counts;
}

namespace detail {

inline WeightedMultigraph assemble(const WeightedMultigraph& g, const std::vector<char>& in_sub, double scale,
                                   const std::map<std::size_t, double>& sampled) {
  std::vector<Edge> edges;
  for (std::size_t k = 0; k < g.num_edges(); ++k)
    if (in_sub[k]) {
      Edge e = g.edge(k);
      e.w *= scale;
      edges.push_back(e);
    }
  for (const auto& [k, w] : sampled) {
    Edge e = g.edge(k);
    e.w = w;
    edges.push_back(e);
  }
  return WeightedMultigraph(g.num_vertices(), std::move(edges));
}

}  // namespace detail

// H with G <= H <= kappa G (verified and repaired in checked mode when the
// graph is small enough for the dense pencil).
inline Sparsifier incremental_sparsify(const WeightedMultigraph& g, std::span<const EdgeId> subgraph,
                                       const SparsifyParams& p) {
  require(p.kappa > 1.0, "kappa must exceed 1");
  require(p.xi >= 2.0, "xi must be at least 2");
  require(p.c_is > 0.0, "c_IS must be positive");
  const std::size_t n = g.num_vertices();
  const double logn = static_cast<double>(log2_ceil(std::max<std::size_t>(n, 2)));
  const double xi = std::min(p.xi, std::max(2.0, logn));

  std::vector<char> in_sub(g.num_edges(), 0);
  for (EdgeId id : subgraph) {
    auto k = g.index_of(id);
    if (!k) throw InputError("subgraph edge " + std::to_string(id) + " is not in the graph");
    in_sub[*k] = 1;
  }
  const auto stretch = conductance_stretch(g, subgraph);  // throws if the subgraph misses a connection
  std::vector<double> off(g.num_edges(), 0.0);
  double S = 0.0;
  for (std::size_t k = 0; k < g.num_edges(); ++k)
    if (!in_sub[k]) {
      off[k] = stretch[k];
      S += stretch[k];
    }

  Sparsifier out;
  SparsifyAudit& a = out.audit;
  a.kappa = p.kappa;
  a.xi_used = xi;
  a.stretch_sum = S;
  const double budget = p.c_is * S * logn * std::log2(xi) / p.kappa;
  a.q = S > 0.0 ? static_cast<std::size_t>(std::ceil(budget)) : 0;
  // Half of min(kappa, S log n log xi / q): the other half absorbs sampling error.
  const double ratio = a.q > 0 ? S * logn * std::log2(xi) / static_cast<double>(a.q) : p.kappa;
  a.scale = std::max(1.0, 0.5 * std::min(p.kappa, ratio));

  const bool verify = p.checked && n <= p.dense_ceiling;
  const CsrMatrix LG = verify ? Laplacian::from_graph(g).matrix() : CsrMatrix{};
  constexpr double kTol = 1e-9;

  for (std::size_t attempt = 0; attempt < std::max<std::size_t>(1, p.max_attempts); ++attempt) {
    const std::uint64_t seed = attempt == 0 ? p.seed : derive_seed(p.seed, 0xa77e0000ULL + attempt);
    const auto counts = sample_proportional(off, a.q, seed);
    std::map<std::size_t, double> sampled;
    for (std::size_t k = 0; k < counts.size(); ++k)
      if (counts[k] > 0) {
        const double prob = off[k] / S;
        sampled[k] = static_cast<double>(counts[k]) * g.edge(k).w / (static_cast<double>(a.q) * prob);
      }
    WeightedMultigraph h = detail::assemble(g, in_sub, a.scale, sampled);
    a.attempts = attempt + 1;
    if (!verify) {
      out.graph = std::move(h);
      return out;
    }
    const auto bounds = oracle::pencil_bounds(Laplacian::from_graph(h).matrix(), LG);
    if (bounds.lambda_min >= 1.0 - kTol && bounds.lambda_max <= p.kappa * (1.0 + kTol)) {
      a.lambda_min = bounds.lambda_min;
      a.lambda_max = bounds.lambda_max;
      a.verified = true;
      a.first_attempt_pass = attempt == 0;
      out.graph = std::move(h);
      return out;
    }
    if (bounds.lambda_min > 0.0 && bounds.lambda_max / bounds.lambda_min <= p.kappa * (1.0 + kTol)) {
      // Divide H by its smallest eigenvalue against G.
      const double f = 1.0 / bounds.lambda_min;
      std::vector<Edge> edges(h.edges().begin(), h.edges().end());
      for (auto& e : edges) e.w *= f;
      out.graph = WeightedMultigraph(n, std::move(edges));
      a.lambda_min = bounds.lambda_min * f;
      a.lambda_max = bounds.lambda_max * f;
      a.verified = true;
      a.rescaled = true;
      return out;
    }
  }
  // Keep every off-subgraph edge: G <= H <= max(1, kappa / 2) G exactly.
  std::map<std::size_t, double> all;
  for (std::size_t k = 0; k < g.num_edges(); ++k)
    if (!in_sub[k]) all[k] = g.edge(k).w;
  out.graph = detail::assemble(g, in_sub, std::max(1.0, 0.5 * p.kappa), all);
  const auto bounds = oracle::pencil_bounds(Laplacian::from_graph(out.graph).matrix(), LG);
  a.lambda_min = bounds.lambda_min;
  a.lambda_max = bounds.lambda_max;
  a.verified = true;
  a.fallback = true;
  return out;
}

inline Sparsifier incremental_sparsify(const WeightedMultigraph& g, const StretchSubgraph& sub,
                                       const SparsifyParams& p) {
  const auto ids = sub.all_eids();
  return incremental_sparsify(g, ids, p);
}

}  // namespace laplax
