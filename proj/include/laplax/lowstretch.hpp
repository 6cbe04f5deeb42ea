#pragma once

// Low-stretch spanning trees and ultra-sparse low-stretch subgraphs built by
// repeated partition-and-contract over geometric weight classes.
//
// Weights are lengths here. Every routine first divides by the smallest
// weight so classes start at 1; the factor is kept in weight_scale.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "decompose.hpp"
#include "error.hpp"
#include "graph.hpp"
#include "parallel.hpp"
#include "random.hpp"
#include "stretch.hpp"

namespace laplax {

enum class ParamMode { Practical, Theory };

struct IterationSnapshot {
  int iteration = 0;
  std::vector<Vertex> supernode;           // original vertex -> representative after contraction
  std::map<Vertex, Vertex> center;         // representative -> original vertex at its center
  std::vector<EdgeId> tree_eids;           // tree edges chosen so far
  std::map<int, std::size_t> class_sizes;  // surviving edges per class at the start of the iteration
  const Decomposition* decomposition = nullptr;
  bool audit_vacuous = true;               // every class bound was vacuous this iteration
};

struct AkpwParams {
  ParamMode mode = ParamMode::Practical;
  double z = 32.0;
  std::size_t tau = 3;
  std::size_t lambda = 2;
  std::optional<double> beta;   // default 2 log^3 n
  std::optional<double> theta;  // default (log^3 n / beta)^lambda
  double y = 0.0;               // informational unless set by a theory factory
  double c1 = 272.0;
  PartitionOptions partition{};
  std::size_t max_extra_iterations = 100000;
  std::function<void(const IterationSnapshot&)> observer;

  // Parameters of the tree construction for n vertices.
  static AkpwParams theory_tree(std::size_t n, double c1 = 272.0) {
    AkpwParams p;
    p.mode = ParamMode::Theory;
    p.c1 = c1;
    p.partition.c1 = c1;
    const double logn = std::max(1.0, std::log2(static_cast<double>(std::max<std::size_t>(n, 2))));
    const double loglogn = std::max(1.0, std::log2(logn));
    p.y = std::pow(2.0, std::sqrt(6.0 * logn * loglogn));
    p.tau = static_cast<std::size_t>(std::ceil(3.0 * logn / std::log2(p.y)));
    p.z = 4.0 * c1 * p.y * static_cast<double>(p.tau) * logn * logn * logn;
    return p;
  }

  static double theory_c2(std::size_t lambda, double c1 = 272.0) {
    return 2.0 * std::pow(4.0 * c1 * static_cast<double>(lambda + 1), 0.5 * (static_cast<double>(lambda) - 1.0));
  }

  // Parameters of the subgraph construction; beta must be at least c2 log^3 n.
  static AkpwParams theory_subgraph(std::size_t n, std::size_t lambda, double beta, double c1 = 272.0) {
    require(lambda >= 1, "lambda must be positive");
    AkpwParams p;
    p.mode = ParamMode::Theory;
    p.c1 = c1;
    p.partition.c1 = c1;
    p.lambda = lambda;
    const double logn = std::max(1.0, std::log2(static_cast<double>(std::max<std::size_t>(n, 2))));
    const double log3 = logn * logn * logn;
    const double c2 = theory_c2(lambda, c1);
    require(beta >= c2 * log3, "beta must be at least c2 log^3 n in theory mode");
    p.beta = beta;
    p.y = beta / (c2 * log3);
    p.z = 4.0 * c1 * p.y * static_cast<double>(lambda + 1) * log3;
    p.tau = static_cast<std::size_t>(std::ceil(3.0 * logn / std::max(1e-12, std::log2(p.y))));
    p.theta = std::pow(log3 / beta, static_cast<double>(lambda));
    return p;
  }
};

enum class EdgeOrigin : std::uint8_t { Unset, ContractedAt, CarriedOver, RemovedThenRestored };

struct Provenance {
  EdgeOrigin origin = EdgeOrigin::Unset;
  int iteration = 0;  // for ContractedAt
  friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct SegmentRecord {
  int first_class = 1;
  int end_class = std::numeric_limits<int>::max();  // exclusive
  std::vector<EdgeId> tree_eids;
  std::vector<EdgeId> extra_eids;
  friend bool operator==(const SegmentRecord&, const SegmentRecord&) = default;
};

struct StretchStats {
  std::size_t total_edges = 0;
  std::optional<double> total_stretch;                          // filled by audit_stretch
  std::map<int, double> per_class_stretch;                      // filled by audit_stretch
  std::vector<std::pair<int, std::map<int, std::size_t>>> class_sizes;  // per executed iteration
  std::vector<std::string> deviations;
  std::size_t iterations = 0;
  std::size_t rounds = 0;   // split rounds plus growth steps, summed
  std::size_t retries = 0;  // partition restarts, summed
  double spread = 1.0;      // max weight / min weight
  std::vector<SegmentRecord> segments;
  std::vector<int> special_classes;
  double z = 0.0;
};

struct StretchSubgraph {
  std::size_t n = 0;
  std::vector<EdgeId> tree_eids;
  std::vector<EdgeId> extra_eids;
  std::vector<EdgeId> removed_eids;  // set aside by well-spacing and not used in the tree
  std::map<EdgeId, Provenance> provenance;
  StretchStats stats;
  double weight_scale = 1.0;

  std::vector<EdgeId> all_eids() const {
    std::vector<EdgeId> out = tree_eids;
    out.insert(out.end(), extra_eids.begin(), extra_eids.end());
    out.insert(out.end(), removed_eids.begin(), removed_eids.end());
    std::sort(out.begin(), out.end());
    return out;
  }
  std::size_t edge_count() const { return tree_eids.size() + extra_eids.size() + removed_eids.size(); }
};

// The subgraph as a graph with the input's weights.
inline WeightedMultigraph materialize(const WeightedMultigraph& g, const StretchSubgraph& s) {
  const auto ids = s.all_eids();
  return g.edge_subgraph(ids);
}

namespace detail {

struct Normalized {
  WeightedMultigraph graph;
  double scale = 1.0;
  double spread = 1.0;
};

inline Normalized normalize(const WeightedMultigraph& g) {
  Normalized out;
  if (g.num_edges() == 0) {
    out.graph = g;
    return out;
  }
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (const auto& e : g.edges()) {
    lo = std::min(lo, e.w);
    hi = std::max(hi, e.w);
  }
  std::vector<Edge> edges(g.edges().begin(), g.edges().end());
  for (auto& e : edges) e.w = std::max(1.0, e.w / lo);
  out.graph = WeightedMultigraph(g.num_vertices(), std::move(edges));
  out.scale = lo;
  out.spread = hi / lo;
  return out;
}

enum class EngineMode { Tree, Sparse };

struct EngineConfig {
  EngineMode mode = EngineMode::Tree;
  double z = 32.0;
  std::size_t rho = 8;
  std::size_t tau = 3;
  std::size_t lambda = 2;
  double c1 = 272.0;
  PartitionOptions partition{};
  std::uint64_t seed = 0;
  std::size_t max_extra_iterations = 100000;
  const std::function<void(const IterationSnapshot&)>* observer = nullptr;
};

struct EngineResult {
  std::vector<EdgeId> tree_eids;
  std::vector<EdgeId> extra_eids;
  std::map<EdgeId, Provenance> provenance;
  std::vector<std::pair<int, std::map<int, std::size_t>>> class_sizes;
  std::vector<std::string> deviations;
  std::size_t iterations = 0;
  std::size_t rounds = 0;
  std::size_t retries = 0;
};

// Iterated partition-and-contract over the edges `scope` (indices into g)
// starting at class index `start`, with supernodes given by `initial`
// (representative per original vertex; identity when empty).
inline EngineResult run_engine(const WeightedMultigraph& g, std::span<const int> class_of,
                               std::span<const std::size_t> scope, int start, std::span<const Vertex> initial,
                               const EngineConfig& cfg) {
  const std::size_t n = g.num_vertices();
  EngineResult out;
  DisjointSets dsu(n);
  if (!initial.empty())
    for (Vertex v = 0; v < n; ++v) dsu.unite(v, initial[v]);
  std::vector<Vertex> center_of(n);
  std::iota(center_of.begin(), center_of.end(), Vertex{0});

  std::vector<std::size_t> alive;
  for (std::size_t k : scope) {
    const Edge& e = g.edge(k);
    if (dsu.find(e.u) == dsu.find(e.v))
      out.provenance[e.id] = {EdgeOrigin::ContractedAt, start - 1};
    else
      alive.push_back(k);
  }
  std::set<EdgeId> carried;
  bool aged_deviation = false;
  int j = start;
  std::size_t executed = 0;
  const int max_class = alive.empty() ? start : *std::max_element(class_of.begin(), class_of.end());

  while (!alive.empty()) {
    int min_class = std::numeric_limits<int>::max();
    for (std::size_t k : alive) min_class = std::min(min_class, class_of[k]);
    if (min_class > j) j = min_class;
    if (j > max_class + static_cast<int>(cfg.max_extra_iterations))
      throw AlgorithmError("low-stretch construction made no progress after " + std::to_string(executed) + " iterations");

    std::map<int, std::size_t> sizes;
    for (std::size_t k : alive) ++sizes[class_of[k]];
    out.class_sizes.push_back({j, sizes});

    if (cfg.mode == EngineMode::Sparse)
      for (std::size_t k : alive)
        if (class_of[k] <= j - static_cast<int>(cfg.lambda)) carried.insert(g.edge(k).id);

    // Quotient graph on all current supernodes with the active edges.
    std::vector<Vertex> rep(n);
    std::vector<Vertex> qid(n, kNoVertex);
    std::vector<Vertex> q_to_rep;
    for (Vertex v = 0; v < n; ++v) {
      rep[v] = dsu.find(v);
      if (qid[rep[v]] == kNoVertex) {
        qid[rep[v]] = static_cast<Vertex>(q_to_rep.size());
        q_to_rep.push_back(rep[v]);
      }
    }
    const int window = static_cast<int>(cfg.mode == EngineMode::Sparse ? cfg.lambda : cfg.tau);
    std::vector<Edge> qedges;
    EdgeClassedGraph cg;
    cg.z = cfg.z;
    bool aged_now = false;
    for (std::size_t k : alive) {
      if (class_of[k] > j) continue;
      const Edge& e = g.edge(k);
      qedges.push_back({qid[rep[e.u]], qid[rep[e.v]], e.w, e.id});
      if (class_of[k] <= j - window) {
        cg.generic.push_back(e.id);
        aged_now = true;
      } else {
        cg.classes[class_of[k]].push_back(e.id);
      }
    }
    if (cfg.mode == EngineMode::Tree && aged_now && !aged_deviation) {
      aged_deviation = true;
      out.deviations.push_back("classes older than tau survived and were pooled into the generic bucket (first at iteration " +
                               std::to_string(j) + ")");
    }
    std::sort(cg.generic.begin(), cg.generic.end());
    const std::size_t qn = q_to_rep.size();
    cg.base = WeightedMultigraph(qn, std::move(qedges));

    SplitParams sp;
    sp.rho = std::min<std::size_t>(cfg.rho, std::max<std::size_t>(1, qn));
    sp.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(j));
    sp.c1 = cfg.c1;
    const Decomposition dec = partition(cg, sp, cfg.partition);
    out.rounds += dec.rounds + dec.bfs_levels;
    out.retries += dec.retries;

    // BFS tree of each component from its center, inside the component.
    const WeightedMultigraph& qg = cg.base;
    std::vector<char> seen(qn, 0);
    std::vector<EdgeId> new_tree;
    for (std::size_t c = 0; c < dec.centers.size(); ++c) {
      const Vertex root = dec.centers[c];
      std::vector<Vertex> frontier{root};
      seen[root] = 1;
      while (!frontier.empty()) {
        std::map<Vertex, std::pair<Vertex, std::size_t>> best;  // child -> (parent, edge index)
        for (Vertex x : frontier) {
          for (const auto& inc : qg.incident(x)) {
            const Vertex y = inc.neighbor;
            if (seen[y] || dec.assignment[y] != c) continue;
            auto it = best.find(y);
            if (it == best.end()) {
              best.emplace(y, std::make_pair(x, static_cast<std::size_t>(inc.edge)));
            } else if (it->second.first == x) {
              const Edge& cur = qg.edge(it->second.second);
              const Edge& cand = qg.edge(inc.edge);
              if (std::tie(cand.w, cand.id) < std::tie(cur.w, cur.id)) it->second.second = inc.edge;
            }
          }
        }
        frontier.clear();
        for (const auto& [y, pe] : best) {
          seen[y] = 1;
          frontier.push_back(y);
          new_tree.push_back(qg.edge(pe.second).id);
        }
      }
    }
    for (Vertex v = 0; v < qn; ++v)
      if (!seen[v]) throw AlgorithmError("component not spanned by its BFS tree");

    // Contract along the new tree edges; the center's own center survives.
    std::vector<Vertex> comp_center(dec.centers.size());
    for (std::size_t c = 0; c < dec.centers.size(); ++c) comp_center[c] = center_of[q_to_rep[dec.centers[c]]];
    for (EdgeId id : new_tree) {
      const Edge& e = g.edge_by_id(id);
      dsu.unite(e.u, e.v);
    }
    for (std::size_t q = 0; q < qn; ++q) center_of[dsu.find(q_to_rep[q])] = comp_center[dec.assignment[q]];
    out.tree_eids.insert(out.tree_eids.end(), new_tree.begin(), new_tree.end());

    std::vector<std::size_t> still;
    for (std::size_t k : alive) {
      const Edge& e = g.edge(k);
      if (dsu.find(e.u) == dsu.find(e.v))
        out.provenance[e.id] = {EdgeOrigin::ContractedAt, j};
      else
        still.push_back(k);
    }
    alive = std::move(still);
    ++executed;

    if (cfg.observer && *cfg.observer) {
      IterationSnapshot snap;
      snap.iteration = j;
      snap.supernode.resize(n);
      for (Vertex v = 0; v < n; ++v) snap.supernode[v] = dsu.find(v);
      for (Vertex v = 0; v < n; ++v)
        if (snap.supernode[v] == v) snap.center[v] = center_of[v];
      snap.tree_eids = out.tree_eids;
      snap.class_sizes = sizes;
      snap.decomposition = &dec;
      for (const auto& [cls, allowed] : dec.per_class_allowed) {
        const std::size_t size = cls == 0 ? cg.generic.size() : cg.classes.at(cls).size();
        if (allowed < size) snap.audit_vacuous = false;
      }
      (*cfg.observer)(snap);
    }
    ++j;
  }
  out.iterations = executed;
  std::sort(out.tree_eids.begin(), out.tree_eids.end());
  const std::set<EdgeId> tree(out.tree_eids.begin(), out.tree_eids.end());
  for (EdgeId id : carried)
    if (!tree.count(id)) {
      out.extra_eids.push_back(id);
      out.provenance[id] = {EdgeOrigin::CarriedOver, 0};
    }
  return out;
}

inline std::vector<int> classes_of(const WeightedMultigraph& g, double z) {
  std::vector<int> cls(g.num_edges());
  for (std::size_t k = 0; k < g.num_edges(); ++k) cls[k] = weight_class_index(g.edge(k).w, z);
  return cls;
}

inline std::size_t rho_for(double z, std::size_t n) {
  const double r = std::floor(z / 4.0);
  if (!(r >= 1.0)) return 1;
  if (r >= static_cast<double>(std::max<std::size_t>(n, 1))) return std::max<std::size_t>(n, 1);
  return static_cast<std::size_t>(r);
}

inline void validate(const AkpwParams& p) {
  require(p.z > 8.0 && std::isfinite(p.z), "z must exceed 8");
  require(p.tau >= 1, "tau must be at least 1");
  require(p.lambda >= 1, "lambda must be at least 1");
  if (p.theta) require(*p.theta > 0.0 && *p.theta <= 1.0, "theta must lie in (0, 1]");
}

inline StretchSubgraph finish(const Normalized& norm, EngineResult&& r, double z) {
  StretchSubgraph s;
  s.n = norm.graph.num_vertices();
  s.tree_eids = std::move(r.tree_eids);
  s.extra_eids = std::move(r.extra_eids);
  s.provenance = std::move(r.provenance);
  s.stats.class_sizes = std::move(r.class_sizes);
  s.stats.deviations = std::move(r.deviations);
  s.stats.iterations = r.iterations;
  s.stats.rounds = r.rounds;
  s.stats.retries = r.retries;
  s.stats.spread = norm.spread;
  s.stats.z = z;
  s.weight_scale = norm.scale;
  s.stats.total_edges = s.edge_count();
  return s;
}

inline EngineConfig engine_config(const AkpwParams& p, EngineMode mode, std::size_t n, std::uint64_t seed) {
  EngineConfig cfg;
  cfg.mode = mode;
  cfg.z = p.z;
  cfg.rho = rho_for(p.z, n);
  cfg.tau = p.tau;
  cfg.lambda = p.lambda;
  cfg.c1 = p.c1;
  cfg.partition = p.partition;
  cfg.partition.c1 = p.c1;
  cfg.seed = seed;
  cfg.max_extra_iterations = p.max_extra_iterations;
  cfg.observer = &p.observer;
  return cfg;
}

}  // namespace detail

// Spanning forest by partition-and-contract over weight classes.
inline StretchSubgraph akpw(const WeightedMultigraph& g, const AkpwParams& p, std::uint64_t seed) {
  detail::validate(p);
  const auto norm = detail::normalize(g);
  const auto cls = detail::classes_of(norm.graph, p.z);
  std::vector<std::size_t> scope(norm.graph.num_edges());
  std::iota(scope.begin(), scope.end(), std::size_t{0});
  const int start = cls.empty() ? 1 : *std::min_element(cls.begin(), cls.end());
  auto r = detail::run_engine(norm.graph, cls, scope, start, {},
                              detail::engine_config(p, detail::EngineMode::Tree, g.num_vertices(), seed));
  return detail::finish(norm, std::move(r), p.z);
}

// As akpw, but edges of class i still uncontracted at iteration i + lambda are
// kept as extra edges, and partition sees at most lambda + 1 classes.
inline StretchSubgraph sparse_akpw(const WeightedMultigraph& g, const AkpwParams& p, std::uint64_t seed) {
  detail::validate(p);
  const auto norm = detail::normalize(g);
  const auto cls = detail::classes_of(norm.graph, p.z);
  std::vector<std::size_t> scope(norm.graph.num_edges());
  std::iota(scope.begin(), scope.end(), std::size_t{0});
  const int start = cls.empty() ? 1 : *std::min_element(cls.begin(), cls.end());
  auto r = detail::run_engine(norm.graph, cls, scope, start, {},
                              detail::engine_config(p, detail::EngineMode::Sparse, g.num_vertices(), seed));
  return detail::finish(norm, std::move(r), p.z);
}

// ---------------------------------------------------------------------------
// Well-spacing.

struct WellSpaced {
  WeightedMultigraph graph;        // G' (same vertex set and weights as the input)
  std::vector<EdgeId> removed;     // F
  std::vector<int> special;        // ascending
  std::vector<std::pair<int, int>> windows;  // removed class ranges [first, last]
  std::size_t block = 0;
};

// Classes 1..max are cut into blocks of tau * ceil(1/theta) classes. In each
// block the leftmost run of tau consecutive classes with the fewest edges is
// removed; with ceil(1/theta) disjoint runs available its count is at most
// theta times the block's. The first nonempty class above a removed run is
// special. Weights must already be at least 1.
inline WellSpaced well_space(const WeightedMultigraph& g, double z, std::size_t tau, double theta) {
  require(tau >= 1, "tau must be at least 1");
  require(theta > 0.0 && theta <= 1.0, "theta must lie in (0, 1]");
  const auto cls = detail::classes_of(g, z);
  const int max_class = cls.empty() ? 0 : *std::max_element(cls.begin(), cls.end());
  std::vector<std::size_t> count(static_cast<std::size_t>(max_class) + 2, 0);
  for (int c : cls) ++count[static_cast<std::size_t>(c)];
  auto at = [&](long c) -> std::size_t {
    return c >= 1 && c <= max_class ? count[static_cast<std::size_t>(c)] : 0;
  };

  WellSpaced out;
  const auto per = static_cast<std::size_t>(std::ceil(1.0 / theta - 1e-12));
  out.block = tau * std::max<std::size_t>(1, per);
  std::vector<char> drop(static_cast<std::size_t>(max_class) + 2, 0);
  const long T = static_cast<long>(tau), B = static_cast<long>(out.block);
  for (long first = 1; first <= max_class; first += B) {
    long best_start = first;
    std::size_t best = std::numeric_limits<std::size_t>::max();
    for (long s = first; s + T - 1 <= first + B - 1; ++s) {
      std::size_t sum = 0;
      for (long c = s; c < s + T; ++c) sum += at(c);
      if (sum < best) {
        best = sum;
        best_start = s;
      }
    }
    out.windows.push_back({static_cast<int>(best_start), static_cast<int>(best_start + T - 1)});
    for (long c = best_start; c < best_start + T; ++c)
      if (c >= 1 && c <= max_class) drop[static_cast<std::size_t>(c)] = 1;
  }
  std::vector<Edge> kept;
  for (std::size_t k = 0; k < g.num_edges(); ++k) {
    if (drop[static_cast<std::size_t>(cls[k])])
      out.removed.push_back(g.edge(k).id);
    else
      kept.push_back(g.edge(k));
  }
  std::set<int> special;
  for (const auto& [lo, hi] : out.windows) {
    for (long c = hi + 1; c <= max_class; ++c)
      if (!drop[static_cast<std::size_t>(c)] && count[static_cast<std::size_t>(c)] > 0) {
        special.insert(static_cast<int>(c));
        break;
      }
  }
  out.special.assign(special.begin(), special.end());
  out.graph = WeightedMultigraph(g.num_vertices(), std::move(kept));
  return out;
}

// Minimum spanning forest by Boruvka rounds, ties broken by (weight, id).
inline std::vector<EdgeId> minimum_spanning_forest(const WeightedMultigraph& g) {
  const std::size_t n = g.num_vertices();
  DisjointSets dsu(n);
  std::vector<EdgeId> forest;
  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  auto lighter = [&](std::size_t a, std::size_t b) {
    if (b == kNone) return true;
    const Edge& x = g.edge(a);
    const Edge& y = g.edge(b);
    return std::tie(x.w, x.id) < std::tie(y.w, y.id);
  };
  while (true) {
    std::vector<std::size_t> cheapest(n, kNone);
    for (std::size_t k = 0; k < g.num_edges(); ++k) {
      const Edge& e = g.edge(k);
      const Vertex a = dsu.find(e.u), b = dsu.find(e.v);
      if (a == b) continue;
      if (lighter(k, cheapest[a])) cheapest[a] = k;
      if (lighter(k, cheapest[b])) cheapest[b] = k;
    }
    bool merged = false;
    for (Vertex v = 0; v < n; ++v) {
      if (cheapest[v] == kNone) continue;
      const Edge& e = g.edge(cheapest[v]);
      if (dsu.unite(e.u, e.v)) {
        forest.push_back(e.id);
        merged = true;
      }
    }
    if (!merged) break;
  }
  std::sort(forest.begin(), forest.end());
  return forest;
}

struct LsOptions {
  bool practical = true;  // accept any beta > log^3 n; otherwise require beta >= c2 log^3 n
};

inline double resolved_beta(const AkpwParams& p, std::size_t n) {
  const double logn = static_cast<double>(log2_ceil(std::max<std::size_t>(n, 2)));
  return p.beta.value_or(2.0 * logn * logn * logn);
}

inline double resolved_theta(const AkpwParams& p, std::size_t n) {
  if (p.theta) return *p.theta;
  const double logn = static_cast<double>(log2_ceil(std::max<std::size_t>(n, 2)));
  return std::min(1.0, std::pow(logn * logn * logn / resolved_beta(p, n), static_cast<double>(p.lambda)));
}

// One well-spaced segment: sparse construction on the edges of g (already
// normalized and well-spaced) with classes in [first_class, end_class),
// starting from the supernodes formed by the forest edges of class at most
// first_class - tau.
inline SegmentRecord ls_segment(const WeightedMultigraph& g, std::span<const EdgeId> forest, int first_class,
                                int end_class, const AkpwParams& p, std::uint64_t seed,
                                std::map<EdgeId, Provenance>* provenance = nullptr,
                                detail::EngineResult* raw = nullptr) {
  const auto cls = detail::classes_of(g, p.z);
  DisjointSets dsu(g.num_vertices());
  for (EdgeId id : forest) {
    const Edge& e = g.edge_by_id(id);
    if (weight_class_index(e.w, p.z) <= first_class - static_cast<int>(p.tau)) dsu.unite(e.u, e.v);
  }
  std::vector<Vertex> initial(g.num_vertices());
  for (Vertex v = 0; v < g.num_vertices(); ++v) initial[v] = dsu.find(v);
  std::vector<std::size_t> scope;
  for (std::size_t k = 0; k < g.num_edges(); ++k)
    if (cls[k] >= first_class && cls[k] < end_class) scope.push_back(k);
  auto r = detail::run_engine(g, cls, scope, first_class, initial,
                              detail::engine_config(p, detail::EngineMode::Sparse, g.num_vertices(), seed));
  SegmentRecord rec{first_class, end_class, r.tree_eids, r.extra_eids};
  if (provenance) *provenance = r.provenance;
  if (raw) *raw = std::move(r);
  return rec;
}

// Ultra-sparse low-stretch subgraph: well-space, run the sparse construction
// independently on each segment between special classes, then add back the
// set-aside edges. Set-aside edges that join separate trees become tree edges.
inline StretchSubgraph ls_subgraph(const WeightedMultigraph& g, const AkpwParams& p, std::uint64_t seed,
                                   const LsOptions& opt = {}) {
  detail::validate(p);
  const std::size_t n = g.num_vertices();
  const double logn = static_cast<double>(log2_ceil(std::max<std::size_t>(n, 2)));
  const double log3 = logn * logn * logn;
  const double beta = resolved_beta(p, n);
  if (opt.practical || p.mode == ParamMode::Practical)
    require(beta > log3 || p.theta.has_value(), "beta must exceed log^3 n");
  else
    require(beta >= AkpwParams::theory_c2(p.lambda, p.c1) * log3, "beta must be at least c2 log^3 n");
  const double theta = resolved_theta(p, n);

  const auto norm = detail::normalize(g);
  WellSpaced ws = well_space(norm.graph, p.z, p.tau, theta);
  const auto forest = minimum_spanning_forest(ws.graph);
  const auto cls = detail::classes_of(ws.graph, p.z);

  std::vector<int> starts;
  const int lowest = cls.empty() ? 1 : *std::min_element(cls.begin(), cls.end());
  starts.push_back(lowest);
  for (int s : ws.special)
    if (s > lowest) starts.push_back(s);

  const std::size_t segs = starts.size();
  std::vector<SegmentRecord> records(segs);
  std::vector<detail::EngineResult> raws(segs);
  parallel_for(
      0, segs,
      [&](std::size_t k) {
        const int end = k + 1 < segs ? starts[k + 1] : std::numeric_limits<int>::max();
        records[k] = ls_segment(ws.graph, forest, starts[k], end, p, seed, nullptr, &raws[k]);
      },
      1);

  StretchSubgraph out;
  out.n = n;
  for (std::size_t k = 0; k < segs; ++k) {
    auto& r = raws[k];
    out.tree_eids.insert(out.tree_eids.end(), r.tree_eids.begin(), r.tree_eids.end());
    out.extra_eids.insert(out.extra_eids.end(), r.extra_eids.begin(), r.extra_eids.end());
    for (const auto& [id, pv] : r.provenance) out.provenance[id] = pv;
    for (auto& cs : r.class_sizes) out.stats.class_sizes.push_back(std::move(cs));
    for (auto& d : r.deviations) out.stats.deviations.push_back(std::move(d));
    out.stats.iterations += r.iterations;
    out.stats.rounds += r.rounds;
    out.stats.retries += r.retries;
  }

  // Complete the forest with set-aside edges where the trees leave gaps.
  DisjointSets dsu(n);
  for (EdgeId id : out.tree_eids) {
    const Edge& e = norm.graph.edge_by_id(id);
    dsu.unite(e.u, e.v);
  }
  std::vector<EdgeId> removed = ws.removed;
  std::sort(removed.begin(), removed.end(), [&](EdgeId a, EdgeId b) {
    const Edge& x = norm.graph.edge_by_id(a);
    const Edge& y = norm.graph.edge_by_id(b);
    return std::tie(x.w, x.id) < std::tie(y.w, y.id);
  });
  for (EdgeId id : removed) {
    const Edge& e = norm.graph.edge_by_id(id);
    if (dsu.unite(e.u, e.v))
      out.tree_eids.push_back(id);
    else
      out.removed_eids.push_back(id);
    out.provenance[id] = {EdgeOrigin::RemovedThenRestored, 0};
  }
  std::sort(out.tree_eids.begin(), out.tree_eids.end());
  std::sort(out.extra_eids.begin(), out.extra_eids.end());
  std::sort(out.removed_eids.begin(), out.removed_eids.end());

  out.stats.segments = std::move(records);
  out.stats.special_classes = ws.special;
  out.stats.spread = norm.spread;
  out.stats.z = p.z;
  out.stats.total_edges = out.edge_count();
  out.weight_scale = norm.scale;
  return out;
}

// Exact stretch of every input edge over the subgraph; fills stats.
inline StretchReport audit_stretch(const WeightedMultigraph& g, StretchSubgraph& s) {
  const WeightedMultigraph h = materialize(g, s);
  StretchReport rep = total_stretch(g, h);
  s.stats.total_stretch = rep.total;
  s.stats.per_class_stretch.clear();
  const auto norm = detail::normalize(g);
  const double z = s.stats.z > 1.0 ? s.stats.z : 32.0;
  for (std::size_t k = 0; k < g.num_edges(); ++k)
    s.stats.per_class_stretch[weight_class_index(norm.graph.edge(k).w, z)] += rep.per_edge[k];
  return rep;
}

// Structural checks: tree edges form a spanning forest of each component,
// the three edge sets are disjoint, and every eid belongs to g.
inline std::optional<std::string> check_structure(const WeightedMultigraph& g, const StretchSubgraph& s) {
  std::set<EdgeId> seen;
  for (auto* list : {&s.tree_eids, &s.extra_eids, &s.removed_eids})
    for (EdgeId id : *list) {
      if (!g.index_of(id)) return "edge " + std::to_string(id) + " is not in the input";
      if (!seen.insert(id).second) return "edge " + std::to_string(id) + " listed twice";
    }
  DisjointSets dsu(g.num_vertices());
  for (EdgeId id : s.tree_eids) {
    const Edge& e = g.edge_by_id(id);
    if (!dsu.unite(e.u, e.v)) return "tree edges contain a cycle through edge " + std::to_string(id);
  }
  std::size_t comps = 0;
  components(g, &comps);
  if (s.tree_eids.size() + comps != g.num_vertices()) return "tree edges do not span every component";
  return std::nullopt;
}

}  // namespace laplax
