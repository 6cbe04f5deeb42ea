#pragma once

// Low-diameter decomposition by jittered multi-source ball growing.
//
// split_graph runs T rounds. Round t samples centers from the surviving
// vertices, gives each an integer start delay in [0, R], and grows all balls
// together out to cost r_t = (T - t + 1) R; a vertex joins the center with the
// smallest hop distance plus delay (smaller center id on ties). Covered
// vertices are removed before the next round. Components come out with hop
// radius at most T R <= rho measured inside the component.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"
#include "graph.hpp"
#include "parallel.hpp"
#include "random.hpp"

namespace laplax {

struct SplitParams {
  std::size_t rho = 1;
  std::uint64_t seed = 0;
  double c1 = 272.0;
  std::optional<std::size_t> T;   // default 2 ceil(log2 n)
  std::optional<std::size_t> R;   // default max(1, floor(rho / (2 ceil(log2 n))))
  double center_constant = 12.0;
  bool track_overlap = false;     // count balls covering each vertex (costly)
};

struct Schedule {
  std::size_t T = 1;
  std::size_t R = 1;
};

// T is capped at floor(rho / R) so that the largest ball, T R, stays within rho.
inline Schedule resolve_schedule(std::size_t n, const SplitParams& p) {
  require(p.rho >= 1, "rho must be at least 1");
  const std::size_t logn = log2_ceil(n);
  Schedule s;
  s.R = p.R.value_or(std::max<std::size_t>(1, p.rho / (2 * logn)));
  require(s.R >= 1, "R must be at least 1");
  require(s.R <= p.rho, "R must not exceed rho");
  const std::size_t fit = p.rho / s.R;
  if (p.T) {
    require(*p.T >= 1, "T must be at least 1");
    require(*p.T <= fit, "T * R must not exceed rho");
    s.T = *p.T;
  } else {
    s.T = std::min(2 * logn, fit);
  }
  return s;
}

// Number of centers sampled in round t (1-based) out of T.
inline std::size_t center_count(std::size_t n, std::size_t alive, std::size_t t, std::size_t T, double constant) {
  if (alive == 0) return 0;
  const double nn = static_cast<double>(std::max<std::size_t>(n, 1));
  const double raw = constant * std::pow(nn, static_cast<double>(t) / static_cast<double>(T) - 1.0) *
                     static_cast<double>(alive) * std::log(nn);
  const double c = std::ceil(raw);
  if (!(c >= 1.0)) return 1;
  if (c >= static_cast<double>(alive)) return alive;
  return static_cast<std::size_t>(c);
}

struct Decomposition {
  std::vector<Vertex> assignment;               // vertex -> component
  std::vector<Vertex> centers;                  // component -> center vertex
  std::map<int, std::size_t> per_class_cut;     // class index -> cut edges (0 = generic bucket)
  std::map<int, std::size_t> per_class_allowed; // filled by partition
  std::size_t rounds = 0;                       // rounds of the outer loop executed
  std::size_t bfs_levels = 0;                   // synchronous growth steps, summed over rounds
  std::size_t retries = 0;
  std::size_t max_ball_overlap = 0;             // only with track_overlap

  std::size_t num_components() const { return centers.size(); }
  friend bool operator==(const Decomposition&, const Decomposition&) = default;
};

class PartitionError : public AlgorithmError {
public:
  PartitionError(std::string message, std::map<int, std::size_t> cut, std::map<int, std::size_t> allowed)
      : AlgorithmError(std::move(message)), cut(std::move(cut)), allowed(std::move(allowed)) {}
  std::map<int, std::size_t> cut;
  std::map<int, std::size_t> allowed;
};

struct CenterStart {
  Vertex center;
  std::size_t delay;
};

struct JitteredResult {
  std::vector<Vertex> owner;  // kNoVertex when not reached within the cap
  std::size_t steps = 0;
};

// Multi-source growth where center s enters at time delay(s); a vertex takes
// the first arrival, smaller center id on ties. Only vertices with alive[v]
// participate (all when `alive` is empty). A vertex is reached iff its best
// hop distance plus delay is at most `cap`.
inline JitteredResult jittered_assignment(const WeightedMultigraph& g, std::span<const CenterStart> starts,
                                          std::size_t cap, std::span<const char> alive = {}) {
  const std::size_t n = g.num_vertices();
  JitteredResult out;
  out.owner.assign(n, kNoVertex);
  std::vector<Vertex> candidate(n, kNoVertex);
  std::vector<char> touched(n, 0);
  auto is_alive = [&](Vertex v) { return alive.empty() || alive[v]; };

  std::map<std::size_t, std::vector<Vertex>> by_delay;
  for (const auto& s : starts) {
    require(s.center < n, "center out of range");
    if (s.delay <= cap && is_alive(s.center)) by_delay[s.delay].push_back(s.center);
  }

  std::vector<Vertex> frontier;
  std::mutex merge_mutex;
  for (std::size_t time = 0; time <= cap; ++time) {
    auto pending = by_delay.lower_bound(time);
    if (frontier.empty() && pending == by_delay.end()) break;
    std::vector<Vertex> next;
    auto offer = [&](Vertex y, Vertex label, std::vector<Vertex>& local) {
      std::atomic_ref<Vertex> slot(candidate[y]);
      Vertex current = slot.load(std::memory_order_relaxed);
      while (label < current && !slot.compare_exchange_weak(current, label, std::memory_order_relaxed)) {
      }
      std::atomic_ref<char> mark(touched[y]);
      if (mark.exchange(1, std::memory_order_relaxed) == 0) local.push_back(y);
    };
    parallel_chunks(
        0, frontier.size(),
        [&](std::size_t lo, std::size_t hi) {
          std::vector<Vertex> local;
          for (std::size_t k = lo; k < hi; ++k) {
            const Vertex x = frontier[k];
            for (const auto& inc : g.incident(x)) {
              const Vertex y = inc.neighbor;
              if (out.owner[y] != kNoVertex || !is_alive(y)) continue;
              offer(y, out.owner[x], local);
            }
          }
          std::lock_guard lock(merge_mutex);
          next.insert(next.end(), local.begin(), local.end());
        },
        256);
    if (pending != by_delay.end() && pending->first == time) {
      for (Vertex s : pending->second)
        if (out.owner[s] == kNoVertex) offer(s, s, next);
    }
    std::sort(next.begin(), next.end());
    for (Vertex y : next) {
      out.owner[y] = candidate[y];
      touched[y] = 0;
    }
    frontier = std::move(next);
    out.steps = time + 1;
  }
  return out;
}

namespace detail {

// Hop ball around s restricted to alive vertices; returns members.
inline std::vector<Vertex> alive_ball(const WeightedMultigraph& g, Vertex s, std::size_t r, std::span<const char> alive,
                                      std::vector<std::size_t>& scratch) {
  constexpr std::size_t kInf = std::numeric_limits<std::size_t>::max();
  std::vector<Vertex> seen{s};
  scratch[s] = 0;
  for (std::size_t head = 0; head < seen.size(); ++head) {
    const Vertex x = seen[head];
    if (scratch[x] == r) continue;
    for (const auto& inc : g.incident(x)) {
      const Vertex y = inc.neighbor;
      if (!alive[y] || scratch[y] != kInf) continue;
      scratch[y] = scratch[x] + 1;
      seen.push_back(y);
    }
  }
  for (Vertex v : seen) scratch[v] = kInf;
  return seen;
}

}  // namespace detail

inline Decomposition split_graph(const WeightedMultigraph& g, const SplitParams& p) {
  const std::size_t n = g.num_vertices();
  require(n >= 1, "graph must have at least one vertex");
  const Schedule sched = resolve_schedule(n, p);
  Decomposition d;
  d.assignment.assign(n, kNoVertex);
  std::vector<char> alive(n, 1);
  std::vector<Vertex> remaining(n);
  std::iota(remaining.begin(), remaining.end(), Vertex{0});
  std::vector<std::size_t> overlap;
  std::vector<std::size_t> scratch;
  if (p.track_overlap) {
    overlap.assign(n, 0);
    scratch.assign(n, std::numeric_limits<std::size_t>::max());
  }

  for (std::size_t t = 1; t <= sched.T && !remaining.empty(); ++t) {
    Rng rng(derive_seed(p.seed, t));
    const bool last = t == sched.T;
    std::vector<Vertex> centers;
    if (last) {
      centers = remaining;
    } else {
      const std::size_t sigma = center_count(n, remaining.size(), t, sched.T, p.center_constant);
      centers = sample_without_replacement<Vertex>(rng, remaining, sigma);
    }
    std::vector<CenterStart> starts;
    starts.reserve(centers.size());
    for (Vertex s : centers) starts.push_back({s, last ? 0 : static_cast<std::size_t>(rng.between(0, sched.R))});
    const std::size_t radius = (sched.T - t + 1) * sched.R;

    if (p.track_overlap) {
      for (Vertex s : centers)
        for (Vertex v : detail::alive_ball(g, s, radius, alive, scratch)) ++overlap[v];
    }

    const JitteredResult res = jittered_assignment(g, starts, radius, alive);
    d.bfs_levels += res.steps;
    ++d.rounds;

    // New components in center-id order.
    std::vector<Vertex> used;
    for (Vertex v : remaining)
      if (res.owner[v] != kNoVertex) used.push_back(res.owner[v]);
    std::sort(used.begin(), used.end());
    used.erase(std::unique(used.begin(), used.end()), used.end());
    std::map<Vertex, Vertex> index;
    for (Vertex c : used) {
      index[c] = static_cast<Vertex>(d.centers.size());
      d.centers.push_back(c);
    }
    std::vector<Vertex> survivors;
    for (Vertex v : remaining) {
      if (res.owner[v] == kNoVertex) {
        survivors.push_back(v);
      } else {
        d.assignment[v] = index[res.owner[v]];
        alive[v] = 0;
      }
    }
    remaining = std::move(survivors);
  }
  if (!remaining.empty()) throw AlgorithmError("split_graph left vertices uncovered");
  if (p.track_overlap) d.max_ball_overlap = *std::max_element(overlap.begin(), overlap.end());
  return d;
}

// Cut edges per class; the generic bucket is reported as class 0.
inline std::map<int, std::size_t> cut_per_class(const EdgeClassedGraph& cg, std::span<const Vertex> assignment) {
  std::map<int, std::size_t> cut;
  auto count = [&](int cls, std::span<const EdgeId> ids) {
    std::size_t c = 0;
    for (EdgeId id : ids) {
      const Edge& e = cg.base.edge_by_id(id);
      if (assignment[e.u] != assignment[e.v]) ++c;
    }
    cut[cls] = c;
  };
  for (const auto& [i, ids] : cg.classes) count(i, ids);
  if (!cg.generic.empty()) count(0, cg.generic);
  return cut;
}

struct PartitionOptions {
  double c1 = 272.0;
  std::size_t max_retries = 64;
};

// Allowed cut edges for a class of `size` edges. A bound at or above the
// class size is vacuous and returned as the class size.
inline std::size_t allowed_cut(std::size_t size, std::size_t k, std::size_t n, std::size_t rho, double c1) {
  const double logn = static_cast<double>(log2_ceil(n));
  const double bound = static_cast<double>(size) * c1 * static_cast<double>(k) * logn * logn * logn /
                       static_cast<double>(rho);
  if (bound >= static_cast<double>(size)) return size;
  return static_cast<std::size_t>(std::floor(bound));
}

// split_graph on the union of all classes, restarted with a fresh seed until
// every class cuts at most |E_i| c1 k log^3 n / rho edges.
inline Decomposition partition(const EdgeClassedGraph& cg, const SplitParams& p, const PartitionOptions& opt = {}) {
  const std::size_t n = cg.base.num_vertices();
  const std::size_t k = std::max<std::size_t>(1, cg.class_count());
  std::map<int, std::size_t> allowed;
  for (const auto& [i, ids] : cg.classes) allowed[i] = allowed_cut(ids.size(), k, n, p.rho, opt.c1);
  if (!cg.generic.empty()) allowed[0] = allowed_cut(cg.generic.size(), k, n, p.rho, opt.c1);

  std::map<int, std::size_t> last_cut;
  for (std::size_t attempt = 0; attempt < std::max<std::size_t>(1, opt.max_retries); ++attempt) {
    SplitParams q = p;
    q.seed = attempt == 0 ? p.seed : derive_seed(p.seed, 0x5eed0000ULL + attempt);
    Decomposition d = split_graph(cg.base, q);
    d.per_class_cut = cut_per_class(cg, d.assignment);
    d.per_class_allowed = allowed;
    d.retries = attempt;
    bool ok = true;
    for (const auto& [i, c] : d.per_class_cut)
      if (c > allowed[i]) ok = false;
    if (ok) return d;
    last_cut = d.per_class_cut;
  }
  std::string msg = "partition retry limit reached; cut/allowed per class:";
  for (const auto& [i, c] : last_cut) msg += " " + std::to_string(i) + ":" + std::to_string(c) + "/" + std::to_string(allowed[i]);
  throw PartitionError(msg, last_cut, allowed);
}

// One round of jittered growth from `centers` random centers with delays in
// [0, R] and no radius cap; returns the fraction of edges cut.
inline double sample_jittered_cut_fraction(const WeightedMultigraph& g, std::size_t R, std::size_t centers,
                                           std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Vertex> all(g.num_vertices());
  std::iota(all.begin(), all.end(), Vertex{0});
  const auto chosen = sample_without_replacement<Vertex>(rng, all, std::max<std::size_t>(1, centers));
  std::vector<CenterStart> starts;
  for (Vertex s : chosen) starts.push_back({s, static_cast<std::size_t>(rng.between(0, R))});
  const auto res = jittered_assignment(g, starts, g.num_vertices() + R);
  std::size_t cut = 0;
  for (const auto& e : g.edges())
    if (res.owner[e.u] != res.owner[e.v]) ++cut;
  return g.num_edges() == 0 ? 0.0 : static_cast<double>(cut) / static_cast<double>(g.num_edges());
}

}  // namespace laplax
