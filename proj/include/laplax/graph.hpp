#pragma once

// Undirected weighted multigraph with stable edge identities, plus the
// traversal and minor operations the decomposition code is built from.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include "error.hpp"
#include "parallel.hpp"

namespace laplax {

using Vertex = std::uint32_t;
using EdgeId = std::uint64_t;

inline constexpr Vertex kNoVertex = std::numeric_limits<Vertex>::max();

// ceil(log2 n), at least 1.
inline std::size_t log2_ceil(std::size_t n) {
  std::size_t k = 0;
  while ((std::size_t{1} << k) < n) ++k;
  return std::max<std::size_t>(1, k);
}

struct Edge {
  Vertex u = 0;
  Vertex v = 0;
  double w = 1.0;
  EdgeId id = 0;

  Vertex other(Vertex x) const { return x == u ? v : u; }
  friend bool operator==(const Edge&, const Edge&) = default;
};

struct Incidence {
  Vertex neighbor;
  std::uint32_t edge;  // position in edges()
};

class WeightedMultigraph {
public:
  WeightedMultigraph() = default;

  // Edges may arrive in any order; they are stored sorted by id. Ids must be
  // unique, weights positive and finite, endpoints distinct and below n.
  WeightedMultigraph(std::size_t n, std::vector<Edge> edges) : n_(n), edges_(std::move(edges)) {
    require(n <= static_cast<std::size_t>(kNoVertex), "vertex count too large");
    std::sort(edges_.begin(), edges_.end(), [](const Edge& a, const Edge& b) { return a.id < b.id; });
    for (std::size_t k = 0; k < edges_.size(); ++k) {
      const Edge& e = edges_[k];
      if (e.u >= n_ || e.v >= n_)
        throw InputError("edge " + std::to_string(e.id) + " has an endpoint outside [0, " + std::to_string(n_) + ")");
      if (e.u == e.v) throw InputError("edge " + std::to_string(e.id) + " is a self-loop");
      if (!(e.w > 0.0) || !std::isfinite(e.w))
        throw InputError("edge " + std::to_string(e.id) + " has non-positive or non-finite weight");
      if (k > 0 && edges_[k - 1].id == e.id) throw InputError("duplicate edge id " + std::to_string(e.id));
    }
    build_adjacency();
  }

  // Ids are assigned 0, 1, 2, ... in input order.
  static WeightedMultigraph from_triples(std::size_t n, std::span<const std::tuple<Vertex, Vertex, double>> triples) {
    std::vector<Edge> edges;
    edges.reserve(triples.size());
    EdgeId id = 0;
    for (const auto& [u, v, w] : triples) edges.push_back({u, v, w, id++});
    return WeightedMultigraph(n, std::move(edges));
  }

  std::size_t num_vertices() const { return n_; }
  std::size_t num_edges() const { return edges_.size(); }
  std::span<const Edge> edges() const { return edges_; }
  const Edge& edge(std::size_t k) const { return edges_[k]; }

  std::span<const Incidence> incident(Vertex v) const {
    return {incidence_.data() + offsets_[v], incidence_.data() + offsets_[v + 1]};
  }
  std::size_t degree(Vertex v) const { return offsets_[v + 1] - offsets_[v]; }

  std::optional<std::size_t> index_of(EdgeId id) const {
    auto it = std::lower_bound(edges_.begin(), edges_.end(), id, [](const Edge& e, EdgeId x) { return e.id < x; });
    if (it == edges_.end() || it->id != id) return std::nullopt;
    return static_cast<std::size_t>(it - edges_.begin());
  }
  const Edge& edge_by_id(EdgeId id) const {
    auto k = index_of(id);
    if (!k) throw InputError("unknown edge id " + std::to_string(id));
    return edges_[*k];
  }

  EdgeId next_free_id() const { return edges_.empty() ? 0 : edges_.back().id + 1; }

  double total_weight() const {
    double s = 0.0;
    for (const auto& e : edges_) s += e.w;
    return s;
  }

  // Subgraph on the same vertex set with the given edge ids.
  WeightedMultigraph edge_subgraph(std::span<const EdgeId> ids) const {
    std::vector<Edge> kept;
    kept.reserve(ids.size());
    for (EdgeId id : ids) kept.push_back(edge_by_id(id));
    return WeightedMultigraph(n_, std::move(kept));
  }

  friend bool operator==(const WeightedMultigraph& a, const WeightedMultigraph& b) {
    return a.n_ == b.n_ && a.edges_ == b.edges_;
  }

private:
  void build_adjacency() {
    offsets_.assign(n_ + 1, 0);
    for (const auto& e : edges_) {
      ++offsets_[e.u + 1];
      ++offsets_[e.v + 1];
    }
    for (std::size_t v = 0; v < n_; ++v) offsets_[v + 1] += offsets_[v];
    incidence_.resize(2 * edges_.size());
    std::vector<std::size_t> cursor(offsets_.begin(), offsets_.end() - 1);
    // Edges are visited in id order, so each incidence list ends up sorted by id.
    for (std::size_t k = 0; k < edges_.size(); ++k) {
      const Edge& e = edges_[k];
      incidence_[cursor[e.u]++] = {e.v, static_cast<std::uint32_t>(k)};
      incidence_[cursor[e.v]++] = {e.u, static_cast<std::uint32_t>(k)};
    }
  }

  std::size_t n_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::size_t> offsets_{0};
  std::vector<Incidence> incidence_;
};

// ---------------------------------------------------------------------------
// Hop-distance balls.

struct Ball {
  std::vector<Vertex> vertices;              // in BFS discovery order
  std::map<Vertex, Vertex> parent;           // child -> parent, root excluded
  std::vector<std::uint32_t> level_sizes;    // |level 0|, |level 1|, ...
  std::size_t rounds = 0;                    // nonempty levels beyond the root
};

// Level-synchronous BFS to hop radius r. A vertex's parent is its smallest-id
// neighbour on the previous level, so the result does not depend on the order
// in which a level is expanded.
inline Ball bfs_ball(const WeightedMultigraph& g, Vertex s, std::size_t r) {
  require(s < g.num_vertices(), "bfs source out of range");
  Ball ball;
  std::unordered_map<Vertex, std::size_t> depth;
  std::vector<Vertex> frontier{s};
  depth[s] = 0;
  ball.vertices.push_back(s);
  ball.level_sizes.push_back(1);
  for (std::size_t level = 1; level <= r && !frontier.empty(); ++level) {
    std::map<Vertex, Vertex> discovered;  // vertex -> min parent
    for (Vertex x : frontier) {
      for (const auto& inc : g.incident(x)) {
        if (depth.count(inc.neighbor)) continue;
        auto [it, fresh] = discovered.emplace(inc.neighbor, x);
        if (!fresh && x < it->second) it->second = x;
      }
    }
    if (discovered.empty()) break;
    ++ball.rounds;
    frontier.clear();
    for (const auto& [v, p] : discovered) {
      depth[v] = level;
      ball.parent[v] = p;
      ball.vertices.push_back(v);
      frontier.push_back(v);
    }
    ball.level_sizes.push_back(static_cast<std::uint32_t>(frontier.size()));
  }
  return ball;
}

// Hop distances from `sources` restricted to vertices with allowed[v] != 0
// (all vertices when `allowed` is empty). Unreached vertices get SIZE_MAX.
inline std::vector<std::size_t> hop_distances(const WeightedMultigraph& g, std::span<const Vertex> sources,
                                              std::span<const char> allowed = {}) {
  constexpr std::size_t kInf = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> dist(g.num_vertices(), kInf);
  std::vector<Vertex> queue;
  for (Vertex s : sources) {
    if (!allowed.empty() && !allowed[s]) continue;
    if (dist[s] == 0) continue;
    dist[s] = 0;
    queue.push_back(s);
  }
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const Vertex x = queue[head];
    for (const auto& inc : g.incident(x)) {
      const Vertex y = inc.neighbor;
      if (dist[y] != kInf || (!allowed.empty() && !allowed[y])) continue;
      dist[y] = dist[x] + 1;
      queue.push_back(y);
    }
  }
  return dist;
}

// ---------------------------------------------------------------------------
// Weight classes.

struct EdgeClassedGraph {
  WeightedMultigraph base;
  double z = 2.0;
  std::map<int, std::vector<EdgeId>> classes;  // class i holds w in [z^(i-1), z^i)
  std::vector<EdgeId> generic;                 // optional E_0 bucket

  std::size_t class_count() const {
    std::size_t k = generic.empty() ? 0 : 1;
    for (const auto& [i, ids] : classes)
      if (!ids.empty()) ++k;
    return k;
  }
};

// floor(log_z w) + 1, corrected against floating-point error in the logarithm.
inline int weight_class_index(double w, double z) {
  int i = static_cast<int>(std::floor(std::log(w) / std::log(z))) + 1;
  while (i > 1 && std::pow(z, i - 1) > w) --i;
  while (std::pow(z, i) <= w) ++i;
  return i;
}

inline EdgeClassedGraph weight_classes(const WeightedMultigraph& g, double z) {
  require(z > 1.0 && std::isfinite(z), "class base z must exceed 1");
  EdgeClassedGraph out{g, z, {}, {}};
  for (const auto& e : g.edges()) {
    if (e.w < 1.0) throw InputError("edge " + std::to_string(e.id) + " has weight below 1; normalize first");
    out.classes[weight_class_index(e.w, z)].push_back(e.id);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Contraction and components.

struct Contraction {
  WeightedMultigraph graph;
  std::map<EdgeId, std::pair<Vertex, Vertex>> survivors;  // eid -> quotient endpoints
};

// Quotient by `assignment` (vertex -> component id). Component ids need not
// be dense; quotient vertex ids are the ranks of the distinct ids used.
inline Contraction contract(const WeightedMultigraph& g, std::span<const Vertex> assignment) {
  require(assignment.size() == g.num_vertices(), "assignment must cover every vertex");
  std::vector<Vertex> labels(assignment.begin(), assignment.end());
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  auto rank = [&](Vertex c) {
    return static_cast<Vertex>(std::lower_bound(labels.begin(), labels.end(), c) - labels.begin());
  };
  std::vector<Vertex> q(g.num_vertices());
  for (std::size_t v = 0; v < q.size(); ++v) q[v] = rank(assignment[v]);
  Contraction out;
  std::vector<Edge> kept;
  for (const auto& e : g.edges()) {
    const Vertex a = q[e.u], b = q[e.v];
    if (a == b) continue;
    kept.push_back({a, b, e.w, e.id});
    out.survivors.emplace(e.id, std::make_pair(a, b));
  }
  out.graph = WeightedMultigraph(labels.size(), std::move(kept));
  return out;
}

// Component label per vertex; labels are dense and ordered by smallest member.
inline std::vector<Vertex> components(const WeightedMultigraph& g, std::size_t* count = nullptr) {
  std::vector<Vertex> label(g.num_vertices(), kNoVertex);
  Vertex next = 0;
  std::vector<Vertex> stack;
  for (Vertex s = 0; s < g.num_vertices(); ++s) {
    if (label[s] != kNoVertex) continue;
    label[s] = next;
    stack.push_back(s);
    while (!stack.empty()) {
      const Vertex x = stack.back();
      stack.pop_back();
      for (const auto& inc : g.incident(x)) {
        if (label[inc.neighbor] != kNoVertex) continue;
        label[inc.neighbor] = next;
        stack.push_back(inc.neighbor);
      }
    }
    ++next;
  }
  if (count) *count = next;
  return label;
}

inline bool is_connected(const WeightedMultigraph& g) {
  std::size_t k = 0;
  components(g, &k);
  return k <= 1;
}

// Union-find with path halving.
class DisjointSets {
public:
  explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), Vertex{0}); }
  Vertex find(Vertex x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  bool unite(Vertex a, Vertex b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (b < a) std::swap(a, b);
    parent_[b] = a;
    return true;
  }

private:
  std::vector<Vertex> parent_;
};

// ---------------------------------------------------------------------------
// Edge-list text format: "u v w" per line, '#' starts a comment.

inline WeightedMultigraph parse_edge_list(std::istream& in, std::optional<std::size_t> n_hint = std::nullopt) {
  std::vector<Edge> edges;
  std::string line;
  std::size_t lineno = 0;
  std::size_t n = n_hint.value_or(0);
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    long long u, v;
    double w;
    if (!(ls >> u)) continue;
    if (!(ls >> v >> w) || u < 0 || v < 0)
      throw InputError("edge list line " + std::to_string(lineno) + ": expected 'u v w'");
    std::string extra;
    if (ls >> extra) throw InputError("edge list line " + std::to_string(lineno) + ": trailing tokens");
    if (u == v) throw InputError("edge list line " + std::to_string(lineno) + ": self-loop");
    edges.push_back({static_cast<Vertex>(u), static_cast<Vertex>(v), w, edges.size()});
    n = std::max<std::size_t>(n, static_cast<std::size_t>(std::max(u, v)) + 1);
  }
  return WeightedMultigraph(n, std::move(edges));
}

inline WeightedMultigraph read_edge_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  return parse_edge_list(in);
}

inline void write_edge_list(std::ostream& out, const WeightedMultigraph& g) {
  out.precision(17);
  for (const auto& e : g.edges()) out << e.u << ' ' << e.v << ' ' << e.w << '\n';
}

}  // namespace laplax
