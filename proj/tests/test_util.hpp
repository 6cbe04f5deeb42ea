#pragma once

// Small helpers shared by the unit tests.

#include <cmath>
#include <cstdint>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <laplax/laplax.hpp>

namespace laplax::testing {

inline Vector random_vector(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  Vector x(n);
  for (auto& v : x) v = 2.0 * rng.unit() - 1.0;
  return x;
}

// Random vector with zero mean on every component of g.
inline Vector random_mean_zero(const WeightedMultigraph& g, std::uint64_t seed) {
  Vector x = random_vector(g.num_vertices(), seed);
  std::size_t count = 0;
  const auto label = components(g, &count);
  project_mean_zero(x, label, count);
  return x;
}

// |x - y|_A / |y|_A.
inline double relative_a_error(const CsrMatrix& A, std::span<const double> x, std::span<const double> y) {
  Vector d(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) d[i] = x[i] - y[i];
  const double denom = a_norm(A, y);
  return denom == 0.0 ? a_norm(A, d) : a_norm(A, d) / denom;
}

// Exact text form of a graph, for byte comparisons.
inline std::string fingerprint(const WeightedMultigraph& g) {
  std::ostringstream s;
  s << g.num_vertices() << '\n';
  s << std::hexfloat;
  for (const auto& e : g.edges()) s << e.u << ' ' << e.v << ' ' << e.w << ' ' << e.id << '\n';
  return s.str();
}

inline std::string fingerprint(std::span<const double> x) {
  std::ostringstream s;
  s << std::hexfloat;
  for (double v : x) s << v << '\n';
  return s.str();
}

// Graph with weights drawn log-uniformly from [1, 10^decades].
inline WeightedMultigraph with_log_weights(const WeightedMultigraph& g, double decades, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Edge> edges(g.edges().begin(), g.edges().end());
  for (auto& e : edges) e.w = std::pow(10.0, decades * rng.unit());
  return WeightedMultigraph(g.num_vertices(), std::move(edges));
}

}  // namespace laplax::testing
