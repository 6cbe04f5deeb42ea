#pragma once

// Double-cover reduction of an SDD system to a Laplacian system.
//
// Variable i becomes the pair (i, n + i) standing for x_i and -x_i. If
// L y = [b; -b] then x = (y_top - y_bottom) / 2 solves A x = b, and the
// relative error in the A-norm carries over unchanged.

#include <span>
#include <vector>

#include "graph.hpp"
#include "sparse.hpp"

namespace laplax {

struct GrembanLift {
  WeightedMultigraph graph;  // 2n vertices
  Vector rhs;                // [b; -b]
  std::size_t original_dim = 0;

  Vector back(std::span<const double> y) const {
    Vector x(original_dim);
    for (std::size_t i = 0; i < original_dim; ++i) x[i] = 0.5 * (y[i] - y[original_dim + i]);
    return x;
  }
};

inline GrembanLift sdd_to_laplacian(const SddMatrix& A, std::span<const double> b) {
  const std::size_t n = A.dim();
  require(b.size() == n, "right-hand side length does not match the matrix");
  const CsrMatrix& M = A.matrix();
  std::vector<Edge> edges;
  auto add = [&](std::size_t u, std::size_t v, double w) {
    edges.push_back({static_cast<Vertex>(u), static_cast<Vertex>(v), w, edges.size()});
  };
  for (std::size_t i = 0; i < n; ++i) {
    auto cols = M.row_cols(i);
    auto vals = M.row_values(i);
    double diag = 0.0, off = 0.0;
    for (std::size_t k = 0; k < cols.size(); ++k) {
      const std::size_t j = cols[k];
      if (j == i) {
        diag = vals[k];
        continue;
      }
      off += std::abs(vals[k]);
      if (j < i) continue;
      if (vals[k] < 0.0) {
        add(i, j, -vals[k]);
        add(n + i, n + j, -vals[k]);
      } else {
        add(i, n + j, vals[k]);
        add(n + i, j, vals[k]);
      }
    }
    const double excess = diag - off;
    if (excess > 1e-14 * std::max(diag, 1.0)) add(i, n + i, 0.5 * excess);
  }
  GrembanLift lift;
  lift.graph = WeightedMultigraph(2 * n, std::move(edges));
  lift.rhs.resize(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    lift.rhs[i] = b[i];
    lift.rhs[n + i] = -b[i];
  }
  lift.original_dim = n;
  return lift;
}

}  // namespace laplax
