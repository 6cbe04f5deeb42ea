#pragma once

// Compressed sparse row matrices, graph Laplacians and SDD matrices.

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "error.hpp"
#include "graph.hpp"
#include "parallel.hpp"

namespace laplax {

using Vector = std::vector<double>;

struct Triplet {
  std::size_t row;
  std::size_t col;
  double value;
};

class CsrMatrix {
public:
  CsrMatrix() = default;

  // Duplicate (row, col) entries are summed; exact zeros are kept out.
  CsrMatrix(std::size_t n, std::vector<Triplet> entries) : n_(n), row_ptr_(n + 1, 0) {
    for (const auto& t : entries)
      if (t.row >= n || t.col >= n) throw InputError("matrix entry (" + std::to_string(t.row) + ", " +
                                                     std::to_string(t.col) + ") outside dimension " + std::to_string(n));
    std::sort(entries.begin(), entries.end(),
              [](const Triplet& a, const Triplet& b) { return std::tie(a.row, a.col) < std::tie(b.row, b.col); });
    for (std::size_t k = 0; k < entries.size();) {
      std::size_t j = k;
      double sum = 0.0;
      while (j < entries.size() && entries[j].row == entries[k].row && entries[j].col == entries[k].col)
        sum += entries[j++].value;
      if (sum != 0.0) {
        col_.push_back(entries[k].col);
        val_.push_back(sum);
        ++row_ptr_[entries[k].row + 1];
      }
      k = j;
    }
    for (std::size_t i = 0; i < n; ++i) row_ptr_[i + 1] += row_ptr_[i];
  }

  std::size_t dim() const { return n_; }
  std::size_t nonzeros() const { return val_.size(); }
  std::span<const std::size_t> row_cols(std::size_t i) const {
    return {col_.data() + row_ptr_[i], col_.data() + row_ptr_[i + 1]};
  }
  std::span<const double> row_values(std::size_t i) const {
    return {val_.data() + row_ptr_[i], val_.data() + row_ptr_[i + 1]};
  }

  double at(std::size_t i, std::size_t j) const {
    auto cols = row_cols(i);
    auto it = std::lower_bound(cols.begin(), cols.end(), j);
    if (it == cols.end() || *it != j) return 0.0;
    return row_values(i)[static_cast<std::size_t>(it - cols.begin())];
  }

  void multiply(std::span<const double> x, std::span<double> y) const {
    parallel_for(0, n_, [&](std::size_t i) {
      double s = 0.0;
      for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) s += val_[k] * x[col_[k]];
      y[i] = s;
    });
  }
  Vector operator*(std::span<const double> x) const {
    Vector y(n_);
    multiply(x, y);
    return y;
  }

  double quadratic_form(std::span<const double> x) const {
    Vector y = (*this) * x;
    return dot(x, y);
  }

  std::vector<Triplet> triplets() const {
    std::vector<Triplet> out;
    out.reserve(val_.size());
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) out.push_back({i, col_[k], val_[k]});
    return out;
  }

private:
  std::size_t n_ = 0;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<std::size_t> col_;
  Vector val_;
};

// L_G with parallel edges collapsed by weight summation.
class Laplacian {
public:
  Laplacian() = default;

  static Laplacian from_graph(const WeightedMultigraph& g) {
    std::vector<Triplet> t;
    t.reserve(4 * g.num_edges());
    for (const auto& e : g.edges()) {
      t.push_back({e.u, e.u, e.w});
      t.push_back({e.v, e.v, e.w});
      t.push_back({e.u, e.v, -e.w});
      t.push_back({e.v, e.u, -e.w});
    }
    Laplacian L;
    L.matrix_ = CsrMatrix(g.num_vertices(), std::move(t));
    return L;
  }

  std::size_t dim() const { return matrix_.dim(); }
  const CsrMatrix& matrix() const { return matrix_; }
  void multiply(std::span<const double> x, std::span<double> y) const { matrix_.multiply(x, y); }
  Vector operator*(std::span<const double> x) const { return matrix_ * x; }
  double quadratic_form(std::span<const double> x) const { return matrix_.quadratic_form(x); }

  // Graph with one edge per nonzero off-diagonal pair (i < j), ids in row order.
  WeightedMultigraph to_graph() const {
    std::vector<Edge> edges;
    for (std::size_t i = 0; i < dim(); ++i) {
      auto cols = matrix_.row_cols(i);
      auto vals = matrix_.row_values(i);
      for (std::size_t k = 0; k < cols.size(); ++k)
        if (cols[k] > i && vals[k] < 0.0)
          edges.push_back({static_cast<Vertex>(i), static_cast<Vertex>(cols[k]), -vals[k], edges.size()});
    }
    return WeightedMultigraph(dim(), std::move(edges));
  }

private:
  CsrMatrix matrix_;
};

// Symmetric, diagonally dominant matrix. Construction validates both
// properties and names the first offending row.
class SddMatrix {
public:
  SddMatrix() = default;

  static SddMatrix from_triplets(std::size_t n, std::vector<Triplet> entries, double tolerance = 1e-12) {
    SddMatrix A;
    A.matrix_ = CsrMatrix(n, std::move(entries));
    const CsrMatrix& M = A.matrix_;
    for (std::size_t i = 0; i < n; ++i) {
      auto cols = M.row_cols(i);
      auto vals = M.row_values(i);
      double diag = 0.0, off = 0.0;
      for (std::size_t k = 0; k < cols.size(); ++k) {
        if (!std::isfinite(vals[k])) throw InputError("row " + std::to_string(i) + " has a non-finite entry");
        if (cols[k] == i) {
          diag = vals[k];
        } else {
          off += std::abs(vals[k]);
          const double mirror = M.at(cols[k], i);
          if (std::abs(mirror - vals[k]) > tolerance * std::max(std::abs(mirror), std::abs(vals[k])))
            throw InputError("matrix is not symmetric at (" + std::to_string(i) + ", " + std::to_string(cols[k]) + ")");
        }
      }
      if (diag < off - tolerance * std::max(diag, off))
        throw InputError("matrix is not diagonally dominant in row " + std::to_string(i) + " (diagonal " +
                         std::to_string(diag) + " < off-diagonal sum " + std::to_string(off) + ")");
    }
    return A;
  }

  static SddMatrix from_laplacian(const Laplacian& L) { return from_triplets(L.dim(), L.matrix().triplets()); }

  std::size_t dim() const { return matrix_.dim(); }
  const CsrMatrix& matrix() const { return matrix_; }
  Vector operator*(std::span<const double> x) const { return matrix_ * x; }

  // Zero row sums and nonpositive off-diagonals, up to a relative tolerance.
  bool is_laplacian(double tolerance = 1e-12) const {
    for (std::size_t i = 0; i < dim(); ++i) {
      auto cols = matrix_.row_cols(i);
      auto vals = matrix_.row_values(i);
      double sum = 0.0, scale = 0.0;
      for (std::size_t k = 0; k < cols.size(); ++k) {
        if (cols[k] != i && vals[k] > 0.0) return false;
        sum += vals[k];
        scale += std::abs(vals[k]);
      }
      if (std::abs(sum) > tolerance * scale) return false;
    }
    return true;
  }

  // Interprets the off-diagonal pattern as a graph. Only meaningful when
  // is_laplacian() holds.
  WeightedMultigraph laplacian_graph() const {
    std::vector<Edge> edges;
    for (std::size_t i = 0; i < dim(); ++i) {
      auto cols = matrix_.row_cols(i);
      auto vals = matrix_.row_values(i);
      for (std::size_t k = 0; k < cols.size(); ++k)
        if (cols[k] > i && vals[k] < 0.0)
          edges.push_back({static_cast<Vertex>(i), static_cast<Vertex>(cols[k]), -vals[k], edges.size()});
    }
    return WeightedMultigraph(dim(), std::move(edges));
  }

private:
  CsrMatrix matrix_;
};

// Removes the per-component mean so x is orthogonal to the Laplacian nullspace.
inline void project_mean_zero(std::span<double> x, std::span<const Vertex> component, std::size_t count) {
  std::vector<double> sum(count, 0.0);
  std::vector<std::size_t> size(count, 0);
  for (std::size_t v = 0; v < x.size(); ++v) {
    sum[component[v]] += x[v];
    ++size[component[v]];
  }
  for (std::size_t v = 0; v < x.size(); ++v) x[v] -= sum[component[v]] / static_cast<double>(size[component[v]]);
}

inline double a_norm(const CsrMatrix& A, std::span<const double> x) {
  return std::sqrt(std::max(0.0, A.quadratic_form(x)));
}

}  // namespace laplax
