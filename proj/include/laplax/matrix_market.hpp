#pragma once

// Matrix Market coordinate real files (symmetric or general) and plain-text
// vectors, one value per line.

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "error.hpp"
#include "sparse.hpp"

namespace laplax {

inline SddMatrix parse_matrix_market(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw InputError("empty Matrix Market input");
  std::string lower = line;
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  std::istringstream banner(lower);
  std::string tag, object, format, field, symmetry;
  banner >> tag >> object >> format >> field >> symmetry;
  if (tag != "%%matrixmarket" || object != "matrix" || format != "coordinate")
    throw InputError("expected a '%%MatrixMarket matrix coordinate' banner");
  if (field != "real" && field != "integer" && field != "double")
    throw InputError("unsupported Matrix Market field '" + field + "'");
  if (symmetry != "symmetric" && symmetry != "general")
    throw InputError("unsupported Matrix Market symmetry '" + symmetry + "'");
  const bool symmetric = symmetry == "symmetric";

  do {
    if (!std::getline(in, line)) throw InputError("Matrix Market size line missing");
  } while (line.empty() || line[0] == '%');
  std::istringstream size_line(line);
  long long rows, cols, nnz;
  if (!(size_line >> rows >> cols >> nnz) || rows < 0 || cols < 0 || nnz < 0)
    throw InputError("malformed Matrix Market size line");
  if (rows != cols) throw InputError("matrix must be square");

  std::vector<Triplet> entries;
  entries.reserve(static_cast<std::size_t>(symmetric ? 2 * nnz : nnz));
  for (long long k = 0; k < nnz; ++k) {
    do {
      if (!std::getline(in, line)) throw InputError("Matrix Market file ends after " + std::to_string(k) + " entries");
    } while (line.empty() || line[0] == '%');
    std::istringstream es(line);
    long long i, j;
    double v;
    if (!(es >> i >> j >> v) || i < 1 || j < 1 || i > rows || j > cols)
      throw InputError("malformed Matrix Market entry: " + line);
    const auto r = static_cast<std::size_t>(i - 1), c = static_cast<std::size_t>(j - 1);
    entries.push_back({r, c, v});
    if (symmetric && r != c) entries.push_back({c, r, v});
  }
  return SddMatrix::from_triplets(static_cast<std::size_t>(rows), std::move(entries));
}

inline SddMatrix read_matrix_market(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  return parse_matrix_market(in);
}

// Lower triangle in symmetric coordinate format.
inline void write_matrix_market(std::ostream& out, const CsrMatrix& A) {
  std::vector<Triplet> lower;
  for (const auto& t : A.triplets())
    if (t.col <= t.row) lower.push_back(t);
  out << "%%MatrixMarket matrix coordinate real symmetric\n";
  out << A.dim() << ' ' << A.dim() << ' ' << lower.size() << '\n';
  out.precision(17);
  for (const auto& t : lower) out << t.row + 1 << ' ' << t.col + 1 << ' ' << t.value << '\n';
}

inline Vector read_vector(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  Vector out;
  std::string token;
  while (in >> token) {
    if (token[0] == '#' || token[0] == '%') {
      std::getline(in, token);
      continue;
    }
    try {
      std::size_t used = 0;
      out.push_back(std::stod(token, &used));
      if (used != token.size()) throw InputError("bad number '" + token + "' in " + path);
    } catch (const std::logic_error&) {
      throw InputError("bad number '" + token + "' in " + path);
    }
  }
  return out;
}

inline void write_vector(std::ostream& out, std::span<const double> x) {
  out.precision(17);
  for (double v : x) out << v << '\n';
}

}  // namespace laplax
