#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <set>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "miggt/error.hpp"
#include "miggt/matrix.hpp"

namespace miggt {

struct Interaction {
  std::size_t user = 0;
  std::size_t item = 0;
  friend auto operator<=>(const Interaction&, const Interaction&) = default;
};

/// Implicit-feedback records. Users and items are indexed independently;
/// in the vertex space users come first and items follow at offset num_users.
struct InteractionSet {
  std::size_t num_users = 0;
  std::size_t num_items = 0;
  std::vector<Interaction> pairs;

  std::size_t num_vertices() const { return num_users + num_items; }
  std::size_t item_vertex(std::size_t item) const { return num_users + item; }

  /// Throws RangeError for an out-of-range pair and Error for a duplicate.
  void validate() const {
    std::set<Interaction> seen;
    for (const auto& p : pairs) {
      if (p.user >= num_users || p.item >= num_items) {
        throw RangeError("interaction (" + std::to_string(p.user) + ", " +
                         std::to_string(p.item) + ") out of range for " +
                         std::to_string(num_users) + " users, " + std::to_string(num_items) +
                         " items");
      }
      if (!seen.insert(p).second) {
        throw Error("duplicate interaction (" + std::to_string(p.user) + ", " +
                    std::to_string(p.item) + ")");
      }
    }
  }

  /// Items per user, each list sorted ascending.
  std::vector<std::vector<std::size_t>> items_by_user() const {
    std::vector<std::vector<std::size_t>> out(num_users);
    for (const auto& p : pairs) out[p.user].push_back(p.item);
    for (auto& v : out) std::sort(v.begin(), v.end());
    return out;
  }
};

/// Compressed-row sparse matrix.
struct SparseMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::size_t> row_offsets{0};
  std::vector<std::size_t> col_indices;
  std::vector<double> values;

  std::size_t nnz() const { return values.size(); }

  /// Stored value at (r, c), or 0 when absent.
  double at(std::size_t r, std::size_t c) const {
    const auto first = col_indices.begin() + static_cast<std::ptrdiff_t>(row_offsets[r]);
    const auto last = col_indices.begin() + static_cast<std::ptrdiff_t>(row_offsets[r + 1]);
    const auto it = std::lower_bound(first, last, c);
    if (it == last || *it != c) return 0.0;
    return values[static_cast<std::size_t>(it - col_indices.begin())];
  }

  std::span<const std::size_t> row_columns(std::size_t r) const {
    return {col_indices.data() + row_offsets[r], row_offsets[r + 1] - row_offsets[r]};
  }

  /// Builds from (row, col, value) triplets; duplicates are not allowed.
  static SparseMatrix from_triplets(std::size_t rows, std::size_t cols,
                                    std::vector<std::tuple<std::size_t, std::size_t, double>> t) {
    std::sort(t.begin(), t.end(), [](const auto& a, const auto& b) {
      return std::pair(std::get<0>(a), std::get<1>(a)) < std::pair(std::get<0>(b), std::get<1>(b));
    });
    SparseMatrix m;
    m.rows = rows;
    m.cols = cols;
    m.row_offsets.assign(rows + 1, 0);
    m.col_indices.reserve(t.size());
    m.values.reserve(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
      const auto [r, c, v] = t[i];
      if (r >= rows || c >= cols) throw RangeError("triplet outside matrix bounds");
      if (i > 0 && std::get<0>(t[i - 1]) == r && std::get<1>(t[i - 1]) == c) {
        throw Error("duplicate triplet in sparse matrix");
      }
      ++m.row_offsets[r + 1];
      m.col_indices.push_back(c);
      m.values.push_back(v);
    }
    for (std::size_t r = 0; r < rows; ++r) m.row_offsets[r + 1] += m.row_offsets[r];
    return m;
  }

  Matrix to_dense() const {
    Matrix d(rows, cols);
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t p = row_offsets[r]; p < row_offsets[r + 1]; ++p)
        d(r, col_indices[p]) = values[p];
    return d;
  }
};

/// Self-looped, symmetrically normalized adjacency D^-1/2 (A + I) D^-1/2.
struct NormalizedAdjacency {
  SparseMatrix matrix;
  /// Degrees of A + I.
  std::vector<double> degrees;

  std::size_t num_vertices() const { return matrix.rows; }
};

/// Bipartite adjacency [[0, B], [B', 0]] with users first, then items.
inline SparseMatrix build_bipartite_adjacency(const InteractionSet& interactions) {
  interactions.validate();
  const std::size_t n = interactions.num_vertices();
  std::vector<std::tuple<std::size_t, std::size_t, double>> t;
  t.reserve(2 * interactions.pairs.size());
  for (const auto& p : interactions.pairs) {
    const std::size_t item = interactions.item_vertex(p.item);
    t.emplace_back(p.user, item, 1.0);
    t.emplace_back(item, p.user, 1.0);
  }
  return SparseMatrix::from_triplets(n, n, std::move(t));
}

inline NormalizedAdjacency normalize_adjacency(const SparseMatrix& adjacency) {
  if (adjacency.rows != adjacency.cols) throw DimensionError("adjacency must be square");
  const std::size_t n = adjacency.rows;
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t p = adjacency.row_offsets[r]; p < adjacency.row_offsets[r + 1]; ++p) {
      const std::size_t c = adjacency.col_indices[p];
      if (c == r) throw Error("adjacency has a nonzero diagonal at " + std::to_string(r));
      if (adjacency.at(c, r) != adjacency.values[p]) {
        throw Error("adjacency is not symmetric at (" + std::to_string(r) + ", " +
                    std::to_string(c) + ")");
      }
    }
  }

  NormalizedAdjacency out;
  out.degrees.assign(n, 1.0);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t p = adjacency.row_offsets[r]; p < adjacency.row_offsets[r + 1]; ++p)
      out.degrees[r] += adjacency.values[p];

  auto& m = out.matrix;
  m.rows = m.cols = n;
  m.row_offsets.assign(n + 1, 0);
  m.col_indices.reserve(adjacency.nnz() + n);
  m.values.reserve(adjacency.nnz() + n);
  for (std::size_t r = 0; r < n; ++r) {
    bool diagonal_done = false;
    auto push = [&](std::size_t c, double a) {
      m.col_indices.push_back(c);
      m.values.push_back(a / std::sqrt(out.degrees[r] * out.degrees[c]));
    };
    for (std::size_t p = adjacency.row_offsets[r]; p < adjacency.row_offsets[r + 1]; ++p) {
      const std::size_t c = adjacency.col_indices[p];
      if (!diagonal_done && c > r) {
        push(r, 1.0);
        diagonal_done = true;
      }
      push(c, adjacency.values[p]);
    }
    if (!diagonal_done) push(r, 1.0);
    m.row_offsets[r + 1] = m.col_indices.size();
  }
  return out;
}

/// Sparse-dense product matrix * dense.
inline Matrix spmm(const SparseMatrix& matrix, const Matrix& dense) {
  if (matrix.cols != dense.rows()) {
    throw DimensionError("spmm: sparse " + std::to_string(matrix.rows) + "x" +
                         std::to_string(matrix.cols) + " times dense " + shape_string(dense));
  }
  Matrix out(matrix.rows, dense.cols());
  for (std::size_t r = 0; r < matrix.rows; ++r) {
    auto o = out.row(r);
    for (std::size_t p = matrix.row_offsets[r]; p < matrix.row_offsets[r + 1]; ++p)
      axpy(matrix.values[p], dense.row(matrix.col_indices[p]), o);
  }
  return out;
}

/// Sorted neighbors of a vertex, excluding the vertex itself.
inline std::vector<std::size_t> neighbors_of(const SparseMatrix& adjacency, std::size_t vertex) {
  if (vertex >= adjacency.rows) {
    throw RangeError("vertex " + std::to_string(vertex) + " out of range for " +
                     std::to_string(adjacency.rows) + " vertices");
  }
  std::vector<std::size_t> out;
  for (const std::size_t c : adjacency.row_columns(vertex))
    if (c != vertex) out.push_back(c);
  return out;
}

}  // namespace miggt
