#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <map>
#include <vector>

#include "anelkin/core.hpp"

namespace anelkin {

inline constexpr std::size_t npos = static_cast<std::size_t>(-1);

/// Edge matrix of a simplex: columns are x_i - x_0 for i = 1..N.
/// Throws DegenerateCell when |det| < tol * scale^N, scale = longest edge.
template <int N>
Mat<N> simplex_edge_matrix(const std::array<Vec<N>, N + 1>& x,
                           double degeneracy_tol = kDegeneracyTol) {
  Mat<N> e;
  for (int i = 0; i < N; ++i) e.col(i) = x[i + 1] - x[0];
  double scale = 0.0;
  for (int i = 0; i <= N; ++i)
    for (int j = i + 1; j <= N; ++j) scale = std::max(scale, (x[j] - x[i]).norm());
  double bound = degeneracy_tol;
  for (int i = 0; i < N; ++i) bound *= scale;
  if (std::abs(e.determinant()) < bound)
    throw DegenerateCell("degenerate simplex: |det| below " +
                         std::to_string(bound));
  return e;
}

/// Oriented simplicial complex in a single flat chart of R^N, N in {2,3}.
/// Immutable after construction. Construction validates: vertex indices in
/// range and pairwise distinct per cell, every vertex referenced by some cell,
/// every cell positively oriented and non-degenerate, and each facet incident
/// to at most two cells.
template <int N>
class SimplicialBody {
  static_assert(N == 2 || N == 3, "supported dimensions are 2 and 3");

 public:
  using Point = Vec<N>;
  using Cell = std::array<std::size_t, N + 1>;

  /// A codimension-1 face. vertices are sorted ascending; right == npos marks
  /// a boundary facet. Facets are listed in sorted vertex-tuple order.
  struct Facet {
    std::array<std::size_t, N> vertices;
    std::size_t left = npos;
    std::size_t right = npos;
    bool interior() const { return right != npos; }
  };

  SimplicialBody(std::vector<Point> vertices, std::vector<Cell> cells,
                 double degeneracy_tol = kDegeneracyTol)
      : vertices_(std::move(vertices)), cells_(std::move(cells)) {
    if (vertices_.empty() || cells_.empty())
      throw MeshError("body needs at least one vertex and one cell");
    std::vector<char> referenced(vertices_.size(), 0);
    for (std::size_t c = 0; c < cells_.size(); ++c) {
      const Cell& cell = cells_[c];
      for (int i = 0; i <= N; ++i) {
        if (cell[i] >= vertices_.size())
          throw MeshError("cell " + std::to_string(c) + ": vertex index out of range");
        for (int j = i + 1; j <= N; ++j)
          if (cell[i] == cell[j])
            throw MeshError("cell " + std::to_string(c) + ": repeated vertex");
        referenced[cell[i]] = 1;
      }
      std::array<Point, N + 1> x;
      for (int i = 0; i <= N; ++i) x[i] = vertices_[cell[i]];
      Mat<N> e;
      try {
        e = simplex_edge_matrix<N>(x, degeneracy_tol);
      } catch (const DegenerateCell& err) {
        throw MeshError("cell " + std::to_string(c) + ": " + err.what());
      }
      if (e.determinant() <= 0.0)
        throw MeshError("cell " + std::to_string(c) + ": negative orientation");
    }
    for (std::size_t v = 0; v < referenced.size(); ++v)
      if (!referenced[v])
        throw MeshError("vertex " + std::to_string(v) + " not referenced by any cell");
    build_facets();
  }

  int dim() const { return N; }
  std::size_t vertex_count() const { return vertices_.size(); }
  std::size_t cell_count() const { return cells_.size(); }
  const std::vector<Point>& vertices() const { return vertices_; }
  const std::vector<Cell>& cells() const { return cells_; }
  const std::vector<Facet>& facets() const { return facets_; }

  /// Reference-coordinate bounding-box diagonal; a convenient length scale.
  double diameter() const {
    Point lo = vertices_[0], hi = vertices_[0];
    for (const Point& p : vertices_) {
      lo = lo.cwiseMin(p);
      hi = hi.cwiseMax(p);
    }
    return (hi - lo).norm();
  }

  friend bool operator==(const SimplicialBody& a, const SimplicialBody& b) {
    if (a.vertices_.size() != b.vertices_.size() || a.cells_ != b.cells_) return false;
    for (std::size_t v = 0; v < a.vertices_.size(); ++v)
      if (a.vertices_[v] != b.vertices_[v]) return false;
    return true;
  }

 private:
  void build_facets() {
    // Key: sorted facet vertices. A facet of cell c omits one local vertex.
    std::map<std::array<std::size_t, N>, std::vector<std::size_t>> incidence;
    for (std::size_t c = 0; c < cells_.size(); ++c) {
      for (int omit = 0; omit <= N; ++omit) {
        std::array<std::size_t, N> key;
        int k = 0;
        for (int i = 0; i <= N; ++i)
          if (i != omit) key[k++] = cells_[c][i];
        std::sort(key.begin(), key.end());
        incidence[key].push_back(c);
      }
    }
    facets_.clear();
    facets_.reserve(incidence.size());
    for (const auto& [key, cells] : incidence) {
      if (cells.size() > 2)
        throw MeshError("facet incident to more than two cells");
      Facet f;
      f.vertices = key;
      f.left = cells[0];
      f.right = cells.size() == 2 ? cells[1] : npos;
      facets_.push_back(f);
    }
  }

  std::vector<Point> vertices_;
  std::vector<Cell> cells_;
  std::vector<Facet> facets_;
};

/// Edge matrix of cell `cell` under the placement `coords` (one point per
/// body vertex).
template <int N>
Mat<N> edge_matrix(const SimplicialBody<N>& body, std::size_t cell,
                   const std::vector<Vec<N>>& coords,
                   double degeneracy_tol = kDegeneracyTol) {
  if (cell >= body.cell_count()) throw Error("cell index out of range");
  if (coords.size() != body.vertex_count())
    throw Error("placement size does not match vertex count");
  std::array<Vec<N>, N + 1> x;
  for (int i = 0; i <= N; ++i) x[i] = coords[body.cells()[cell][i]];
  return simplex_edge_matrix<N>(x, degeneracy_tol);
}

/// Edge matrix of a cell in reference coordinates.
template <int N>
Mat<N> reference_edge_matrix(const SimplicialBody<N>& body, std::size_t cell,
                             double degeneracy_tol = kDegeneracyTol) {
  return edge_matrix(body, cell, body.vertices(), degeneracy_tol);
}

}  // namespace anelkin
