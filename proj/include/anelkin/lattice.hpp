#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "anelkin/configuration.hpp"
#include "anelkin/decomposition.hpp"
#include "anelkin/mesh.hpp"

namespace anelkin {

/// Structured triangulation of [0, nx*h] x [0, ny*h]: each square is split by
/// its lower-left to upper-right diagonal into two positively oriented
/// triangles (lower triangle first).
inline SimplicialBody<2> grid_body_2d(std::size_t nx, std::size_t ny, double h = 1.0) {
  if (nx == 0 || ny == 0 || !(h > 0.0)) throw Error("bad grid spec");
  std::vector<Vec<2>> v;
  v.reserve((nx + 1) * (ny + 1));
  for (std::size_t j = 0; j <= ny; ++j)
    for (std::size_t i = 0; i <= nx; ++i) v.push_back(Vec<2>{i * h, j * h});
  auto id = [nx](std::size_t i, std::size_t j) { return j * (nx + 1) + i; };
  std::vector<SimplicialBody<2>::Cell> cells;
  cells.reserve(2 * nx * ny);
  for (std::size_t j = 0; j < ny; ++j)
    for (std::size_t i = 0; i < nx; ++i) {
      cells.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      cells.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  return SimplicialBody<2>(std::move(v), std::move(cells));
}

/// Kuhn (Freudenthal) subdivision of a box of cubes into six positively
/// oriented tetrahedra each.
inline SimplicialBody<3> kuhn_body_3d(std::size_t nx, std::size_t ny, std::size_t nz,
                                      double h = 1.0) {
  if (nx == 0 || ny == 0 || nz == 0 || !(h > 0.0)) throw Error("bad grid spec");
  std::vector<Vec<3>> v;
  v.reserve((nx + 1) * (ny + 1) * (nz + 1));
  for (std::size_t k = 0; k <= nz; ++k)
    for (std::size_t j = 0; j <= ny; ++j)
      for (std::size_t i = 0; i <= nx; ++i) v.push_back(Vec<3>{i * h, j * h, k * h});
  auto id = [nx, ny](std::size_t i, std::size_t j, std::size_t k) {
    return (k * (ny + 1) + j) * (nx + 1) + i;
  };
  static constexpr int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2},
                                      {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
  static constexpr bool odd[6] = {false, true, true, false, false, true};
  std::vector<SimplicialBody<3>::Cell> cells;
  cells.reserve(6 * nx * ny * nz);
  for (std::size_t k = 0; k < nz; ++k)
    for (std::size_t j = 0; j < ny; ++j)
      for (std::size_t i = 0; i < nx; ++i)
        for (int p = 0; p < 6; ++p) {
          std::size_t c[3] = {i, j, k};
          SimplicialBody<3>::Cell cell;
          cell[0] = id(c[0], c[1], c[2]);
          for (int s = 0; s < 3; ++s) {
            ++c[perms[p][s]];
            cell[s + 1] = id(c[0], c[1], c[2]);
          }
          if (odd[p]) std::swap(cell[2], cell[3]);
          cells.push_back(cell);
        }
  return SimplicialBody<3>(std::move(v), std::move(cells));
}

namespace detail {

// Barycentric classification of a point against one cell. Returns +1 for
// strictly inside, 0 for on the boundary (within tol relative to cell size),
// -1 for outside.
template <int N>
int classify_in_cell(const SimplicialBody<N>& body, std::size_t cell,
                     const Vec<N>& p, double tol = 1e-12) {
  const auto& cl = body.cells()[cell];
  const Vec<N> x0 = body.vertices()[cl[0]];
  Mat<N> edges = reference_edge_matrix(body, cell);
  double scale = 0.0;
  for (int i = 0; i < N; ++i) scale = std::max(scale, edges.col(i).norm());
  const double eps = tol * std::max(1.0, scale);

  Eigen::Matrix<double, N, 1> lam =
      Eigen::PartialPivLU<Mat<N>>(edges).solve(p - x0);
  double lam0 = 1.0;
  for (int i = 0; i < N; ++i) lam0 -= lam(i);

  bool on_boundary = false;
  auto judge = [&](double l) {
    if (l * scale < -eps) return false;
    if (l * scale <= eps) on_boundary = true;
    return true;
  };
  if (!judge(lam0)) return -1;
  for (int i = 0; i < N; ++i)
    if (!judge(lam(i))) return -1;
  return on_boundary ? 0 : +1;
}

// Locate the cell strictly containing p. on_facet reports a boundary hit
// when no cell contains p strictly.
template <int N>
std::size_t locate_cell(const SimplicialBody<N>& body, const Vec<N>& p,
                        bool& on_facet) {
  on_facet = false;
  for (std::size_t c = 0; c < body.cell_count(); ++c) {
    const int verdict = classify_in_cell<N>(body, c, p);
    if (verdict > 0) return c;
    if (verdict == 0) on_facet = true;
  }
  return npos;
}

}  // namespace detail

/// Body with one cell removed; vertices that lose all incident cells are
/// dropped and the rest keep their order. vertex_map sends old ids to new
/// ones (npos for dropped vertices).
template <int N>
struct PuncturedBody {
  std::shared_ptr<const SimplicialBody<N>> body;
  std::vector<std::size_t> vertex_map;
  std::size_t removed_cell = npos;
};

template <int N>
PuncturedBody<N> puncture(const SimplicialBody<N>& body, std::size_t cell) {
  if (cell >= body.cell_count()) throw MeshError("puncture: no such cell");
  std::vector<bool> used(body.vertex_count(), false);
  for (std::size_t c = 0; c < body.cell_count(); ++c) {
    if (c == cell) continue;
    for (std::size_t v : body.cells()[c]) used[v] = true;
  }
  PuncturedBody<N> out;
  out.removed_cell = cell;
  out.vertex_map.assign(body.vertex_count(), npos);
  std::vector<Vec<N>> verts;
  for (std::size_t v = 0; v < body.vertex_count(); ++v)
    if (used[v]) {
      out.vertex_map[v] = verts.size();
      verts.push_back(body.vertices()[v]);
    }
  std::vector<typename SimplicialBody<N>::Cell> cells;
  for (std::size_t c = 0; c < body.cell_count(); ++c) {
    if (c == cell) continue;
    typename SimplicialBody<N>::Cell mapped;
    for (std::size_t k = 0; k <= N; ++k)
      mapped[k] = out.vertex_map[body.cells()[c][k]];
    cells.push_back(mapped);
  }
  out.body = std::make_shared<const SimplicialBody<N>>(std::move(verts),
                                                       std::move(cells));
  return out;
}

struct DislocationSpec {
  enum class Kind { Edge, ScrewAnalogue2D };

  std::size_t nx = 32, ny = 32;  // cells per side, at least 8 each
  double h = 1.0;                // lattice spacing
  Vec<2> core = Vec<2>::Zero();  // chart point, strictly inside, off facets
  Vec<2> burgers = Vec<2>::Zero();  // in lattice-spacing units
  Kind kind = Kind::Edge;
};

/// Dislocated crystal over a punctured grid: identity base map, fiber field
/// carrying the defect. removed_cell indexes the full (unpunctured) grid.
struct DislocatedCrystal {
  Configuration<2> config;
  PuncturedBody<2> mesh;
  Vec<2> core = Vec<2>::Zero();
  Vec<2> burgers_physical = Vec<2>::Zero();
  DislocationSpec::Kind kind = DislocationSpec::Kind::Edge;
};

/// Builds the multivalued-displacement crystal u(x) = x + b θ(x) / 2π around
/// the core. Each cell gets the branch of θ continuous over that cell (a cell
/// avoiding the core subtends less than π, so rounding against the barycenter
/// branch is exact), and its field is the gradient of the affine interpolant
/// of u at the cell's vertices. Circulations along vertex chords therefore
/// telescope to b times the winding number, up to roundoff.
inline DislocatedCrystal make_dislocated(const DislocationSpec& spec) {
  if (spec.nx < 8 || spec.ny < 8)
    throw Error("dislocation grid needs at least 8 cells per side");
  if (!(spec.burgers.norm() > 0.0)) throw Error("Burgers vector must be nonzero");

  SimplicialBody<2> full = grid_body_2d(spec.nx, spec.ny, spec.h);
  bool on_facet = false;
  const std::size_t core_cell = detail::locate_cell<2>(full, spec.core, on_facet);
  if (core_cell == npos) {
    if (on_facet) throw CoreOnFacet("core lies on a facet; move it off");
    throw Error("core lies outside the grid");
  }

  PuncturedBody<2> mesh = puncture<2>(full, core_cell);
  const Vec<2> b_phys = spec.burgers * spec.h;

  const SimplicialBody<2>& body = *mesh.body;
  constexpr double two_pi = 2.0 * std::numbers::pi;
  auto angle = [&](const Vec<2>& p) {
    return std::atan2(p(1) - spec.core(1), p(0) - spec.core(0));
  };

  std::vector<Mat<2>> field;
  field.reserve(body.cell_count());
  for (std::size_t c = 0; c < body.cell_count(); ++c) {
    const auto& cell = body.cells()[c];
    Vec<2> bary = Vec<2>::Zero();
    for (std::size_t v : cell) bary += body.vertices()[v];
    bary /= 3.0;
    const double theta_b = angle(bary);

    std::array<Vec<2>, 3> u;
    for (int k = 0; k < 3; ++k) {
      const Vec<2>& x = body.vertices()[cell[k]];
      const double theta_p = angle(x);
      const double branch = std::round((theta_b - theta_p) / two_pi);
      u[k] = x + (b_phys / two_pi) * (theta_p + two_pi * branch);
    }
    Mat<2> e_u;
    e_u.col(0) = u[1] - u[0];
    e_u.col(1) = u[2] - u[0];
    field.push_back(e_u *
                    Eigen::PartialPivLU<Mat<2>>(reference_edge_matrix(body, c))
                        .inverse());
  }

  Configuration<2> config(mesh.body, body.vertices(), std::move(field));
  return DislocatedCrystal{std::move(config), std::move(mesh), spec.core,
                           b_phys, spec.kind};
}

/// Discrete line integral of (field - I) along a closed polyline in the
/// reference chart. Each segment is charged to the cell strictly containing
/// its midpoint; a midpoint on a facet is ambiguous and throws, as does one
/// outside every cell.
template <int N>
Vec<N> burgers_circuit(const SimplicialBody<N>& body,
                       const std::vector<Mat<N>>& field,
                       const std::vector<Vec<N>>& loop) {
  if (field.size() != body.cell_count())
    throw BodyMismatch("circuit field does not match the body");
  if (loop.size() < 2) throw Error("circuit loop needs at least two points");
  const double scale = std::max(1.0, body.diameter());
  if ((loop.front() - loop.back()).norm() > 1e-12 * scale)
    throw Error("circuit loop is not closed");

  Vec<N> sum = Vec<N>::Zero();
  for (std::size_t s = 0; s + 1 < loop.size(); ++s) {
    const Vec<N> mid = 0.5 * (loop[s] + loop[s + 1]);
    bool on_facet = false;
    const std::size_t cell = detail::locate_cell<N>(body, mid, on_facet);
    if (cell == npos) {
      if (on_facet)
        throw SegmentOnFacet("segment midpoint lies on a facet; nudge the loop");
      throw SegmentOutsideBody("segment midpoint lies outside every cell");
    }
    sum += (field[cell] - Mat<N>::Identity()) * (loop[s + 1] - loop[s]);
  }
  return sum;
}

template <int N>
Vec<N> burgers_circuit(const StandaloneField<N>& f,
                       const std::vector<Vec<N>>& loop) {
  return burgers_circuit<N>(*f.body(), f.values(), loop);
}

template <int N>
Vec<N> burgers_circuit(const Embodiment<N>& e, const std::vector<Vec<N>>& loop) {
  return burgers_circuit<N>(*e.body(), e.values(), loop);
}

/// Closed polyline through the named vertices' reference positions.
template <int N>
std::vector<Vec<N>> vertex_ring(const SimplicialBody<N>& body,
                                const std::vector<std::size_t>& vertices) {
  if (vertices.size() < 2) throw Error("vertex ring needs at least two vertices");
  if (vertices.front() != vertices.back())
    throw Error("vertex ring must repeat its first vertex at the end");
  std::vector<Vec<N>> loop;
  for (std::size_t v : vertices) {
    if (v >= body.vertex_count()) throw MeshError("vertex ring: no such vertex");
    loop.push_back(body.vertices()[v]);
  }
  return loop;
}

/// Translated copy of a loop. Vertex chords on structured grids always cross
/// facets at their midpoints; a small uniform offset resolves the ambiguity
/// without changing any segment vector.
template <int N>
std::vector<Vec<N>> nudged(const std::vector<Vec<N>>& loop, const Vec<N>& delta) {
  std::vector<Vec<N>> out;
  out.reserve(loop.size());
  for (const auto& p : loop) out.push_back(p + delta);
  return out;
}

/// Axis-aligned rectangle of grid chart points, counterclockwise, closed.
inline std::vector<Vec<2>> rectangle_loop(const Vec<2>& lo, const Vec<2>& hi) {
  if (!(lo(0) < hi(0)) || !(lo(1) < hi(1)))
    throw Error("rectangle loop needs lo < hi in both coordinates");
  return {lo, Vec<2>{hi(0), lo(1)}, hi, Vec<2>{lo(0), hi(1)}, lo};
}

/// Half-open box acceptance region in orthonormal perpendicular coordinates,
/// closed extent box in orthonormal parallel coordinates.
struct CutProjectSpec {
  int physical_dim = 1;            // n; the ambient lattice is Z^(2n)
  Eigen::MatrixXd parallel_frame;  // 2n x n, columns span the physical subspace
  Eigen::VectorXd window_lo, window_hi;  // size n, [lo, hi)
  Eigen::VectorXd extent_lo, extent_hi;  // size n, [lo, hi]
  std::size_t count_bound = 200000;
};

struct SubspaceFrames {
  Eigen::MatrixXd parallel;       // 2n x n, orthonormal
  Eigen::MatrixXd perpendicular;  // 2n x n, orthonormal complement
};

/// Orthonormalizes the parallel frame and a deterministic complement.
/// Parallel columns are sign-fixed by positive QR diagonal; perpendicular
/// columns by a positive first nonzero entry.
inline SubspaceFrames orthonormal_frames(const Eigen::MatrixXd& frame) {
  const Eigen::Index rows = frame.rows();
  const Eigen::Index cols = frame.cols();
  if (cols < 1 || rows != 2 * cols)
    throw DegenerateFrame("parallel frame must be 2n x n");

  Eigen::HouseholderQR<Eigen::MatrixXd> qr(frame);
  Eigen::MatrixXd q = qr.householderQ();
  Eigen::MatrixXd r =
      qr.matrixQR().topRows(cols).template triangularView<Eigen::Upper>();
  double top = 0.0;
  for (Eigen::Index i = 0; i < cols; ++i) top = std::max(top, std::abs(r(i, i)));
  for (Eigen::Index i = 0; i < cols; ++i) {
    if (std::abs(r(i, i)) <= 1e-12 * std::max(1.0, top))
      throw DegenerateFrame("parallel frame columns are linearly dependent");
    if (r(i, i) < 0.0) q.col(i) = -q.col(i);
  }

  SubspaceFrames out;
  out.parallel = q.leftCols(cols);
  out.perpendicular = q.rightCols(rows - cols);
  for (Eigen::Index j = 0; j < out.perpendicular.cols(); ++j)
    for (Eigen::Index i = 0; i < rows; ++i) {
      if (std::abs(out.perpendicular(i, j)) <= 1e-13) continue;
      if (out.perpendicular(i, j) < 0.0)
        out.perpendicular.col(j) = -out.perpendicular.col(j);
      break;
    }
  return out;
}

/// Perpendicular projection of the half-open unit cell [0,1)^2: the canonical
/// acceptance window for one-dimensional cut-and-project chains.
inline std::pair<double, double> canonical_window_1d(
    const Eigen::MatrixXd& parallel_frame) {
  if (parallel_frame.rows() != 2 || parallel_frame.cols() != 1)
    throw DegenerateFrame("canonical window is defined for the 2 -> 1 case");
  const SubspaceFrames frames = orthonormal_frames(parallel_frame);
  double lo = 0.0, hi = 0.0;
  for (int cx = 0; cx <= 1; ++cx)
    for (int cy = 0; cy <= 1; ++cy) {
      const double q = frames.perpendicular(0, 0) * cx +
                       frames.perpendicular(1, 0) * cy;
      lo = std::min(lo, q);
      hi = std::max(hi, q);
    }
  return {lo, hi};
}

/// Enumerates lattice points of Z^(2n) whose perpendicular projection lies in
/// the window and whose parallel projection lies in the extent; returns the
/// parallel coordinates sorted lexicographically. Boundary handling: window
/// boxes are half-open, extent boxes closed, both decided with a 1e-9 margin
/// so lattice points landing exactly on a face classify deterministically.
inline std::vector<Eigen::VectorXd> cut_and_project(const CutProjectSpec& spec) {
  const int n = spec.physical_dim;
  if (n < 1 || n > 3) throw Error("physical dimension must be 1, 2, or 3");
  const int ambient = 2 * n;
  if (spec.window_lo.size() != n || spec.window_hi.size() != n ||
      spec.extent_lo.size() != n || spec.extent_hi.size() != n)
    throw Error("window and extent must have one interval per physical axis");
  for (int i = 0; i < n; ++i)
    if (!std::isfinite(spec.window_lo(i)) || !std::isfinite(spec.window_hi(i)) ||
        !std::isfinite(spec.extent_lo(i)) || !std::isfinite(spec.extent_hi(i)))
      throw WindowUnbounded("window and extent bounds must be finite");

  std::vector<Eigen::VectorXd> accepted;
  for (int i = 0; i < n; ++i)
    if (spec.window_hi(i) <= spec.window_lo(i) ||
        spec.extent_hi(i) < spec.extent_lo(i))
      return accepted;

  const SubspaceFrames frames = orthonormal_frames(spec.parallel_frame);
  const double tol = 1e-9;

  double r_par = 0.0, r_perp = 0.0;
  for (int i = 0; i < n; ++i) {
    r_par += std::pow(std::max(std::abs(spec.extent_lo(i)),
                               std::abs(spec.extent_hi(i))),
                      2);
    r_perp += std::pow(std::max(std::abs(spec.window_lo(i)),
                                std::abs(spec.window_hi(i))),
                       2);
  }
  const double radius = std::sqrt(r_par) + std::sqrt(r_perp) + 1.0;
  const long bound = static_cast<long>(std::ceil(radius));

  auto in_boxes = [&](const Eigen::VectorXd& z) {
    for (int i = 0; i < n; ++i) {
      const double q = frames.perpendicular.col(i).dot(z);
      if (q < spec.window_lo(i) - tol || q >= spec.window_hi(i) - tol)
        return false;
      const double p = frames.parallel.col(i).dot(z);
      if (p < spec.extent_lo(i) - tol || p > spec.extent_hi(i) + tol)
        return false;
    }
    return true;
  };

  // The last coordinate's feasible range follows from each constraint with a
  // nonzero last coefficient; the direct box test above makes the final call.
  Eigen::VectorXd z(ambient);
  std::vector<long> cursor(static_cast<std::size_t>(ambient) - 1, -bound);
  const auto free_coords = static_cast<std::size_t>(ambient) - 1;
  bool done = false;
  while (!done) {
    for (std::size_t k = 0; k < free_coords; ++k)
      z(static_cast<Eigen::Index>(k)) = static_cast<double>(cursor[k]);

    double last_lo = -static_cast<double>(bound);
    double last_hi = static_cast<double>(bound);
    bool feasible = true;
    for (int axis = 0; axis < 2 * n && feasible; ++axis) {
      const bool is_window = axis < n;
      const Eigen::VectorXd dir = is_window
                                      ? frames.perpendicular.col(axis)
                                      : frames.parallel.col(axis - n);
      const double lo =
          is_window ? spec.window_lo(axis) : spec.extent_lo(axis - n);
      const double hi =
          is_window ? spec.window_hi(axis) : spec.extent_hi(axis - n);
      double partial = 0.0;
      for (std::size_t k = 0; k < free_coords; ++k)
        partial += dir(static_cast<Eigen::Index>(k)) *
                   z(static_cast<Eigen::Index>(k));
      const double coef = dir(ambient - 1);
      if (std::abs(coef) < 1e-13) {
        if (partial < lo - tol || partial > hi + tol) feasible = false;
        continue;
      }
      double a = (lo - tol - partial) / coef;
      double b = (hi + tol - partial) / coef;
      if (a > b) std::swap(a, b);
      last_lo = std::max(last_lo, a);
      last_hi = std::min(last_hi, b);
    }

    if (feasible) {
      const long z_lo = static_cast<long>(std::floor(last_lo)) - 1;
      const long z_hi = static_cast<long>(std::ceil(last_hi)) + 1;
      for (long last = z_lo; last <= z_hi; ++last) {
        z(ambient - 1) = static_cast<double>(last);
        if (!in_boxes(z)) continue;
        Eigen::VectorXd par(n);
        for (int i = 0; i < n; ++i) par(i) = frames.parallel.col(i).dot(z);
        accepted.push_back(std::move(par));
        if (accepted.size() > spec.count_bound)
          throw Error("cut-and-project exceeded its count bound of " +
                      std::to_string(spec.count_bound));
      }
    }

    std::size_t k = 0;
    for (; k < free_coords; ++k) {
      if (++cursor[k] <= bound) break;
      cursor[k] = -bound;
    }
    done = k == free_coords;
  }

  std::sort(accepted.begin(), accepted.end(),
            [](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
              for (Eigen::Index i = 0; i < a.size(); ++i) {
                if (a(i) < b(i)) return true;
                if (a(i) > b(i)) return false;
              }
              return false;
            });
  return accepted;
}

struct BurgersSplit {
  Eigen::VectorXd parallel;       // coordinates in the orthonormal parallel frame
  Eigen::VectorXd perpendicular;  // coordinates in the complement frame
};

/// Orthogonal split of an ambient Burgers vector into physical and
/// complementary components. Reconstruction through the frames is exact to
/// roundoff.
inline BurgersSplit split_burgers(const Eigen::VectorXd& b_hat,
                                  const Eigen::MatrixXd& parallel_frame) {
  const SubspaceFrames frames = orthonormal_frames(parallel_frame);
  if (b_hat.size() != parallel_frame.rows())
    throw DegenerateFrame("Burgers vector and frame dimensions disagree");
  BurgersSplit out;
  out.parallel = frames.parallel.transpose() * b_hat;
  out.perpendicular = frames.perpendicular.transpose() * b_hat;
  return out;
}

}  // namespace anelkin
