#pragma once

#include <deque>
#include <memory>
#include <optional>
#include <vector>

#include "anelkin/mesh.hpp"

namespace anelkin {

template <int N>
using BodyPtr = std::shared_ptr<const SimplicialBody<N>>;

/// True when both configurations live over the same mesh (shared object or
/// structurally equal).
template <int N>
bool same_body(const BodyPtr<N>& a, const BodyPtr<N>& b) {
  return a == b || (a && b && *a == *b);
}

/// A per-cell linear field over a body, detached from any placement.
/// Every cell's matrix must have positive determinant.
template <int N>
class StandaloneField {
 public:
  StandaloneField(BodyPtr<N> body, std::vector<Mat<N>> field)
      : body_(std::move(body)), field_(std::move(field)) {
    if (!body_) throw Error("null body");
    if (field_.size() != body_->cell_count())
      throw Error("field size does not match cell count");
    for (std::size_t c = 0; c < field_.size(); ++c)
      if (!(field_[c].determinant() > 0.0))
        throw OrientationViolation("field on cell " + std::to_string(c) +
                                   " has non-positive determinant");
  }

  const BodyPtr<N>& body() const { return body_; }
  const std::vector<Mat<N>>& values() const { return field_; }
  const Mat<N>& operator[](std::size_t c) const { return field_[c]; }
  std::size_t size() const { return field_.size(); }

 private:
  BodyPtr<N> body_;
  std::vector<Mat<N>> field_;
};

/// A discrete configuration: a placement of the body's vertices (the base
/// map) together with a per-cell linear fiber field. Both are validated to be
/// orientation-preserving cell by cell. Immutable after construction; the
/// injectivity flag is the only deferred, cached datum.
template <int N>
class Configuration {
 public:
  using Point = Vec<N>;

  Configuration(BodyPtr<N> body, std::vector<Point> base, std::vector<Mat<N>> field)
      : body_(std::move(body)), base_(std::move(base)), field_(std::move(field)) {
    if (!body_) throw Error("null body");
    if (base_.size() != body_->vertex_count())
      throw Error("base size does not match vertex count");
    if (field_.size() != body_->cell_count())
      throw Error("field size does not match cell count");
    for (std::size_t c = 0; c < body_->cell_count(); ++c) {
      if (!(edge_matrix(*body_, c, base_).determinant() > 0.0))
        throw OrientationViolation("placed cell " + std::to_string(c) +
                                   " has non-positive orientation");
      if (!(field_[c].determinant() > 0.0))
        throw OrientationViolation("field on cell " + std::to_string(c) +
                                   " has non-positive determinant");
    }
  }

  const BodyPtr<N>& body() const { return body_; }
  const std::vector<Point>& base() const { return base_; }
  const std::vector<Mat<N>>& field() const { return field_; }

  /// Cached result of the exact pairwise cell-overlap test; unset until
  /// check_injectivity() has run.
  std::optional<bool> injective() const { return injective_; }

  /// Exact pairwise simplex-intersection test over all placed cell pairs.
  /// Interiors must be disjoint (shared boundaries are fine). O(m^2).
  bool check_injectivity() const {
    if (injective_) return *injective_;
    bool ok = true;
    for (std::size_t a = 0; a + 1 < body_->cell_count() && ok; ++a)
      for (std::size_t b = a + 1; b < body_->cell_count() && ok; ++b)
        if (placed_interiors_intersect(a, b)) ok = false;
    injective_ = ok;
    return ok;
  }

 private:
  bool placed_interiors_intersect(std::size_t ca, std::size_t cb) const;

  BodyPtr<N> body_;
  std::vector<Point> base_;
  std::vector<Mat<N>> field_;
  mutable std::optional<bool> injective_;
};

namespace detail {

// Separating-axis test for two simplices given as vertex arrays. Interiors
// are disjoint iff some axis separates them allowing touching contact.
template <int N>
bool simplex_interiors_intersect(const std::array<Vec<N>, N + 1>& a,
                                 const std::array<Vec<N>, N + 1>& b) {
  double scale = 0.0;
  for (const auto& p : a) scale = std::max(scale, p.norm());
  for (const auto& p : b) scale = std::max(scale, p.norm());
  const double tol = 1e-12 * std::max(1.0, scale);

  auto separated_by = [&](const Vec<N>& axis) {
    if (axis.norm() < 1e-30) return false;
    double amin = 1e300, amax = -1e300, bmin = 1e300, bmax = -1e300;
    for (const auto& p : a) {
      const double d = axis.dot(p);
      amin = std::min(amin, d);
      amax = std::max(amax, d);
    }
    for (const auto& p : b) {
      const double d = axis.dot(p);
      bmin = std::min(bmin, d);
      bmax = std::max(bmax, d);
    }
    const double n = axis.norm();
    return amax <= bmin + tol * n || bmax <= amin + tol * n;
  };

  std::vector<Vec<N>> axes;
  if constexpr (N == 2) {
    for (int i = 0; i <= 2; ++i) {
      Vec<2> e = a[(i + 1) % 3] - a[i];
      axes.push_back(Vec<2>{-e(1), e(0)});
      e = b[(i + 1) % 3] - b[i];
      axes.push_back(Vec<2>{-e(1), e(0)});
    }
  } else {
    auto face_normals = [&](const std::array<Vec<3>, 4>& s) {
      for (int omit = 0; omit < 4; ++omit) {
        std::array<Vec<3>, 3> f;
        int k = 0;
        for (int i = 0; i < 4; ++i)
          if (i != omit) f[k++] = s[i];
        axes.push_back((f[1] - f[0]).cross(f[2] - f[0]));
      }
    };
    face_normals(a);
    face_normals(b);
    for (int i = 0; i < 4; ++i)
      for (int j = i + 1; j < 4; ++j)
        for (int k = 0; k < 4; ++k)
          for (int l = k + 1; l < 4; ++l)
            axes.push_back((a[j] - a[i]).cross(b[l] - b[k]));
  }
  for (const auto& axis : axes)
    if (separated_by(axis)) return false;
  return true;
}

}  // namespace detail

template <int N>
bool Configuration<N>::placed_interiors_intersect(std::size_t ca, std::size_t cb) const {
  std::array<Point, N + 1> a, b;
  for (int i = 0; i <= N; ++i) {
    a[i] = base_[body_->cells()[ca][i]];
    b[i] = base_[body_->cells()[cb][i]];
  }
  return detail::simplex_interiors_intersect<N>(a, b);
}

/// Builds a configuration whose field equals its own base-map gradient.
template <int N>
Configuration<N> holonomic_configuration(BodyPtr<N> body, std::vector<Vec<N>> base);

/// Piecewise-constant deformation gradient of the base map:
/// placed_edge * ref_edge^{-1} per cell.
template <int N>
StandaloneField<N> tangent_map(const Configuration<N>& c) {
  std::vector<Mat<N>> t;
  t.reserve(c.body()->cell_count());
  for (std::size_t cell = 0; cell < c.body()->cell_count(); ++cell) {
    Mat<N> ep = edge_matrix(*c.body(), cell, c.base());
    Mat<N> er = reference_edge_matrix(*c.body(), cell);
    t.push_back(Mat<N>(ep * Eigen::PartialPivLU<Mat<N>>(er).inverse()));
  }
  return StandaloneField<N>(c.body(), std::move(t));
}

template <int N>
Configuration<N> holonomic_configuration(BodyPtr<N> body, std::vector<Vec<N>> base) {
  Configuration<N> probe(body, base, std::vector<Mat<N>>(body->cell_count(),
                                                         Mat<N>::Identity()));
  return Configuration<N>(body, std::move(base), tangent_map(probe).values());
}

/// Holonomicity verdict with the per-cell residuals behind it.
template <int N>
struct HolonomicityReport {
  bool holonomic = false;
  double max_residual = 0.0;
  std::vector<double> residuals;  // ||field - T||_F / max(1, ||T||_F) per cell
};

/// A configuration is holonomic when its fiber field coincides with the
/// gradient of its own base map, cell by cell.
template <int N>
HolonomicityReport<N> is_holonomic(const Configuration<N>& c, double tol = kTolRel) {
  HolonomicityReport<N> r;
  StandaloneField<N> t = tangent_map(c);
  r.residuals.reserve(t.size());
  for (std::size_t cell = 0; cell < t.size(); ++cell) {
    const double res =
        (c.field()[cell] - t[cell]).norm() / std::max(1.0, t[cell].norm());
    r.residuals.push_back(res);
    r.max_residual = std::max(r.max_residual, res);
  }
  r.holonomic = r.max_residual <= tol;
  return r;
}

/// One facet that blocks integrability.
struct FacetViolation {
  std::size_t facet = 0;
  double residual = 0.0;
};

template <int N>
struct GradientVerdict {
  bool is_gradient = false;
  double max_residual = 0.0;
  /// Reconstructed placement (first vertex at the origin) when is_gradient.
  std::vector<Vec<N>> base;
  /// Offending interior facets, ascending facet index, when not.
  std::vector<FacetViolation> violations;
};

/// Decides whether a per-cell field is the gradient of some continuous
/// piecewise-affine placement. The candidate map x -> F_c x + t_c is
/// integrated cell to cell along a dual-graph spanning tree, then every
/// interior facet is checked: the positions both incident cells predict for
/// the facet's vertices must agree within tol. This covers the tangential
/// jump condition and, on non-simply-connected meshes, the translational
/// mismatch a loop around a hole picks up.
template <int N>
GradientVerdict<N> field_is_gradient(const StandaloneField<N>& f, double tol = kTolRel) {
  const SimplicialBody<N>& body = *f.body();
  const std::size_t m = body.cell_count();

  // Dual adjacency: interior facets only.
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> nbr(m);  // (cell, facet)
  for (std::size_t fi = 0; fi < body.facets().size(); ++fi) {
    const auto& fc = body.facets()[fi];
    if (!fc.interior()) continue;
    nbr[fc.left].push_back({fc.right, fi});
    nbr[fc.right].push_back({fc.left, fi});
  }

  // Per-cell translation via BFS from cell 0; positions must match on the
  // lowest shared vertex across each tree facet.
  std::vector<Vec<N>> trans(m, Vec<N>::Zero());
  std::vector<char> seen(m, 0);
  std::deque<std::size_t> queue{0};
  seen[0] = 1;
  std::size_t reached = 1;
  while (!queue.empty()) {
    const std::size_t c = queue.front();
    queue.pop_front();
    for (const auto& [d, fi] : nbr[c]) {
      if (seen[d]) continue;
      seen[d] = 1;
      ++reached;
      const std::size_t anchor = body.facets()[fi].vertices[0];
      const Vec<N>& xs = body.vertices()[anchor];
      trans[d] = trans[c] + (f[c] - f[d]) * xs;
      queue.push_back(d);
    }
  }
  if (reached != m)
    throw DisconnectedBody("dual graph is disconnected: " +
                           std::to_string(reached) + " of " + std::to_string(m) +
                           " cells reachable");

  GradientVerdict<N> out;
  for (std::size_t fi = 0; fi < body.facets().size(); ++fi) {
    const auto& fc = body.facets()[fi];
    if (!fc.interior()) continue;
    double hf = 0.0;
    for (int i = 0; i < N; ++i)
      for (int j = i + 1; j < N; ++j)
        hf = std::max(hf, (body.vertices()[fc.vertices[i]] -
                           body.vertices()[fc.vertices[j]]).norm());
    const double denom =
        std::max(1.0, hf * std::max(f[fc.left].norm(), f[fc.right].norm()));
    double mismatch = 0.0;
    for (int i = 0; i < N; ++i) {
      const Vec<N>& xv = body.vertices()[fc.vertices[i]];
      const Vec<N> pl = f[fc.left] * xv + trans[fc.left];
      const Vec<N> pr = f[fc.right] * xv + trans[fc.right];
      mismatch = std::max(mismatch, (pl - pr).norm());
    }
    const double res = mismatch / denom;
    out.max_residual = std::max(out.max_residual, res);
    if (res > tol) out.violations.push_back({fi, res});
  }

  out.is_gradient = out.violations.empty();
  if (out.is_gradient) {
    // First claiming cell in BFS-discovery order fixes each vertex position.
    std::vector<char> placed(body.vertex_count(), 0);
    out.base.assign(body.vertex_count(), Vec<N>::Zero());
    std::vector<std::size_t> order;
    order.reserve(m);
    {
      std::vector<char> s2(m, 0);
      std::deque<std::size_t> q2{0};
      s2[0] = 1;
      while (!q2.empty()) {
        const std::size_t c = q2.front();
        q2.pop_front();
        order.push_back(c);
        for (const auto& [d, fi] : nbr[c])
          if (!s2[d]) {
            s2[d] = 1;
            q2.push_back(d);
          }
      }
    }
    for (const std::size_t c : order)
      for (int i = 0; i <= N; ++i) {
        const std::size_t v = body.cells()[c][i];
        if (!placed[v]) {
          placed[v] = 1;
          out.base[v] = f[c] * body.vertices()[v] + trans[c];
        }
      }
    const Vec<N> shift = out.base[0];
    for (auto& p : out.base) p -= shift;
  }
  return out;
}

/// Local incompatibility diagnostic: the sum over interior facets of the
/// squared tangential jump of the field. Zero exactly when the field passes
/// the tangential jump condition on every interior facet; on simply connected
/// meshes that coincides with being a gradient.
template <int N>
double incompatibility_norm(const StandaloneField<N>& f) {
  const SimplicialBody<N>& body = *f.body();
  double sum = 0.0;
  for (const auto& fc : body.facets()) {
    if (!fc.interior()) continue;
    const Mat<N> jump = f[fc.left] - f[fc.right];
    // Orthonormal tangent basis of the facet from its edge vectors.
    Eigen::Matrix<double, N, N - 1> edges;
    for (int i = 1; i < N; ++i)
      edges.col(i - 1) = body.vertices()[fc.vertices[i]] -
                         body.vertices()[fc.vertices[0]];
    Eigen::HouseholderQR<Eigen::Matrix<double, N, N - 1>> qr(edges);
    Eigen::Matrix<double, N, N - 1> q =
        qr.householderQ() * Eigen::Matrix<double, N, N - 1>::Identity();
    sum += (jump * q).squaredNorm();
  }
  return sum;
}

}  // namespace anelkin
