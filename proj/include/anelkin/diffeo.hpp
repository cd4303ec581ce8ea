#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "anelkin/core.hpp"

namespace anelkin {

/// Orientation-preserving diffeomorphism of the ambient space R^N.
/// Two kinds: affine (y -> A y + c, det(A) > 0) and user-supplied
/// (point map + tangent map). User tangents are spot-checked against central
/// finite differences at registration (relative tolerance 1e-5).
template <int N>
class SpaceDiffeo {
 public:
  using Point = Vec<N>;
  using MapFn = std::function<Point(const Point&)>;
  using TangentFn = std::function<Mat<N>(const Point&)>;

  static SpaceDiffeo affine(const Mat<N>& a, const Vec<N>& c) {
    if (!(a.determinant() > 0.0))
      throw OrientationViolation("affine map must have positive determinant");
    SpaceDiffeo g;
    g.affine_ = true;
    g.a_ = a;
    g.c_ = c;
    return g;
  }

  static SpaceDiffeo identity() {
    return affine(Mat<N>::Identity(), Vec<N>::Zero());
  }

  /// Registers a user map. `probes` are points where the supplied tangent is
  /// validated by central differences; callers with restricted domains must
  /// pass probes inside the domain.
  static SpaceDiffeo user(MapFn map, TangentFn tangent,
                          std::vector<Point> probes = default_probes()) {
    SpaceDiffeo g;
    g.affine_ = false;
    g.map_ = std::move(map);
    g.tangent_ = std::move(tangent);
    for (const Point& y : probes) g.validate_tangent(y);
    return g;
  }

  bool is_affine() const { return affine_; }
  const Mat<N>& affine_matrix() const {
    if (!affine_) throw Error("not an affine map");
    return a_;
  }
  const Vec<N>& affine_offset() const {
    if (!affine_) throw Error("not an affine map");
    return c_;
  }

  Point apply(const Point& y) const {
    return affine_ ? Point(a_ * y + c_) : map_(y);
  }

  /// Tangent map at y. For affine maps this is A independent of y.
  Mat<N> tangent(const Point& y) const {
    return affine_ ? a_ : tangent_(y);
  }

  /// Exact inverse; affine kind only.
  SpaceDiffeo inverse() const {
    if (!affine_) throw Error("inverse available for affine maps only");
    Mat<N> ai = guarded_inverse<N>(a_, kCondLimit, "affine matrix");
    return affine(ai, Vec<N>(-ai * c_));
  }

  /// Composition g2 after g1. Affine pairs compose exactly; mixed pairs
  /// produce a user-kind map with the chain-rule tangent (no re-validation:
  /// both factors were validated at registration).
  friend SpaceDiffeo compose(const SpaceDiffeo& g2, const SpaceDiffeo& g1) {
    if (g2.affine_ && g1.affine_)
      return affine(Mat<N>(g2.a_ * g1.a_), Vec<N>(g2.a_ * g1.c_ + g2.c_));
    SpaceDiffeo g;
    g.affine_ = false;
    g.map_ = [g2, g1](const Point& y) { return g2.apply(g1.apply(y)); };
    g.tangent_ = [g2, g1](const Point& y) {
      return Mat<N>(g2.tangent(g1.apply(y)) * g1.tangent(y));
    };
    return g;
  }

  static std::vector<Point> default_probes() {
    std::vector<Point> pts;
    pts.push_back(Point::Zero());
    for (int i = 0; i < N; ++i) {
      pts.push_back(Point::Unit(i));
      pts.push_back(Point(-0.5 * Point::Unit(i)));
    }
    Point mix;
    for (int i = 0; i < N; ++i) mix(i) = 0.3 + 0.2 * i;
    pts.push_back(mix);
    return pts;
  }

 private:
  SpaceDiffeo() = default;

  void validate_tangent(const Point& y) const {
    const Mat<N> t = tangent_(y);
    Mat<N> fd;
    for (int j = 0; j < N; ++j) {
      const double eps = 1e-6 * (1.0 + y.norm());
      Point hi = y, lo = y;
      hi(j) += eps;
      lo(j) -= eps;
      fd.col(j) = (map_(hi) - map_(lo)) / (2.0 * eps);
    }
    if ((fd - t).norm() > kFdRelTol * std::max(1.0, t.norm()))
      throw TangentMismatch(
          "user tangent disagrees with finite differences at a probe point");
  }

  bool affine_ = true;
  Mat<N> a_ = Mat<N>::Identity();
  Vec<N> c_ = Vec<N>::Zero();
  MapFn map_;
  TangentFn tangent_;
};

/// Applies g to every point of a placement.
template <int N>
std::vector<Vec<N>> apply_diffeo(const SpaceDiffeo<N>& g,
                                 const std::vector<Vec<N>>& coords) {
  std::vector<Vec<N>> out;
  out.reserve(coords.size());
  for (const Vec<N>& y : coords) out.push_back(g.apply(y));
  return out;
}

}  // namespace anelkin
