#pragma once

#include "anelkin/configuration.hpp"
#include "anelkin/diffeo.hpp"

namespace anelkin {

/// The anelastic content of a configuration: a per-cell automorphism of the
/// body's tangent spaces over the identity base map. Canonical within an
/// equivalence class — applying any ambient diffeomorphism to a configuration
/// leaves it unchanged (exactly for affine maps).
template <int N>
class Embodiment {
 public:
  Embodiment(BodyPtr<N> body, std::vector<Mat<N>> values)
      : body_(std::move(body)), values_(std::move(values)) {
    if (!body_) throw Error("null body");
    if (values_.size() != body_->cell_count())
      throw Error("embodiment size does not match cell count");
    for (std::size_t c = 0; c < values_.size(); ++c)
      if (!(values_[c].determinant() > 0.0))
        throw OrientationViolation("embodiment on cell " + std::to_string(c) +
                                   " has non-positive determinant");
  }

  const BodyPtr<N>& body() const { return body_; }
  const std::vector<Mat<N>>& values() const { return values_; }
  const Mat<N>& operator[](std::size_t c) const { return values_[c]; }
  std::size_t size() const { return values_.size(); }

  /// Largest cellwise relative deviation from the identity.
  double deviation_from_identity() const {
    double d = 0.0;
    for (const Mat<N>& m : values_)
      d = std::max(d, rel_diff<N>(m, Mat<N>::Identity()));
    return d;
  }

 private:
  BodyPtr<N> body_;
  std::vector<Mat<N>> values_;
};

template <int N>
struct DecompositionResult {
  Configuration<N> compatible;  // field equals the base-map gradient
  Embodiment<N> anelastic;
  /// max cellwise rel. error of compatible.field * anelastic vs the input field
  double residual = 0.0;
};

/// Splits a configuration into its compatible part (same base map, field
/// replaced by the base gradient) and the canonical per-cell anelastic factor
/// f_ae = T^{-1} * field. Cells whose gradient exceeds the condition cap are
/// rejected.
template <int N>
DecompositionResult<N> decompose(const Configuration<N>& c,
                                 double cond_limit = kCondLimit) {
  StandaloneField<N> t = tangent_map(c);
  std::vector<Mat<N>> fae;
  fae.reserve(t.size());
  double residual = 0.0;
  for (std::size_t cell = 0; cell < t.size(); ++cell) {
    const double cn = cond<N>(t[cell]);
    if (!(cn <= cond_limit))
      throw DegenerateCell("cell " + std::to_string(cell) +
                           ": gradient condition number exceeds limit");
    Eigen::PartialPivLU<Mat<N>> lu(t[cell]);
    Mat<N> a = lu.solve(c.field()[cell]);
    residual = std::max(residual, rel_diff<N>(Mat<N>(t[cell] * a), c.field()[cell]));
    fae.push_back(std::move(a));
  }
  return DecompositionResult<N>{
      Configuration<N>(c.body(), c.base(), t.values()),
      Embodiment<N>(c.body(), std::move(fae)), residual};
}

/// The canonical invariant alone.
template <int N>
Embodiment<N> embodiment_of(const Configuration<N>& c,
                            double cond_limit = kCondLimit) {
  return decompose(c, cond_limit).anelastic;
}

/// Applies an ambient diffeomorphism to a configuration: the base map is
/// composed pointwise; the fiber field is multiplied by the tangent of g —
/// exactly A for affine g, Tg at the placed cell barycenter otherwise.
/// Orientation violations in the result are rejected.
template <int N>
Configuration<N> push_forward(const Configuration<N>& c, const SpaceDiffeo<N>& g) {
  std::vector<Vec<N>> base = apply_diffeo(g, c.base());
  std::vector<Mat<N>> field;
  field.reserve(c.field().size());
  if (g.is_affine()) {
    const Mat<N>& a = g.affine_matrix();
    for (const Mat<N>& f : c.field()) field.push_back(Mat<N>(a * f));
  } else {
    for (std::size_t cell = 0; cell < c.field().size(); ++cell) {
      Vec<N> bary = Vec<N>::Zero();
      for (int i = 0; i <= N; ++i) bary += c.base()[c.body()->cells()[cell][i]];
      bary /= double(N + 1);
      field.push_back(Mat<N>(g.tangent(bary) * c.field()[cell]));
    }
  }
  return Configuration<N>(c.body(), std::move(base), std::move(field));
}

/// The release/pack reading of the decomposition: releasing the anelastic
/// content (inverse embodiment) from the packed configuration recovers the
/// base-map gradient.
template <int N>
struct ViewIFactors {
  Embodiment<N> release;      // cellwise inverse of the anelastic factor
  Configuration<N> pack;      // the configuration itself
  double residual = 0.0;      // pack.field * release vs base gradient
};

template <int N>
ViewIFactors<N> view_I_factors(const Configuration<N>& c,
                               double cond_limit = kCondLimit) {
  DecompositionResult<N> d = decompose(c, cond_limit);
  std::vector<Mat<N>> rel;
  rel.reserve(d.anelastic.size());
  for (std::size_t cell = 0; cell < d.anelastic.size(); ++cell)
    rel.push_back(guarded_inverse<N>(d.anelastic[cell], cond_limit, "anelastic factor"));
  double residual = 0.0;
  for (std::size_t cell = 0; cell < rel.size(); ++cell)
    residual = std::max(
        residual, rel_diff<N>(Mat<N>(c.field()[cell] * rel[cell]),
                              d.compatible.field()[cell]));
  return ViewIFactors<N>{Embodiment<N>(c.body(), std::move(rel)), c, residual};
}

}  // namespace anelkin
