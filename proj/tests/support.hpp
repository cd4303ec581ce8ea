#pragma once

// Shared deterministic generators for the test suites. Everything takes an
// explicit RNG so each test pins its own seed.

#include <cmath>
#include <memory>
#include <random>

#include "anelkin/configuration.hpp"
#include "anelkin/diffeo.hpp"
#include "anelkin/lattice.hpp"

namespace testsupport {

using namespace anelkin;

using Rng = std::mt19937_64;

template <int N>
Mat<N> random_rotation(Rng& rng) {
  std::normal_distribution<double> G(0.0, 1.0);
  Mat<N> m;
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) m(i, j) = G(rng);
  Eigen::HouseholderQR<Mat<N>> qr(m);
  Mat<N> q = qr.householderQ();
  if (q.determinant() < 0) q.col(0) *= -1.0;
  return q;
}

/// Well-conditioned random affine map with positive determinant.
template <int N>
SpaceDiffeo<N> random_affine(Rng& rng, double scale_lo = 0.6, double scale_hi = 1.8,
                             double shift = 2.0) {
  std::uniform_real_distribution<double> S(scale_lo, scale_hi);
  std::uniform_real_distribution<double> T(-shift, shift);
  Mat<N> d = Mat<N>::Zero();
  for (int i = 0; i < N; ++i) d(i, i) = S(rng);
  Mat<N> a = random_rotation<N>(rng) * d * random_rotation<N>(rng);
  Vec<N> c;
  for (int i = 0; i < N; ++i) c(i) = T(rng);
  return SpaceDiffeo<N>::affine(a, c);
}

inline std::shared_ptr<const SimplicialBody<2>> shared_grid_2d(std::size_t nx,
                                                               std::size_t ny,
                                                               double h = 1.0) {
  return std::make_shared<const SimplicialBody<2>>(grid_body_2d(nx, ny, h));
}

inline std::shared_ptr<const SimplicialBody<3>> shared_kuhn_3d(std::size_t nx,
                                                               std::size_t ny,
                                                               std::size_t nz,
                                                               double h = 1.0) {
  return std::make_shared<const SimplicialBody<3>>(kuhn_body_3d(nx, ny, nz, h));
}

/// Structured grid with jittered vertices; jitter is kept small enough to
/// preserve positive orientation.
template <int N>
std::shared_ptr<const SimplicialBody<N>> jittered_body(std::size_t per_side, Rng& rng,
                                                       double jitter = 0.08) {
  std::uniform_real_distribution<double> J(-jitter, jitter);
  if constexpr (N == 2) {
    SimplicialBody<2> flat = grid_body_2d(per_side, per_side);
    std::vector<Vec<2>> v = flat.vertices();
    for (auto& p : v) {
      p(0) += J(rng);
      p(1) += J(rng);
    }
    return std::make_shared<const SimplicialBody<2>>(std::move(v), flat.cells());
  } else {
    SimplicialBody<3> flat = kuhn_body_3d(per_side, per_side, per_side);
    std::vector<Vec<3>> v = flat.vertices();
    for (auto& p : v)
      for (int i = 0; i < 3; ++i) p(i) += J(rng);
    return std::make_shared<const SimplicialBody<3>>(std::move(v), flat.cells());
  }
}

/// Random placement: affine image of the reference coordinates plus a mild
/// smooth warp, damped until every placed cell stays positively oriented.
template <int N>
std::vector<Vec<N>> random_base(const SimplicialBody<N>& body, Rng& rng,
                                double warp = 0.1) {
  std::uniform_real_distribution<double> U(0.0, 2.0 * 3.14159265358979);
  const Mat<N> a = random_affine<N>(rng).affine_matrix();
  Vec<N> c, phase, freq;
  for (int i = 0; i < N; ++i) {
    c(i) = U(rng) - 3.14159265358979;
    phase(i) = U(rng);
    freq(i) = 0.5 + 0.15 * i;
  }
  const double diam = body.diameter();
  for (double amp = warp * diam / std::max<std::size_t>(1, body.vertex_count() / 8);;
       amp *= 0.5) {
    std::vector<Vec<N>> base;
    base.reserve(body.vertex_count());
    for (const auto& x : body.vertices()) {
      Vec<N> p = a * x + c;
      for (int i = 0; i < N; ++i)
        p(i) += amp * std::sin(freq(i) * x.sum() + phase(i));
      base.push_back(p);
    }
    bool ok = true;
    for (std::size_t cell = 0; cell < body.cell_count() && ok; ++cell) {
      try {
        ok = edge_matrix(body, cell, base).determinant() > 0.0;
      } catch (const DegenerateCell&) {
        ok = false;
      }
    }
    if (ok) return base;
    if (amp < 1e-12) throw Error("random_base failed to stay oriented");
  }
}

/// Random valid configuration: random base, field = base gradient times a
/// random near-identity per-cell factor (so it is generally anholonomic).
template <int N>
Configuration<N> random_configuration(std::shared_ptr<const SimplicialBody<N>> body,
                                      Rng& rng, double fiber_spread = 0.25) {
  std::uniform_real_distribution<double> U(-fiber_spread, fiber_spread);
  std::vector<Vec<N>> base = random_base(*body, rng);
  Configuration<N> carrier(body, base,
                           std::vector<Mat<N>>(body->cell_count(), Mat<N>::Identity()));
  StandaloneField<N> t = tangent_map(carrier);
  std::vector<Mat<N>> field;
  field.reserve(body->cell_count());
  for (std::size_t cell = 0; cell < body->cell_count(); ++cell) {
    Mat<N> m;
    do {
      m = Mat<N>::Identity();
      for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) m(i, j) += U(rng);
    } while (!(m.determinant() > 0.2));
    field.push_back(Mat<N>(t[cell] * m));
  }
  return Configuration<N>(body, std::move(base), std::move(field));
}

}  // namespace testsupport
