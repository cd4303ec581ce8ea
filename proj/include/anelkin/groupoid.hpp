#pragma once

#include <map>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "anelkin/equivalence.hpp"
#include "anelkin/mesh.hpp"

namespace anelkin {

/// Finite groupoid with fully explicit tables. Composition keys are
/// (second, first): compose at (m2, m1) is m2 after m1, defined exactly when
/// target(m1) = source(m2). A deleted identity or inverse entry is npos.
struct FiniteGroupoid {
  std::size_t object_count = 0;
  std::vector<std::size_t> source;
  std::vector<std::size_t> target;
  std::vector<std::size_t> identity;  // per object
  std::vector<std::size_t> inverse;   // per morphism
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> composition;

  std::size_t morphism_count() const { return source.size(); }
};

struct AxiomCheck {
  bool passed = true;
  std::string counterexample;

  void fail(std::string witness) {
    if (passed) {
      passed = false;
      counterexample = std::move(witness);
    }
  }
};

struct AxiomReport {
  AxiomCheck surjectivity;
  AxiomCheck compatibility;
  AxiomCheck associativity;
  AxiomCheck identity_laws;
  AxiomCheck inverse_laws;

  bool all_passed() const {
    return surjectivity.passed && compatibility.passed &&
           associativity.passed && identity_laws.passed && inverse_laws.passed;
  }
};

namespace detail {

inline void require_well_formed_tables(const FiniteGroupoid& g) {
  if (g.source.size() != g.target.size())
    throw Error("groupoid: source and target tables differ in length");
  if (g.identity.size() != g.object_count)
    throw Error("groupoid: one identity entry per object required");
  if (g.inverse.size() != g.source.size())
    throw Error("groupoid: one inverse entry per morphism required");
  for (std::size_t m = 0; m < g.source.size(); ++m)
    if (g.source[m] >= g.object_count || g.target[m] >= g.object_count)
      throw Error("groupoid: morphism " + std::to_string(m) +
                  " has an out-of-range endpoint");
}

}  // namespace detail

/// Exhaustive check of the five axioms. Violations are reported with a
/// witness, never thrown; only structurally broken tables throw.
inline AxiomReport verify_axioms(const FiniteGroupoid& g) {
  detail::require_well_formed_tables(g);
  AxiomReport report;
  const std::size_t m_count = g.morphism_count();

  {
    std::vector<bool> is_source(g.object_count, false);
    std::vector<bool> is_target(g.object_count, false);
    for (std::size_t m = 0; m < m_count; ++m) {
      is_source[g.source[m]] = true;
      is_target[g.target[m]] = true;
    }
    for (std::size_t o = 0; o < g.object_count; ++o)
      if (!is_source[o] || !is_target[o])
        report.surjectivity.fail("object " + std::to_string(o) +
                                 " is not an endpoint of any morphism");
  }

  auto lookup = [&](std::size_t m2, std::size_t m1) -> std::size_t {
    auto it = g.composition.find({m2, m1});
    return it == g.composition.end() ? npos : it->second;
  };

  for (std::size_t m1 = 0; m1 < m_count; ++m1)
    for (std::size_t m2 = 0; m2 < m_count; ++m2) {
      const bool composable = g.target[m1] == g.source[m2];
      const std::size_t comp = lookup(m2, m1);
      if (!composable) {
        if (comp != npos)
          report.compatibility.fail("non-composable pair (" +
                                    std::to_string(m2) + ", " +
                                    std::to_string(m1) + ") has a composite");
        continue;
      }
      if (comp == npos) {
        report.compatibility.fail("composable pair (" + std::to_string(m2) +
                                  ", " + std::to_string(m1) +
                                  ") has no composite");
        continue;
      }
      if (comp >= m_count || g.source[comp] != g.source[m1] ||
          g.target[comp] != g.target[m2])
        report.compatibility.fail(
            "composite of (" + std::to_string(m2) + ", " +
            std::to_string(m1) + ") has wrong endpoints or is out of range");
    }

  // Associativity over all composable triples; skips tuples whose composites
  // are missing or out of range (already reported above).
  for (std::size_t m1 = 0; m1 < m_count; ++m1)
    for (std::size_t m2 = 0; m2 < m_count; ++m2) {
      if (g.target[m1] != g.source[m2]) continue;
      const std::size_t m21 = lookup(m2, m1);
      if (m21 >= m_count) continue;
      for (std::size_t m3 = 0; m3 < m_count; ++m3) {
        if (g.target[m2] != g.source[m3]) continue;
        const std::size_t m32 = lookup(m3, m2);
        if (m32 >= m_count) continue;
        const std::size_t left = lookup(m3, m21);
        const std::size_t right = lookup(m32, m1);
        if (left != right)
          report.associativity.fail("triple (" + std::to_string(m3) + ", " +
                                    std::to_string(m2) + ", " +
                                    std::to_string(m1) +
                                    ") composes differently by bracketing");
      }
    }

  for (std::size_t o = 0; o < g.object_count; ++o) {
    const std::size_t e = g.identity[o];
    if (e >= m_count || g.source[e] != o || g.target[e] != o) {
      report.identity_laws.fail("identity of object " + std::to_string(o) +
                                " is missing or not a loop at it");
      continue;
    }
  }
  if (report.identity_laws.passed)
    for (std::size_t m = 0; m < m_count; ++m) {
      const std::size_t e_src = g.identity[g.source[m]];
      const std::size_t e_tgt = g.identity[g.target[m]];
      if (lookup(m, e_src) != m)
        report.identity_laws.fail("morphism " + std::to_string(m) +
                                  " composed after its source identity is not itself");
      else if (lookup(e_tgt, m) != m)
        report.identity_laws.fail("target identity composed after morphism " +
                                  std::to_string(m) + " is not itself");
    }

  for (std::size_t m = 0; m < m_count; ++m) {
    const std::size_t inv = g.inverse[m];
    if (inv >= m_count) {
      report.inverse_laws.fail("morphism " + std::to_string(m) +
                               " has no inverse entry");
      continue;
    }
    if (g.source[inv] != g.target[m] || g.target[inv] != g.source[m]) {
      report.inverse_laws.fail("inverse of morphism " + std::to_string(m) +
                               " has mismatched endpoints");
      continue;
    }
    const bool ids_ok = g.identity[g.source[m]] < m_count &&
                        g.identity[g.target[m]] < m_count;
    if (!ids_ok || lookup(inv, m) != g.identity[g.source[m]] ||
        lookup(m, inv) != g.identity[g.target[m]])
      report.inverse_laws.fail("morphism " + std::to_string(m) +
                               " and its inverse do not compose to identities");
  }

  return report;
}

/// Connected components of the object graph. Requires a verified groupoid.
/// Classes are sorted by lowest member; members ascend.
inline std::vector<std::vector<std::size_t>> orbits(const FiniteGroupoid& g) {
  if (!verify_axioms(g).all_passed())
    throw AxiomsNotVerified("orbit computation requires the axioms to hold");

  std::vector<std::size_t> parent(g.object_count);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t m = 0; m < g.morphism_count(); ++m)
    parent[find(g.source[m])] = find(g.target[m]);

  std::map<std::size_t, std::vector<std::size_t>> by_root;
  for (std::size_t o = 0; o < g.object_count; ++o)
    by_root[find(o)].push_back(o);

  std::vector<std::vector<std::size_t>> out;
  for (auto& [root, members] : by_root) out.push_back(std::move(members));
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  return out;
}

/// Groupoid with exactly one morphism per ordered pair of objects.
inline FiniteGroupoid make_pair_groupoid(std::size_t objects) {
  FiniteGroupoid g;
  g.object_count = objects;
  auto id_of = [objects](std::size_t a, std::size_t b) {
    return a * objects + b;
  };
  g.source.resize(objects * objects);
  g.target.resize(objects * objects);
  g.inverse.resize(objects * objects);
  g.identity.resize(objects);
  for (std::size_t a = 0; a < objects; ++a) {
    g.identity[a] = id_of(a, a);
    for (std::size_t b = 0; b < objects; ++b) {
      g.source[id_of(a, b)] = a;
      g.target[id_of(a, b)] = b;
      g.inverse[id_of(a, b)] = id_of(b, a);
    }
  }
  for (std::size_t a = 0; a < objects; ++a)
    for (std::size_t b = 0; b < objects; ++b)
      for (std::size_t c = 0; c < objects; ++c)
        g.composition[{id_of(b, c), id_of(a, b)}] = id_of(a, c);
  return g;
}

/// Groupoid whose only morphisms are the identities.
inline FiniteGroupoid make_identity_groupoid(std::size_t objects) {
  FiniteGroupoid g;
  g.object_count = objects;
  g.source.resize(objects);
  g.target.resize(objects);
  g.inverse.resize(objects);
  g.identity.resize(objects);
  for (std::size_t o = 0; o < objects; ++o) {
    g.source[o] = g.target[o] = o;
    g.identity[o] = g.inverse[o] = o;
    g.composition[{o, o}] = o;
  }
  return g;
}

template <int N>
struct ConfigurationGroupoid {
  FiniteGroupoid groupoid;
  // Morphism id → (source config, target config). A morphism's action on its
  // source image is, labelwise, exactly the target configuration, so the
  // ordered pair determines it extensionally.
  std::vector<std::pair<std::size_t, std::size_t>> pairs;

  std::size_t morphism_between(std::size_t from, std::size_t to) const {
    for (std::size_t m = 0; m < pairs.size(); ++m)
      if (pairs[m].first == from && pairs[m].second == to) return m;
    return npos;
  }
};

namespace detail {

template <int N>
double image_scale(const std::vector<Vec<N>>& pts) {
  double diam = 0.0;
  for (std::size_t a = 0; a < pts.size(); ++a)
    for (std::size_t b = a + 1; b < pts.size(); ++b)
      diam = std::max(diam, (pts[a] - pts[b]).norm());
  return std::max(1.0, diam);
}

// Does some witness realize "target = witness ∘ source" labelwise?
template <int N>
bool witnessed_displacement(const std::vector<SpaceDiffeo<N>>& witnesses,
                            const std::vector<Vec<N>>& from,
                            const std::vector<Vec<N>>& to, double tol) {
  const double scale = image_scale<N>(to);
  for (const auto& g : witnesses) {
    double worst = 0.0;
    for (std::size_t x = 0; x < from.size(); ++x)
      worst = std::max(worst, (g.apply(from[x]) - to[x]).norm());
    if (worst <= tol * scale) return true;
  }
  return false;
}

}  // namespace detail

/// Builds Γ over a finite configuration family. Morphisms are extensional:
/// since a displacement from config i to config j must send κ_i(X) to κ_j(X)
/// for every label X, each related ordered pair carries exactly one morphism,
/// and closure under identity, inverse, and composition fills each connected
/// component with all its ordered pairs.
template <int N>
ConfigurationGroupoid<N> configuration_groupoid(
    const PointConfigurationSet<N>& pcs, double tol = kTolRel,
    std::size_t closure_bound = kClosureBound) {
  const std::size_t k = pcs.configs.size();
  ConfigurationGroupoid<N> out;
  out.groupoid.object_count = k;

  std::vector<std::size_t> parent(k);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };

  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i + 1; j < k; ++j) {
      bool related = false;
      if (pcs.group == PointConfigurationSet<N>::Group::Affine) {
        related = find_affine_displacement<N>(pcs.configs[i], pcs.configs[j],
                                              tol)
                      .has_value() &&
                  find_affine_displacement<N>(pcs.configs[j], pcs.configs[i],
                                              tol)
                      .has_value();
      } else {
        related = detail::witnessed_displacement<N>(
                      pcs.explicit_group, pcs.configs[i], pcs.configs[j],
                      tol) ||
                  detail::witnessed_displacement<N>(
                      pcs.explicit_group, pcs.configs[j], pcs.configs[i], tol);
      }
      if (related) parent[find(i)] = find(j);
    }

  std::map<std::size_t, std::vector<std::size_t>> components;
  for (std::size_t i = 0; i < k; ++i) components[find(i)].push_back(i);

  std::size_t morphisms = 0;
  for (const auto& [root, members] : components)
    morphisms += members.size() * members.size();
  if (morphisms > closure_bound)
    throw ClosureExplosion("closure needs " + std::to_string(morphisms) +
                           " morphisms, bound is " +
                           std::to_string(closure_bound));

  std::map<std::pair<std::size_t, std::size_t>, std::size_t> id_of;
  for (const auto& [root, members] : components)
    for (std::size_t a : members)
      for (std::size_t b : members) {
        // components iterate by root = lowest member, so ids are deterministic
        const std::size_t m = out.pairs.size();
        id_of[{a, b}] = m;
        out.pairs.emplace_back(a, b);
        out.groupoid.source.push_back(a);
        out.groupoid.target.push_back(b);
      }

  out.groupoid.identity.resize(k);
  out.groupoid.inverse.resize(out.pairs.size());
  for (const auto& [pair, m] : id_of) {
    out.groupoid.inverse[m] = id_of[{pair.second, pair.first}];
    if (pair.first == pair.second) out.groupoid.identity[pair.first] = m;
  }
  for (const auto& [root, members] : components)
    for (std::size_t a : members)
      for (std::size_t b : members)
        for (std::size_t c : members)
          out.groupoid.composition[{id_of[{b, c}], id_of[{a, b}]}] =
              id_of[{a, c}];
  return out;
}

/// Disjoint union of the configs' images. Image points are deduped per config
/// at tol scaled by that image's diameter, keeping first-appearance order.
template <int N>
struct PlacedPointSet {
  struct Element {
    std::size_t config;
    std::size_t point;  // index into images[config]
  };

  std::vector<std::vector<Vec<N>>> images;
  std::vector<Element> elements;
  // Per config and protobody label: which deduped image point the label hits.
  std::vector<std::vector<std::size_t>> label_to_point;

  std::size_t element_id(std::size_t config, std::size_t point) const {
    std::size_t id = 0;
    for (std::size_t c = 0; c < config; ++c) id += images[c].size();
    return id + point;
  }
};

template <int N>
PlacedPointSet<N> placed_point_set(const PointConfigurationSet<N>& pcs,
                                   double tol = kTolRel) {
  PlacedPointSet<N> out;
  for (const auto& cfg : pcs.configs) {
    const double scale = detail::image_scale<N>(cfg);
    std::vector<Vec<N>> image;
    std::vector<std::size_t> labels;
    for (const auto& p : cfg) {
      std::size_t hit = npos;
      for (std::size_t q = 0; q < image.size(); ++q)
        if ((image[q] - p).norm() <= tol * scale) {
          hit = q;
          break;
        }
      if (hit == npos) {
        hit = image.size();
        image.push_back(p);
      }
      labels.push_back(hit);
    }
    out.images.push_back(std::move(image));
    out.label_to_point.push_back(std::move(labels));
  }
  for (std::size_t c = 0; c < out.images.size(); ++c)
    for (std::size_t p = 0; p < out.images[c].size(); ++p)
      out.elements.push_back({c, p});
  return out;
}

/// Orbit space of the placed points under the witnessed displacements:
/// the finite model of the body, one point per orbit.
template <int N>
struct BodyPoints {
  PlacedPointSet<N> points;
  std::vector<std::vector<std::size_t>> orbits;  // element ids, deterministic
  // Per config: image-point index → orbit index. When bijections_verified,
  // this is the per-config bijection between the image and the orbit list.
  std::vector<std::vector<std::size_t>> point_to_orbit;
  bool bijections_verified = false;

  std::size_t size() const { return orbits.size(); }
};

/// Quotients the disjoint union by the witnessed identifications. witness
/// must be a full matrix: witness[i][j] maps config i's image onto config
/// j's; diagonal entries are ignored. Throws WitnessInconsistency when a
/// mapped point misses every image point of the target config.
template <int N>
BodyPoints<N> body_points(const PointConfigurationSet<N>& pcs,
                          const std::vector<std::vector<SpaceDiffeo<N>>>& witness,
                          double tol = kTolRel) {
  const std::size_t k = pcs.configs.size();
  if (witness.size() != k)
    throw BodyMismatch("witness matrix needs one row per configuration");
  for (const auto& row : witness)
    if (row.size() != k)
      throw BodyMismatch("witness matrix needs one column per configuration");

  BodyPoints<N> out;
  out.points = placed_point_set<N>(pcs, tol);
  const auto& images = out.points.images;

  std::size_t total = 0;
  for (const auto& img : images) total += img.size();
  std::vector<std::size_t> parent(total);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };

  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) {
      if (i == j) continue;
      const double scale = detail::image_scale<N>(pcs.configs[j]);
      for (std::size_t p = 0; p < images[i].size(); ++p) {
        const Vec<N> mapped = witness[i][j].apply(images[i][p]);
        std::size_t hit = npos;
        for (std::size_t q = 0; q < images[j].size(); ++q)
          if ((images[j][q] - mapped).norm() <= tol * scale) {
            hit = q;
            break;
          }
        if (hit == npos)
          throw WitnessInconsistency(
              "witness sends an image point of configuration " +
              std::to_string(i) + " outside the image of configuration " +
              std::to_string(j));
        parent[find(out.points.element_id(i, p))] =
            find(out.points.element_id(j, hit));
      }
    }

  std::map<std::size_t, std::vector<std::size_t>> by_root;
  for (std::size_t e = 0; e < total; ++e) by_root[find(e)].push_back(e);
  std::vector<std::vector<std::size_t>> orbit_list;
  for (auto& [root, members] : by_root) {
    std::sort(members.begin(), members.end());
    orbit_list.push_back(std::move(members));
  }
  std::sort(orbit_list.begin(), orbit_list.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  out.orbits = std::move(orbit_list);

  std::vector<std::size_t> orbit_of(total, npos);
  for (std::size_t o = 0; o < out.orbits.size(); ++o)
    for (std::size_t e : out.orbits[o]) orbit_of[e] = o;
  for (std::size_t c = 0; c < k; ++c) {
    std::vector<std::size_t> row;
    for (std::size_t p = 0; p < images[c].size(); ++p)
      row.push_back(orbit_of[out.points.element_id(c, p)]);
    out.point_to_orbit.push_back(std::move(row));
  }

  out.bijections_verified = true;
  for (std::size_t c = 0; c < k && out.bijections_verified; ++c) {
    std::vector<std::size_t> hits(out.orbits.size(), 0);
    for (std::size_t o : out.point_to_orbit[c]) ++hits[o];
    for (std::size_t count : hits)
      if (count != 1) {
        out.bijections_verified = false;
        break;
      }
  }
  return out;
}

}  // namespace anelkin
