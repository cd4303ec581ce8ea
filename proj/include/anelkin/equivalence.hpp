#pragma once

#include <algorithm>
#include <optional>
#include <vector>

#include "anelkin/decomposition.hpp"

namespace anelkin {

/// Affine point-map fit. `degenerate` marks a rank-deficient correspondence;
/// the stored map is then the minimum-norm solution and det(a) is unchecked.
template <int N>
struct AffineDisplacement {
  Mat<N> a;
  Vec<N> c;
  bool degenerate = false;

  Vec<N> apply(const Vec<N>& p) const { return a * p + c; }
};

/// Least-squares affine map sending from[i] to to[i].
/// Returns a value only when the max pointwise residual is at most
/// tol * max(1, largest |to| coordinate norm), and, on the full-rank path,
/// det > 0. Rank-deficient inputs that still fit yield the minimum-norm
/// solution flagged degenerate.
template <int N>
std::optional<AffineDisplacement<N>> find_affine_displacement(
    const std::vector<Vec<N>>& from, const std::vector<Vec<N>>& to,
    double tol = kTolRel) {
  if (from.size() != to.size())
    throw BodyMismatch("affine fit: point lists have different lengths");
  if (from.empty())
    throw BodyMismatch("affine fit: empty correspondence");

  const auto k = static_cast<Eigen::Index>(from.size());
  Eigen::MatrixXd design(k, N + 1);
  Eigen::MatrixXd rhs(k, N);
  for (Eigen::Index i = 0; i < k; ++i) {
    design.block(i, 0, 1, N) = from[static_cast<std::size_t>(i)].transpose();
    design(i, N) = 1.0;
    rhs.row(i) = to[static_cast<std::size_t>(i)].transpose();
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(design,
                                        Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd.setThreshold(1e-9);
  const Eigen::MatrixXd theta = svd.solve(rhs);  // (N+1) x N, minimum-norm

  AffineDisplacement<N> out;
  out.a = theta.topRows(N).transpose();
  out.c = theta.row(N).transpose();
  out.degenerate = svd.rank() < N + 1;

  double scale = 1.0;
  double residual = 0.0;
  for (std::size_t i = 0; i < from.size(); ++i) {
    scale = std::max(scale, to[i].norm());
    residual = std::max(residual, (out.apply(from[i]) - to[i]).norm());
  }
  if (residual > tol * scale) return std::nullopt;
  if (!out.degenerate && out.a.determinant() <= 0.0) return std::nullopt;
  return out;
}

/// Two configurations over one body are compatible exactly when their
/// canonical per-cell invariants agree.
template <int N>
bool are_compatible(const Configuration<N>& c1, const Configuration<N>& c2,
                    double tol = kTolClass) {
  if (!same_body<N>(c1.body(), c2.body()))
    throw BodyMismatch("compatibility test needs a shared body");
  const Embodiment<N> e1 = embodiment_of(c1);
  const Embodiment<N> e2 = embodiment_of(c2);
  for (std::size_t cell = 0; cell < e1.size(); ++cell)
    if (rel_diff<N>(e1[cell], e2[cell]) > tol) return false;
  return true;
}

/// Greedy orbit partition. Classes are keyed by their lowest input index and
/// returned sorted by it; members are ascending. Uses the per-cell invariant
/// once per configuration, so each membership test is one cellwise sweep.
template <int N>
std::vector<std::vector<std::size_t>> partition_into_embodiments(
    const std::vector<Configuration<N>>& configs, double tol = kTolClass) {
  std::vector<std::vector<std::size_t>> classes;
  if (configs.empty()) return classes;

  for (std::size_t i = 1; i < configs.size(); ++i)
    if (!same_body<N>(configs[0].body(), configs[i].body()))
      throw BodyMismatch("partition needs all configurations over one body");

  std::vector<Embodiment<N>> inv;
  inv.reserve(configs.size());
  for (const auto& c : configs) inv.push_back(embodiment_of(c));

  auto matches = [&](std::size_t a, std::size_t b) {
    for (std::size_t cell = 0; cell < inv[a].size(); ++cell)
      if (rel_diff<N>(inv[a][cell], inv[b][cell]) > tol) return false;
    return true;
  };

  for (std::size_t i = 0; i < configs.size(); ++i) {
    bool placed = false;
    for (auto& cls : classes) {
      if (matches(cls.front(), i)) {
        cls.push_back(i);
        placed = true;
        break;
      }
    }
    if (!placed) classes.push_back({i});
  }
  return classes;
}

/// Per-class witness relating a class's base map to the base of class 0.
template <int N>
struct BaseWitness {
  std::size_t class_index = 0;
  bool affine_witness = false;   // displacement below is meaningful
  bool bases_agree = false;      // base vertex positions coincide
  AffineDisplacement<N> displacement;  // identity when bases_agree
};

/// All classes project to the one base embodiment; the report carries the
/// witnesses that substantiate it where an affine one is constructible.
template <int N>
struct BaseEmbodimentReport {
  std::size_t class_count = 0;
  std::size_t image_cardinality = 0;  // 1 whenever any class exists
  bool fibers_differ_bases_agree = false;
  std::vector<BaseWitness<N>> witnesses;
};

template <int N>
BaseEmbodimentReport<N> base_embodiment_map(
    const std::vector<Configuration<N>>& configs,
    const std::vector<std::vector<std::size_t>>& classes, double tol = kTolRel) {
  BaseEmbodimentReport<N> report;
  report.class_count = classes.size();
  report.image_cardinality = classes.empty() ? 0 : 1;
  if (classes.empty()) return report;

  const auto& base0 = configs[classes[0].front()].base();
  double scale = 1.0;
  for (const auto& p : base0) scale = std::max(scale, p.norm());

  bool all_agree = true;
  for (std::size_t k = 0; k < classes.size(); ++k) {
    const auto& basek = configs[classes[k].front()].base();
    BaseWitness<N> w;
    w.class_index = k;

    double gap = 0.0;
    for (std::size_t v = 0; v < base0.size(); ++v)
      gap = std::max(gap, (basek[v] - base0[v]).norm());
    w.bases_agree = gap <= tol * scale;

    if (w.bases_agree) {
      w.affine_witness = true;
      w.displacement.a = Mat<N>::Identity();
      w.displacement.c = Vec<N>::Zero();
    } else if (auto fit = find_affine_displacement<N>(base0, basek, tol)) {
      w.affine_witness = true;
      w.displacement = *fit;
    }
    // else: bases relate only through a non-affine map; witness not constructed.

    all_agree = all_agree && w.bases_agree;
    report.witnesses.push_back(w);
  }
  report.fibers_differ_bases_agree = classes.size() >= 2 && all_agree;
  return report;
}

enum class ReferenceChooser { LowestIndex, Provided };

/// One chosen representative configuration per class.
template <int N>
struct ReferenceSystem {
  std::vector<std::vector<std::size_t>> classes;
  std::vector<std::size_t> representative;  // parallel to classes
};

template <int N>
ReferenceSystem<N> assign_references(
    const std::vector<Configuration<N>>& configs,
    const std::vector<std::vector<std::size_t>>& classes,
    ReferenceChooser chooser = ReferenceChooser::LowestIndex,
    const std::vector<std::size_t>& provided = {}) {
  ReferenceSystem<N> system;
  system.classes = classes;
  system.representative.reserve(classes.size());

  if (chooser == ReferenceChooser::LowestIndex) {
    for (const auto& cls : classes)
      system.representative.push_back(
          *std::min_element(cls.begin(), cls.end()));
    return system;
  }

  if (provided.size() != classes.size())
    throw ProvidedRepresentativeNotInClass(
        "expected one provided representative per class");
  for (std::size_t k = 0; k < classes.size(); ++k) {
    if (provided[k] >= configs.size() ||
        std::find(classes[k].begin(), classes[k].end(), provided[k]) ==
            classes[k].end())
      throw ProvidedRepresentativeNotInClass(
          "provided representative " + std::to_string(provided[k]) +
          " is not a member of class " + std::to_string(k));
    system.representative.push_back(provided[k]);
  }
  return system;
}

/// Displacement from a member's reference configuration to the member,
/// when an orientation-preserving affine one exists: the fit comes from the
/// base vertex correspondence and is then checked against the whole
/// configuration (base and fiber field) under push-forward.
template <int N>
std::optional<AffineDisplacement<N>> reference_displacement(
    const std::vector<Configuration<N>>& configs,
    const ReferenceSystem<N>& system, std::size_t member,
    double tol = kTolClass) {
  std::size_t cls = system.classes.size();
  for (std::size_t k = 0; k < system.classes.size(); ++k)
    if (std::find(system.classes[k].begin(), system.classes[k].end(),
                  member) != system.classes[k].end()) {
      cls = k;
      break;
    }
  if (cls == system.classes.size())
    throw ProvidedRepresentativeNotInClass(
        "member " + std::to_string(member) + " belongs to no class");

  const Configuration<N>& ref = configs[system.representative[cls]];
  const Configuration<N>& tgt = configs[member];

  auto fit = find_affine_displacement<N>(ref.base(), tgt.base(), tol);
  if (!fit) return std::nullopt;
  if (fit->a.determinant() <= 0.0) return std::nullopt;

  const Configuration<N> pushed =
      push_forward(ref, SpaceDiffeo<N>::affine(fit->a, fit->c));
  double scale = 1.0;
  for (const auto& p : tgt.base()) scale = std::max(scale, p.norm());
  for (std::size_t v = 0; v < tgt.base().size(); ++v)
    if ((pushed.base()[v] - tgt.base()[v]).norm() > tol * scale)
      return std::nullopt;
  for (std::size_t cell = 0; cell < tgt.field().size(); ++cell)
    if (rel_diff<N>(pushed.field()[cell], tgt.field()[cell]) > tol)
      return std::nullopt;
  return fit;
}

/// Finite protobody placed into space by several point maps; injectivity is
/// deliberately not required. The group acting is either the affine group or
/// an explicit list of space maps.
template <int N>
struct PointConfigurationSet {
  enum class Group { Affine, Explicit };

  std::size_t protobody_size = 0;
  std::vector<std::vector<Vec<N>>> configs;
  Group group = Group::Affine;
  std::vector<SpaceDiffeo<N>> explicit_group;

  PointConfigurationSet(std::size_t protobody, std::vector<std::vector<Vec<N>>> maps)
      : protobody_size(protobody), configs(std::move(maps)) {
    for (const auto& m : configs)
      if (m.size() != protobody_size)
        throw BodyMismatch("point configuration not defined on the full protobody");
  }
};

}  // namespace anelkin
