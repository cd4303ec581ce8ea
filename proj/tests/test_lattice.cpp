#include "anelkin/lattice.hpp"

#include <catch2/catch_amalgamated.hpp>

#include "support.hpp"

using namespace anelkin;
using testsupport::Rng;

namespace {

constexpr double kPhi = 1.6180339887498949;

// Counterclockwise rectangle of unit grid steps: every segment is one mesh
// edge, so circulations telescope through vertex values.
std::vector<Vec<2>> perimeter_ring(std::size_t i0, std::size_t j0,
                                   std::size_t i1, std::size_t j1,
                                   double h = 1.0) {
  std::vector<Vec<2>> loop;
  for (std::size_t i = i0; i < i1; ++i) loop.push_back(Vec<2>{i * h, j0 * h});
  for (std::size_t j = j0; j < j1; ++j) loop.push_back(Vec<2>{i1 * h, j * h});
  for (std::size_t i = i1; i > i0; --i) loop.push_back(Vec<2>{i * h, j1 * h});
  for (std::size_t j = j1; j > j0; --j) loop.push_back(Vec<2>{i0 * h, j * h});
  loop.push_back(Vec<2>{i0 * h, j0 * h});
  return loop;
}

Vec<2> grid_nudge(double h = 1.0) {
  return Vec<2>{1e-7 * h, 1.41421356e-7 * h};
}

DislocationSpec edge_spec_32() {
  DislocationSpec spec;
  spec.nx = spec.ny = 32;
  spec.h = 1.0;
  spec.core = Vec<2>{16.3, 16.2};
  spec.burgers = Vec<2>{1.0, 0.0};
  return spec;
}

std::vector<double> spacings(const std::vector<Eigen::VectorXd>& pts) {
  std::vector<double> out;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i)
    out.push_back(pts[i + 1](0) - pts[i](0));
  return out;
}

}  // namespace

TEST_CASE("grid builders produce the expected cell counts") {
  SimplicialBody<2> g = grid_body_2d(2, 3, 0.5);
  CHECK(g.vertex_count() == 12);
  CHECK(g.cell_count() == 12);
  SimplicialBody<3> k = kuhn_body_3d(1, 1, 1);
  CHECK(k.vertex_count() == 8);
  CHECK(k.cell_count() == 6);
}

TEST_CASE("puncturing removes one cell and orphaned vertices") {
  SECTION("interior cell keeps every vertex") {
    SimplicialBody<2> g = grid_body_2d(3, 3);
    auto p = puncture<2>(g, 8);  // a cell of the middle square
    CHECK(p.body->cell_count() == 17);
    CHECK(p.body->vertex_count() == 16);
    for (std::size_t v = 0; v < 16; ++v) CHECK(p.vertex_map[v] == v);
  }
  SECTION("corner cell drops its private vertex") {
    SimplicialBody<2> g = grid_body_2d(1, 1);
    auto p = puncture<2>(g, 0);  // lower triangle owns vertex (1,0) alone
    CHECK(p.body->cell_count() == 1);
    CHECK(p.body->vertex_count() == 3);
    CHECK(p.vertex_map[1] == npos);
  }
  SECTION("bad cell index") {
    SimplicialBody<2> g = grid_body_2d(2, 2);
    CHECK_THROWS_AS(puncture<2>(g, 99), MeshError);
  }
}

TEST_CASE("dislocation spec validation") {
  DislocationSpec spec = edge_spec_32();

  SECTION("grid too coarse") {
    spec.nx = 4;
    CHECK_THROWS_AS(make_dislocated(spec), Error);
  }
  SECTION("zero Burgers vector") {
    spec.burgers = Vec<2>::Zero();
    CHECK_THROWS_AS(make_dislocated(spec), Error);
  }
  SECTION("core on a grid line") {
    spec.core = Vec<2>{16.0, 16.5};
    CHECK_THROWS_AS(make_dislocated(spec), CoreOnFacet);
  }
  SECTION("core on a diagonal facet") {
    spec.core = Vec<2>{16.25, 16.25};
    CHECK_THROWS_AS(make_dislocated(spec), CoreOnFacet);
  }
  SECTION("core outside the grid") {
    spec.core = Vec<2>{-1.0, -1.0};
    CHECK_THROWS_AS(make_dislocated(spec), Error);
  }
}

TEST_CASE("core-enclosing circuits recover the Burgers vector") {
  DislocatedCrystal d = make_dislocated(edge_spec_32());
  const SimplicialBody<2>& body = *d.config.body();
  CHECK(d.mesh.body->cell_count() == 2 * 32 * 32 - 1);

  const Vec<2> delta = grid_nudge();
  SECTION("radius-10 ring hits b to roundoff") {
    Vec<2> circ = burgers_circuit<2>(body, d.config.field(),
                                     nudged(perimeter_ring(6, 6, 27, 27), delta));
    CHECK((circ - d.burgers_physical).norm() <= 1e-10);
    CHECK((circ - d.burgers_physical).norm() <= 0.05 * d.burgers_physical.norm());
  }
  SECTION("tight ring agrees with a wide ring") {
    Vec<2> inner = burgers_circuit<2>(
        body, d.config.field(), nudged(perimeter_ring(12, 12, 21, 21), delta));
    Vec<2> outer = burgers_circuit<2>(
        body, d.config.field(), nudged(perimeter_ring(2, 2, 31, 31), delta));
    CHECK((inner - outer).norm() <= 1e-6 * d.burgers_physical.norm());
  }
  SECTION("non-enclosing ring sees only roundoff") {
    Vec<2> circ = burgers_circuit<2>(body, d.config.field(),
                                     nudged(perimeter_ring(1, 1, 6, 6), delta));
    CHECK(circ.norm() <= 1e-3 * d.burgers_physical.norm());
    CHECK(circ.norm() <= 1e-10);
  }
  SECTION("two loops sharing a side add up to their union") {
    Vec<2> left = burgers_circuit<2>(body, d.config.field(),
                                     nudged(perimeter_ring(6, 6, 16, 27), delta));
    Vec<2> right = burgers_circuit<2>(
        body, d.config.field(), nudged(perimeter_ring(16, 6, 27, 27), delta));
    Vec<2> whole = burgers_circuit<2>(
        body, d.config.field(), nudged(perimeter_ring(6, 6, 27, 27), delta));
    CHECK((left + right - whole).norm() <= 1e-12);
  }
  SECTION("vertex chords without a nudge hit facets") {
    CHECK_THROWS_AS(
        burgers_circuit<2>(body, d.config.field(), perimeter_ring(6, 6, 27, 27)),
        SegmentOnFacet);
  }
  SECTION("segments through the removed cell are outside the body") {
    std::vector<Vec<2>> loop = {Vec<2>{16.1, 16.05}, Vec<2>{16.5, 16.35},
                                Vec<2>{16.1, 16.05}};
    CHECK_THROWS_AS(burgers_circuit<2>(body, d.config.field(), loop),
                    SegmentOutsideBody);
  }
}

TEST_CASE("the dislocated field is not a gradient and the defect sits at the core") {
  DislocatedCrystal d = make_dislocated(edge_spec_32());
  StandaloneField<2> f(d.config.body(), d.config.field());
  auto verdict = field_is_gradient(f);

  CHECK_FALSE(verdict.is_gradient);
  REQUIRE_FALSE(verdict.violations.empty());

  const SimplicialBody<2>& body = *d.config.body();
  double nearest = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < verdict.violations.size(); ++i)
    CHECK(verdict.violations[i - 1].facet < verdict.violations[i].facet);
  for (const auto& v : verdict.violations) {
    Vec<2> mid = Vec<2>::Zero();
    for (std::size_t vert : body.facets()[v.facet].vertices)
      mid += body.vertices()[vert];
    mid /= 2.0;
    nearest = std::min(nearest, (mid - d.core).norm());
  }
  CHECK(nearest <= 4.0);
}

TEST_CASE("the zero-Burgers limit carries no tangential incompatibility") {
  DislocationSpec spec = edge_spec_32();
  spec.burgers = Vec<2>{1e-12, 0.0};
  DislocatedCrystal d = make_dislocated(spec);
  StandaloneField<2> f(d.config.body(), d.config.field());
  CHECK(incompatibility_norm(f) <= 1e-20);
}

TEST_CASE("screw-analogue kind shares the in-plane construction") {
  DislocationSpec spec = edge_spec_32();
  spec.kind = DislocationSpec::Kind::ScrewAnalogue2D;
  DislocatedCrystal d = make_dislocated(spec);
  CHECK(d.kind == DislocationSpec::Kind::ScrewAnalogue2D);
  Vec<2> circ =
      burgers_circuit<2>(*d.config.body(), d.config.field(),
                         nudged(perimeter_ring(6, 6, 27, 27), grid_nudge()));
  CHECK((circ - d.burgers_physical).norm() <= 1e-10);
}

TEST_CASE("circuits vanish on identity and gradient fields") {
  SECTION("identity field, exactly zero") {
    auto body = testsupport::shared_grid_2d(4, 4);
    std::vector<Mat<2>> field(body->cell_count(), Mat<2>::Identity());
    Vec<2> circ = burgers_circuit<2>(
        *body, field, nudged(perimeter_ring(1, 1, 3, 3), grid_nudge()));
    CHECK(circ.norm() == 0.0);
  }
  SECTION("tangent field of a warped placement") {
    Rng rng(7);
    auto body = testsupport::shared_grid_2d(5, 5);
    Configuration<2> c = holonomic_configuration<2>(
        body, testsupport::random_base<2>(*body, rng));
    Vec<2> circ = burgers_circuit<2>(
        *body, c.field(), nudged(perimeter_ring(1, 1, 4, 4), grid_nudge()));
    CHECK(circ.norm() <= 1e-9);
  }
  SECTION("loop inside a single cell, any field") {
    DislocatedCrystal d = make_dislocated(edge_spec_32());
    std::vector<Vec<2>> loop = {Vec<2>{3.1, 3.05}, Vec<2>{3.6, 3.15},
                                Vec<2>{3.3, 3.25}, Vec<2>{3.1, 3.05}};
    Vec<2> circ = burgers_circuit<2>(*d.config.body(), d.config.field(), loop);
    CHECK(circ.norm() <= 1e-15);
  }
  SECTION("a 3d loop inside one tetrahedron") {
    auto body = testsupport::shared_kuhn_3d(2, 2, 2);
    std::vector<Mat<3>> field(body->cell_count(), Mat<3>::Identity());
    std::vector<Vec<3>> loop = {Vec<3>{0.30, 0.20, 0.10},
                                Vec<3>{0.35, 0.22, 0.12},
                                Vec<3>{0.32, 0.25, 0.11},
                                Vec<3>{0.30, 0.20, 0.10}};
    CHECK(burgers_circuit<3>(*body, field, loop).norm() == 0.0);
  }
}

TEST_CASE("circuit input validation") {
  auto body = testsupport::shared_grid_2d(3, 3);
  std::vector<Mat<2>> field(body->cell_count(), Mat<2>::Identity());

  SECTION("open loop") {
    std::vector<Vec<2>> loop = {Vec<2>{0.2, 0.2}, Vec<2>{1.2, 0.3},
                                Vec<2>{1.3, 1.4}};
    CHECK_THROWS_AS(burgers_circuit<2>(*body, field, loop), Error);
  }
  SECTION("field length mismatch") {
    std::vector<Mat<2>> bad(3, Mat<2>::Identity());
    CHECK_THROWS_AS(
        burgers_circuit<2>(*body, bad, nudged(perimeter_ring(0, 0, 2, 2), grid_nudge())),
        BodyMismatch);
  }
  SECTION("vertex ring helper") {
    auto ring = vertex_ring<2>(*body, {0, 1, 5, 4, 0});
    CHECK(ring.size() == 5);
    CHECK((ring.front() - ring.back()).norm() == 0.0);
    CHECK_THROWS_AS(vertex_ring<2>(*body, {0, 1, 5}), Error);
    CHECK_THROWS_AS(vertex_ring<2>(*body, {0, 99, 0}), MeshError);
  }
}

TEST_CASE("fibonacci chain from the canonical golden-slope strip") {
  Eigen::MatrixXd frame(2, 1);
  frame << kPhi, 1.0;
  auto [wlo, whi] = canonical_window_1d(frame);
  CHECK(std::abs(wlo + 0.8506508083520399) <= 1e-12);
  CHECK(std::abs(whi - 0.5257311121191336) <= 1e-12);

  CutProjectSpec spec;
  spec.physical_dim = 1;
  spec.parallel_frame = frame;
  spec.window_lo = Eigen::VectorXd::Constant(1, wlo);
  spec.window_hi = Eigen::VectorXd::Constant(1, whi);
  spec.extent_lo = Eigen::VectorXd::Constant(1, 0.0);
  spec.extent_hi = Eigen::VectorXd::Constant(1, 7300.0);
  spec.count_bound = 20000;

  auto pts = cut_and_project(spec);
  REQUIRE(pts.size() >= 10000);
  for (std::size_t i = 0; i + 1 < pts.size(); ++i)
    REQUIRE(pts[i](0) < pts[i + 1](0));

  auto gaps = spacings(pts);
  const double lo = *std::min_element(gaps.begin(), gaps.end());
  const double hi = *std::max_element(gaps.begin(), gaps.end());
  const double split = 0.5 * (lo + hi);
  std::size_t longs = 0, shorts = 0;
  std::string word;
  for (double g : gaps) {
    const bool is_long = g > split;
    CHECK(std::abs(g - (is_long ? hi : lo)) <= 1e-9);
    word.push_back(is_long ? 'L' : 'S');
    (is_long ? longs : shorts) += 1;
  }
  CHECK(std::abs(hi / lo - kPhi) <= 1e-9);
  const double count_ratio = double(longs) / double(shorts);
  CHECK(std::abs(count_ratio - kPhi) <= 0.01 * kPhi);
  CHECK(word.find("SS") == std::string::npos);
  CHECK(word.find("LLL") == std::string::npos);
}

TEST_CASE("rational slope one-half projects to a period-three chain") {
  Eigen::MatrixXd frame(2, 1);
  frame << 2.0, 1.0;
  auto [wlo, whi] = canonical_window_1d(frame);

  CutProjectSpec spec;
  spec.physical_dim = 1;
  spec.parallel_frame = frame;
  spec.window_lo = Eigen::VectorXd::Constant(1, wlo);
  spec.window_hi = Eigen::VectorXd::Constant(1, whi);
  spec.extent_lo = Eigen::VectorXd::Constant(1, 0.0);
  spec.extent_hi = Eigen::VectorXd::Constant(1, 400.0);

  auto pts = cut_and_project(spec);
  REQUIRE(pts.size() >= 100);
  auto gaps = spacings(pts);
  const double unit = 1.0 / std::sqrt(5.0);
  for (double g : gaps)
    CHECK((std::abs(g - unit) <= 1e-9 || std::abs(g - 2.0 * unit) <= 1e-9));
  for (std::size_t i = 0; i + 3 < gaps.size(); ++i)
    CHECK(std::abs(gaps[i] - gaps[i + 3]) <= 1e-9);
  CHECK(std::abs(*std::min_element(gaps.begin(), gaps.end()) - unit) <= 1e-9);
  CHECK(std::abs(*std::max_element(gaps.begin(), gaps.end()) - 2.0 * unit) <=
        1e-9);
}

TEST_CASE("cut-and-project guard rails") {
  Eigen::MatrixXd frame(2, 1);
  frame << kPhi, 1.0;
  CutProjectSpec spec;
  spec.physical_dim = 1;
  spec.parallel_frame = frame;
  spec.window_lo = Eigen::VectorXd::Constant(1, -0.5);
  spec.window_hi = Eigen::VectorXd::Constant(1, 0.5);
  spec.extent_lo = Eigen::VectorXd::Constant(1, 0.0);
  spec.extent_hi = Eigen::VectorXd::Constant(1, 50.0);

  SECTION("empty window") {
    spec.window_hi(0) = spec.window_lo(0);
    CHECK(cut_and_project(spec).empty());
  }
  SECTION("unbounded window") {
    spec.window_hi(0) = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(cut_and_project(spec), WindowUnbounded);
  }
  SECTION("degenerate frame") {
    spec.parallel_frame = Eigen::MatrixXd::Zero(2, 1);
    CHECK_THROWS_AS(cut_and_project(spec), DegenerateFrame);
  }
  SECTION("count bound") {
    spec.extent_hi(0) = 5000.0;
    spec.count_bound = 10;
    CHECK_THROWS_AS(cut_and_project(spec), Error);
  }
  SECTION("density grows with the window") {
    auto count_for = [&](double lo, double hi) {
      CutProjectSpec s = spec;
      s.window_lo(0) = lo;
      s.window_hi(0) = hi;
      return cut_and_project(s).size();
    };
    const std::size_t narrow = count_for(-0.10, 0.10);
    const std::size_t mid = count_for(-0.35, 0.35);
    const std::size_t wide = count_for(-0.80, 0.52);
    CHECK(narrow <= mid);
    CHECK(mid <= wide);
    CHECK(narrow < wide);
  }
  SECTION("two runs agree bitwise") {
    auto a = cut_and_project(spec);
    auto b = cut_and_project(spec);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
  }
}

TEST_CASE("a four-dimensional strip projects deterministically") {
  Eigen::MatrixXd frame(4, 2);
  frame << 1.0, 0.0, 0.0, 1.0, 0.3, 0.0, 0.0, 0.7;
  CutProjectSpec spec;
  spec.physical_dim = 2;
  spec.parallel_frame = frame;
  spec.window_lo = Eigen::VectorXd::Constant(2, -0.8);
  spec.window_hi = Eigen::VectorXd::Constant(2, 0.8);
  spec.extent_lo = Eigen::VectorXd::Constant(2, -3.0);
  spec.extent_hi = Eigen::VectorXd::Constant(2, 3.0);

  auto pts = cut_and_project(spec);
  REQUIRE(!pts.empty());
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const bool ordered = pts[i](0) < pts[i + 1](0) ||
                         (pts[i](0) == pts[i + 1](0) &&
                          pts[i](1) < pts[i + 1](1));
    CHECK(ordered);
  }
  auto again = cut_and_project(spec);
  REQUIRE(again.size() == pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) CHECK(again[i] == pts[i]);
}

TEST_CASE("burgers splitting projects onto the two subspaces") {
  SECTION("vector inside the physical subspace") {
    Eigen::MatrixXd frame(2, 1);
    frame << 1.0, 0.0;
    Eigen::VectorXd b(2);
    b << 2.0, 0.0;
    auto split = split_burgers(b, frame);
    CHECK(std::abs(split.parallel(0) - 2.0) <= 1e-14);
    CHECK(std::abs(split.perpendicular(0)) <= 1e-14);
  }
  SECTION("vector inside the complement") {
    Eigen::MatrixXd frame(2, 1);
    frame << 1.0, 0.0;
    Eigen::VectorXd b(2);
    b << 0.0, 3.0;
    auto split = split_burgers(b, frame);
    CHECK(std::abs(split.parallel(0)) <= 1e-14);
    CHECK(std::abs(split.perpendicular(0) - 3.0) <= 1e-14);
  }
  SECTION("the mixed hand-worked example") {
    Eigen::MatrixXd frame(2, 1);
    frame << 1.0, 0.0;
    Eigen::VectorXd b(2);
    b << 1.0, 1.0;
    auto split = split_burgers(b, frame);
    CHECK(std::abs(split.parallel(0) - 1.0) <= 1e-14);
    CHECK(std::abs(split.perpendicular(0) - 1.0) <= 1e-14);
  }
  SECTION("random four-dimensional reconstruction") {
    Rng rng(9);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int trial = 0; trial < 5; ++trial) {
      Eigen::MatrixXd frame(4, 2);
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 2; ++j) frame(i, j) = gauss(rng);
      Eigen::VectorXd b(4);
      for (int i = 0; i < 4; ++i) b(i) = gauss(rng);

      auto frames = orthonormal_frames(frame);
      auto split = split_burgers(b, frame);
      Eigen::VectorXd rebuilt = frames.parallel * split.parallel +
                                frames.perpendicular * split.perpendicular;
      CHECK((rebuilt - b).norm() <= 1e-14 * std::max(1.0, b.norm()));
    }
  }
  SECTION("degenerate frames are rejected") {
    Eigen::MatrixXd frame(4, 2);
    frame << 1.0, 2.0, 1.0, 2.0, 0.0, 0.0, 0.0, 0.0;
    Eigen::VectorXd b = Eigen::VectorXd::Ones(4);
    CHECK_THROWS_AS(split_burgers(b, frame), DegenerateFrame);
    Eigen::MatrixXd good(2, 1);
    good << 1.0, 1.0;
    Eigen::VectorXd wrong = Eigen::VectorXd::Ones(3);
    CHECK_THROWS_AS(split_burgers(wrong, good), DegenerateFrame);
  }
}
