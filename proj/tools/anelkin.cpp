// anelkin: discrete bundle-morphism toolkit over simplicial bodies.
// Exit codes: 0 success or compatible verdict, 2 well-formed but negative
// verdict, 1 any error. All numeric output uses 17 significant digits so
// repeated runs produce identical bytes.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "anelkin/core.hpp"
#include "anelkin/decomposition.hpp"
#include "anelkin/document.hpp"
#include "anelkin/equivalence.hpp"
#include "anelkin/groupoid.hpp"
#include "anelkin/lattice.hpp"
#include "anelkin/svg.hpp"

namespace {

using namespace anelkin;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << content;
  if (!out) throw Error("write failed for " + path);
}

std::vector<double> parse_doubles(const std::string& text, const char* what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      while (used < item.size() && std::isspace(unsigned(item[used]))) ++used;
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error(std::string(what) + ": cannot parse number \"" + item + "\"");
    }
  }
  if (out.empty()) throw Error(std::string(what) + ": empty list");
  return out;
}

std::vector<std::size_t> parse_indices(const std::string& text, const char* what) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const long long v = std::stoll(item, &used);
      if (used != item.size() || v < 0) throw std::invalid_argument(item);
      out.push_back(std::size_t(v));
    } catch (const std::exception&) {
      throw Error(std::string(what) + ": cannot parse index \"" + item + "\"");
    }
  }
  if (out.empty()) throw Error(std::string(what) + ": empty list");
  return out;
}

Eigen::MatrixXd parse_matrix_rows(const std::string& text, const char* what) {
  std::vector<std::vector<double>> rows;
  std::stringstream ss(text);
  std::string row;
  while (std::getline(ss, row, ';')) rows.push_back(parse_doubles(row, what));
  if (rows.empty()) throw Error(std::string(what) + ": empty matrix");
  Eigen::MatrixXd m(rows.size(), rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows[0].size())
      throw Error(std::string(what) + ": ragged rows");
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
  }
  return m;
}

struct Globals {
  std::string config_path;
  std::optional<double> tol;
  std::optional<std::uint64_t> seed;
};

RunConfig load_config(const Globals& g) {
  RunConfig c;
  std::string path = g.config_path;
  if (path.empty()) {
    if (const char* env = std::getenv("ANELKIN_CONFIG"); env && *env) path = env;
  }
  if (!path.empty()) c = parse_run_config(read_file(path));
  if (g.tol) {
    if (!(*g.tol > 0.0)) throw Error("--tol must be positive");
    c.tol_rel = *g.tol;
  }
  if (g.seed) c.rng_seed = *g.seed;
  return c;
}

void print_header(const RunConfig& c) {
  std::cout << "anelkin " << kVersion << "\n"
            << "config tol_rel=" << format_double(c.tol_rel)
            << " tol_decomp=" << format_double(c.tol_decomp)
            << " closure_bound=" << c.closure_bound
            << " rng_seed=" << c.rng_seed << "\n";
}

template <int N>
Vec<N> loop_nudge(const SimplicialBody<N>& body) {
  // Irrational direction: keeps segment midpoints off facets without moving
  // the circuit value (the loop stays closed, so the shift cancels).
  const double s = std::max(1.0, body.diameter());
  Vec<N> d;
  d(0) = 1e-7 * s;
  d(1) = 1.41421356e-7 * s;
  if constexpr (N == 3) d(2) = 1.7320508e-7 * s;
  return d;
}

template <int N>
int run_check(const MeshFieldDocument& doc, const RunConfig& cfg) {
  StandaloneField<N> f = to_field<N>(doc);
  std::cout << "command check\n"
            << "vertices " << f.body()->vertex_count() << " cells "
            << f.body()->cell_count() << " dim " << N << "\n";
  if (doc.base) {
    Configuration<N> c = to_configuration<N>(doc);
    auto h = is_holonomic(c, cfg.tol_rel);
    std::cout << "holonomic " << (h.holonomic ? "yes" : "no") << " max_residual "
              << format_double(h.max_residual) << "\n";
  }
  auto verdict = field_is_gradient(f, cfg.tol_rel);
  std::cout << "gradient " << (verdict.is_gradient ? "yes" : "no")
            << " max_residual " << format_double(verdict.max_residual) << "\n"
            << "incompatibility_norm " << format_double(incompatibility_norm(f))
            << "\n"
            << "violating_facets " << verdict.violations.size() << "\n";
  for (std::size_t i = 0; i < verdict.violations.size() && i < 10; ++i)
    std::cout << "facet " << verdict.violations[i].facet << " residual "
              << format_double(verdict.violations[i].residual) << "\n";
  std::cout << "verdict " << (verdict.is_gradient ? "compatible" : "incompatible")
            << "\n";
  return verdict.is_gradient ? 0 : 2;
}

template <int N>
int run_decompose(const MeshFieldDocument& doc, const RunConfig& cfg,
                  const std::string& out_prefix) {
  Configuration<N> c = to_configuration<N>(doc);
  DecompositionResult<N> d = decompose(c);
  MeshFieldDocument comp = document_from_configuration<N>(d.compatible);
  comp.metadata["role"] = "compatible-factor";
  MeshFieldDocument emb = document_from_body<N>(*c.body());
  emb.field = rows_from_matrices<N>(d.anelastic.values());
  emb.metadata["role"] = "embodiment";
  const std::string comp_path = out_prefix + ".compatible.json";
  const std::string emb_path = out_prefix + ".embodiment.json";
  write_file(comp_path, emit_document(comp));
  write_file(emb_path, emit_document(emb));
  const bool ok = d.residual <= cfg.tol_decomp;
  std::cout << "command decompose\n"
            << "reconstruction_residual " << format_double(d.residual) << "\n"
            << "written " << comp_path << "\n"
            << "written " << emb_path << "\n"
            << "verdict " << (ok ? "ok" : "residual-above-tolerance") << "\n";
  return ok ? 0 : 2;
}

template <int N>
int run_equiv(const MeshFieldDocument& doc_a, const MeshFieldDocument* doc_b,
              const std::string& affine, const RunConfig& cfg) {
  Configuration<N> a = to_configuration<N>(doc_a);
  std::optional<Configuration<N>> b;
  if (!affine.empty()) {
    const std::size_t semi = affine.find(';');
    if (semi == std::string::npos)
      throw Error("--affine: expected \"a11,...;c1,...\"");
    auto mat = parse_doubles(affine.substr(0, semi), "--affine matrix");
    auto vec = parse_doubles(affine.substr(semi + 1), "--affine shift");
    if (mat.size() != std::size_t(N) * N || vec.size() != std::size_t(N))
      throw Error("--affine: expected " + std::to_string(N * N) +
                  " matrix entries and " + std::to_string(N) + " shift entries");
    Mat<N> m;
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) m(i, j) = mat[i * N + j];
    Vec<N> shift;
    for (int i = 0; i < N; ++i) shift(i) = vec[i];
    b = push_forward(a, SpaceDiffeo<N>::affine(m, shift));
  } else {
    if (!doc_b) throw Error("equiv needs a second document or --affine");
    b = to_configuration<N>(*doc_b);
  }
  Embodiment<N> ea = embodiment_of(a);
  Embodiment<N> eb = embodiment_of(*b);
  if (ea.size() != eb.size())
    throw BodyMismatch("documents live on different bodies");
  if (!(*a.body() == *b->body()))
    throw BodyMismatch("documents live on different bodies");
  double dev = 0.0;
  for (std::size_t cell = 0; cell < ea.size(); ++cell)
    dev = std::max(dev, rel_diff<N>(ea[cell], eb[cell]));
  const bool eq = dev <= cfg.tol_rel;
  std::cout << "command equiv\n"
            << "max_embodiment_deviation " << format_double(dev) << "\n"
            << "verdict " << (eq ? "equivalent" : "inequivalent") << "\n";
  return eq ? 0 : 2;
}

template <int N>
int run_groupoid(const FamilyManifest& m, const RunConfig& cfg) {
  std::vector<std::vector<Vec<N>>> configs;
  configs.reserve(m.configs.size());
  for (const auto& rows : m.configs) configs.push_back(to_points<N>(rows));
  const std::size_t points = configs[0].size();
  PointConfigurationSet<N> pcs(points, std::move(configs));
  ConfigurationGroupoid<N> cg =
      configuration_groupoid(pcs, cfg.tol_rel, cfg.closure_bound);
  AxiomReport report = verify_axioms(cg.groupoid);
  std::cout << "command groupoid\n"
            << "configs " << m.configs.size() << " points " << points << "\n";
  auto line = [](const char* name, const AxiomCheck& c) {
    std::cout << "axiom " << name << " " << (c.passed ? "pass" : "fail") << "\n";
  };
  line("surjectivity", report.surjectivity);
  line("compatibility", report.compatibility);
  line("associativity", report.associativity);
  line("identity_laws", report.identity_laws);
  line("inverse_laws", report.inverse_laws);
  std::cout << "morphisms " << cg.groupoid.source.size() << " objects "
            << cg.groupoid.object_count << "\n";
  if (report.all_passed()) {
    auto orbs = orbits(cg.groupoid);
    for (std::size_t i = 0; i < orbs.size(); ++i) {
      std::cout << "orbit " << i << ":";
      for (std::size_t member : orbs[i]) std::cout << " " << member;
      std::cout << "\n";
    }
  }
  std::cout << "verdict " << (report.all_passed() ? "axioms-pass" : "axioms-fail")
            << "\n";
  return report.all_passed() ? 0 : 2;
}

int run_synth_dislocation(const std::string& grid, double h,
                          const std::string& core, const std::string& burgers,
                          const std::string& kind, const std::string& out) {
  DislocationSpec spec;
  auto g = parse_indices(grid, "--grid");
  if (g.size() == 1) {
    spec.nx = spec.ny = g[0];
  } else if (g.size() == 2) {
    spec.nx = g[0];
    spec.ny = g[1];
  } else {
    throw Error("--grid: expected nx or nx,ny");
  }
  spec.h = h;
  if (core.empty()) {
    spec.core = Vec<2>{(double(spec.nx / 2) + 0.3) * h,
                       (double(spec.ny / 2) + 0.2) * h};
  } else {
    auto c = parse_doubles(core, "--core");
    if (c.size() != 2) throw Error("--core: expected x,y");
    spec.core = Vec<2>{c[0], c[1]};
  }
  auto b = parse_doubles(burgers, "--b");
  if (b.size() != 2) throw Error("--b: expected bx,by");
  spec.burgers = Vec<2>{b[0], b[1]};
  if (kind == "edge") {
    spec.kind = DislocationSpec::Kind::Edge;
  } else if (kind == "screw2d") {
    spec.kind = DislocationSpec::Kind::ScrewAnalogue2D;
  } else {
    throw Error("--kind: expected edge or screw2d");
  }

  DislocatedCrystal d = make_dislocated(spec);
  MeshFieldDocument doc = document_from_configuration<2>(d.config);
  doc.metadata["role"] = "dislocated-crystal";
  doc.metadata["kind"] = kind;
  doc.metadata["grid"] = std::to_string(spec.nx) + " " + std::to_string(spec.ny);
  doc.metadata["h"] = format_double(spec.h);
  doc.metadata["core"] = format_double(spec.core(0)) + " " + format_double(spec.core(1));
  doc.metadata["burgers"] =
      format_double(spec.burgers(0)) + " " + format_double(spec.burgers(1));
  write_file(out, emit_document(doc));
  std::cout << "command synth dislocation\n"
            << "grid " << spec.nx << " " << spec.ny << " h "
            << format_double(spec.h) << "\n"
            << "core " << format_double(spec.core(0)) << " "
            << format_double(spec.core(1)) << "\n"
            << "burgers " << format_double(d.burgers_physical(0)) << " "
            << format_double(d.burgers_physical(1)) << "\n"
            << "cells " << d.config.body()->cell_count() << "\n"
            << "written " << out << "\n";
  return 0;
}

int run_synth_quasicrystal(const std::string& frame, const std::string& wlo,
                           const std::string& whi, const std::string& elo,
                           const std::string& ehi, std::size_t count_bound,
                           const std::string& out) {
  CutProjectSpec spec;
  spec.parallel_frame = parse_matrix_rows(frame, "--frame");
  if (spec.parallel_frame.cols() < 1 ||
      spec.parallel_frame.rows() != 2 * spec.parallel_frame.cols())
    throw Error("--frame: expected a 2n x n matrix (rows separated by ;)");
  spec.physical_dim = int(spec.parallel_frame.cols());
  const int n = spec.physical_dim;

  auto vec_of = [&](const std::string& text, const char* what) {
    auto v = parse_doubles(text, what);
    if (v.size() != std::size_t(n))
      throw Error(std::string(what) + ": expected " + std::to_string(n) +
                  " entries");
    Eigen::VectorXd x(n);
    for (int i = 0; i < n; ++i) x(i) = v[i];
    return x;
  };

  if (wlo.empty() != whi.empty())
    throw Error("--window-lo and --window-hi go together");
  if (wlo.empty()) {
    if (!(spec.parallel_frame.rows() == 2 && n == 1))
      throw Error("default window exists only for 2x1 frames; give --window-lo/hi");
    auto [lo, hi] = canonical_window_1d(spec.parallel_frame);
    spec.window_lo = Eigen::VectorXd::Constant(1, lo);
    spec.window_hi = Eigen::VectorXd::Constant(1, hi);
  } else {
    spec.window_lo = vec_of(wlo, "--window-lo");
    spec.window_hi = vec_of(whi, "--window-hi");
  }
  spec.extent_lo = vec_of(elo, "--extent-lo");
  spec.extent_hi = vec_of(ehi, "--extent-hi");
  spec.count_bound = count_bound;

  auto pts = cut_and_project(spec);
  write_file(out, emit_points_csv(pts));
  std::cout << "command synth quasicrystal\n"
            << "physical_dim " << n << "\npoints " << pts.size() << "\n";
  for (int i = 0; i < n; ++i)
    std::cout << "window " << format_double(spec.window_lo(i)) << " "
              << format_double(spec.window_hi(i)) << "\n";
  std::cout << "written " << out << "\n";
  return 0;
}

template <int N>
int run_burgers(const MeshFieldDocument& doc, const std::string& loop_text) {
  StandaloneField<N> f = to_field<N>(doc);
  auto ids = parse_indices(loop_text, "--loop");
  std::vector<Vec<N>> ring = vertex_ring<N>(*f.body(), ids);
  Vec<N> b = burgers_circuit<N>(f, nudged<N>(ring, loop_nudge<N>(*f.body())));
  std::cout << "command burgers\nloop_vertices " << ids.size() << "\n"
            << "burgers_vector";
  for (int i = 0; i < N; ++i) std::cout << " " << format_double(b(i));
  std::cout << "\n";
  return 0;
}

int run_report(const MeshFieldDocument& doc, const std::string& loop_text,
               const std::string& out, const RunConfig& cfg) {
  if (doc.dim != 2) throw Error("report renders 2D documents only");
  StandaloneField<2> f = to_field<2>(doc);
  std::vector<Vec<2>> overlay;
  if (!loop_text.empty())
    overlay = vertex_ring<2>(*f.body(), parse_indices(loop_text, "--loop"));
  double max_res = 0.0;
  for (const FacetViolation& v : field_is_gradient(f, cfg.tol_rel).violations)
    max_res = std::max(max_res, v.residual);
  write_file(out, render_report_svg(f, overlay, cfg.tol_rel));
  std::cout << "command report\n"
            << "max_facet_violation " << format_double(max_res) << "\n"
            << "written " << out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"discrete bundle-morphism toolkit over simplicial bodies"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals globals;
  double tol_value = 0.0;
  std::uint64_t seed_value = 0;
  auto* tol_opt = app.add_option("--tol", tol_value, "relative tolerance override");
  auto* seed_opt = app.add_option("--seed", seed_value, "generator seed override");
  app.add_option("--config", globals.config_path,
                 "RunConfig JSON path (default: $ANELKIN_CONFIG)");

  std::string in_a, in_b, affine, out_path, loop_text;
  std::string grid = "32", core, burgers_text, kind = "edge";
  std::string frame, window_lo, window_hi, extent_lo, extent_hi;
  double h = 1.0;
  std::size_t count_bound = 200000;

  auto* cmd_check = app.add_subcommand("check", "holonomicity and integrability of a document");
  cmd_check->add_option("input", in_a, "mesh+field document")->required();

  auto* cmd_decompose =
      app.add_subcommand("decompose", "split into compatible factor and embodiment");
  cmd_decompose->add_option("input", in_a, "mesh+base+field document")->required();
  cmd_decompose->add_option("--out", out_path, "output path prefix")->required();

  auto* cmd_equiv = app.add_subcommand("equiv", "compare two configurations up to displacement");
  cmd_equiv->add_option("inputA", in_a, "first document")->required();
  cmd_equiv->add_option("inputB", in_b, "second document");
  cmd_equiv->add_option("--affine", affine,
                        "compare against the push-forward of inputA by \"a11,..;c1,..\"");

  auto* cmd_groupoid = app.add_subcommand("groupoid", "axioms and orbits of a config family");
  cmd_groupoid->add_option("manifest", in_a, "family manifest JSON")->required();

  auto* cmd_synth = app.add_subcommand("synth", "generate example data");
  auto* synth_dis = cmd_synth->add_subcommand("dislocation", "dislocated crystal document");
  synth_dis->add_option("--grid", grid, "nx or nx,ny (default 32)");
  synth_dis->add_option("--spacing", h, "lattice spacing (default 1)");
  synth_dis->add_option("--core", core, "core point x,y (default: center offset)");
  synth_dis->add_option("--b", burgers_text, "Burgers vector bx,by in lattice units")->required();
  synth_dis->add_option("--kind", kind, "edge (default) or screw2d");
  synth_dis->add_option("--out", out_path, "output document path")->required();
  auto* synth_qc = cmd_synth->add_subcommand("quasicrystal", "cut-and-project point CSV");
  synth_qc->add_option("--frame", frame, "2n x n parallel frame, rows ; separated")->required();
  synth_qc->add_option("--window-lo", window_lo, "acceptance window lower corner");
  synth_qc->add_option("--window-hi", window_hi, "acceptance window upper corner");
  synth_qc->add_option("--extent-lo", extent_lo, "physical extent lower corner")->required();
  synth_qc->add_option("--extent-hi", extent_hi, "physical extent upper corner")->required();
  synth_qc->add_option("--count-bound", count_bound, "refuse larger point sets");
  synth_qc->add_option("--out", out_path, "output CSV path")->required();
  cmd_synth->require_subcommand(1);

  auto* cmd_burgers = app.add_subcommand("burgers", "circuit integral along a vertex ring");
  cmd_burgers->add_option("input", in_a, "mesh+field document")->required();
  cmd_burgers->add_option("--loop", loop_text, "vertex ids v0,v1,...,v0")->required();

  auto* cmd_report = app.add_subcommand("report", "SVG residual picture");
  cmd_report->add_option("input", in_a, "mesh+field document")->required();
  cmd_report->add_option("--loop", loop_text, "vertex ids to overlay");
  cmd_report->add_option("--out", out_path, "output SVG path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    return 1;
  }

  try {
    if (tol_opt->count()) globals.tol = tol_value;
    if (seed_opt->count()) globals.seed = seed_value;
    const RunConfig cfg = load_config(globals);
    print_header(cfg);

    auto with_doc = [&](auto&& fn) {
      const MeshFieldDocument doc = parse_document(read_file(in_a));
      return doc.dim == 2 ? fn.template operator()<2>(doc)
                          : fn.template operator()<3>(doc);
    };

    int rc = 1;
    if (*cmd_check) {
      rc = with_doc([&]<int N>(const MeshFieldDocument& doc) {
        return run_check<N>(doc, cfg);
      });
    } else if (*cmd_decompose) {
      rc = with_doc([&]<int N>(const MeshFieldDocument& doc) {
        return run_decompose<N>(doc, cfg, out_path);
      });
    } else if (*cmd_equiv) {
      std::optional<MeshFieldDocument> doc_b;
      if (!in_b.empty()) doc_b = parse_document(read_file(in_b));
      rc = with_doc([&]<int N>(const MeshFieldDocument& doc) {
        return run_equiv<N>(doc, doc_b ? &*doc_b : nullptr, affine, cfg);
      });
    } else if (*cmd_groupoid) {
      const FamilyManifest m = parse_family_manifest(read_file(in_a));
      rc = m.dim == 2 ? run_groupoid<2>(m, cfg) : run_groupoid<3>(m, cfg);
    } else if (*cmd_synth) {
      if (*synth_dis)
        rc = run_synth_dislocation(grid, h, core, burgers_text, kind, out_path);
      else
        rc = run_synth_quasicrystal(frame, window_lo, window_hi, extent_lo,
                                    extent_hi, count_bound, out_path);
    } else if (*cmd_burgers) {
      rc = with_doc([&]<int N>(const MeshFieldDocument& doc) {
        return run_burgers<N>(doc, loop_text);
      });
    } else if (*cmd_report) {
      const MeshFieldDocument doc = parse_document(read_file(in_a));
      rc = run_report(doc, loop_text, out_path, cfg);
    }
    return rc;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
