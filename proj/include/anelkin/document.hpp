#pragma once

#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "anelkin/configuration.hpp"
#include "anelkin/equivalence.hpp"
#include "anelkin/mesh.hpp"

namespace anelkin {

inline constexpr const char* kFormatVersion = "anelkin/1";

/// On-disk mesh + optional placement + optional per-cell field. Numbers are
/// written with 17 significant digits so a parse of an emit restores every
/// double bit for bit; the emitted key order and line layout are frozen.
struct MeshFieldDocument {
  std::string format_version = kFormatVersion;
  int dim = 2;  // 2 or 3
  std::map<std::string, std::string> metadata;
  std::vector<std::vector<double>> vertices;      // dim entries per row
  std::vector<std::vector<std::size_t>> cells;    // dim+1 entries per row
  std::optional<std::vector<std::vector<double>>> base;   // per-vertex, dim wide
  std::optional<std::vector<std::vector<double>>> field;  // per-cell, row-major dim*dim

  bool operator==(const MeshFieldDocument&) const = default;
};

/// Tool-wide knobs. Seed feeds only the synthetic generators; it is echoed in
/// every report so a run can be reproduced from its output alone.
struct RunConfig {
  double tol_rel = 1e-9;
  double tol_decomp = 1e-12;
  std::size_t closure_bound = 100000;
  std::uint64_t rng_seed = 42;
};

/// A family of point configurations over one protobody, for the groupoid and
/// partition commands. Configs are point lists of equal length.
struct FamilyManifest {
  std::string format_version = kFormatVersion;
  int dim = 2;
  std::string group = "affine";  // or "explicit" (not expressible in a file)
  std::vector<std::vector<std::vector<double>>> configs;
};

inline std::string format_double(double v) {
  if (!std::isfinite(v)) throw FormatError("cannot serialize a non-finite number");
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace detail {

inline void append_json_string(std::string& out, const std::string& s) {
  out += '"';
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  out += '"';
}

inline void append_number_rows(std::string& out, const char* key,
                               const std::vector<std::vector<double>>& rows) {
  out += "  \"";
  out += key;
  out += "\": [\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out += "    [";
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      if (j) out += ", ";
      out += format_double(rows[i][j]);
    }
    out += i + 1 < rows.size() ? "],\n" : "]\n";
  }
  out += "  ]";
}

}  // namespace detail

/// Frozen layout: fixed key order, one vertex / cell / matrix per line,
/// metadata keys sorted. Emitting the parse of an emit reproduces the bytes.
inline std::string emit_document(const MeshFieldDocument& doc) {
  std::string out = "{\n  \"format_version\": ";
  detail::append_json_string(out, doc.format_version);
  out += ",\n  \"dim\": " + std::to_string(doc.dim) + ",\n  \"metadata\": {";
  std::size_t left = doc.metadata.size();
  for (const auto& [k, v] : doc.metadata) {
    out += "\n    ";
    detail::append_json_string(out, k);
    out += ": ";
    detail::append_json_string(out, v);
    if (--left) out += ",";
  }
  out += doc.metadata.empty() ? "},\n" : "\n  },\n";
  detail::append_number_rows(out, "vertices", doc.vertices);
  out += ",\n  \"cells\": [\n";
  for (std::size_t i = 0; i < doc.cells.size(); ++i) {
    out += "    [";
    for (std::size_t j = 0; j < doc.cells[i].size(); ++j) {
      if (j) out += ", ";
      out += std::to_string(doc.cells[i][j]);
    }
    out += i + 1 < doc.cells.size() ? "],\n" : "]\n";
  }
  out += "  ]";
  if (doc.base) {
    out += ",\n";
    detail::append_number_rows(out, "base", *doc.base);
  }
  if (doc.field) {
    out += ",\n";
    detail::append_number_rows(out, "field", *doc.field);
  }
  out += "\n}\n";
  return out;
}

namespace detail {

inline double expect_number(const nlohmann::json& j, const std::string& path) {
  if (!j.is_number()) throw FormatError(path + ": expected a number");
  return j.get<double>();
}

inline std::vector<std::vector<double>> expect_number_rows(
    const nlohmann::json& j, const std::string& key, std::size_t width) {
  if (!j.is_array()) throw FormatError(key + ": expected an array");
  std::vector<std::vector<double>> rows;
  rows.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto& row = j[i];
    const std::string path = key + "[" + std::to_string(i) + "]";
    if (!row.is_array() || row.size() != width)
      throw FormatError(path + ": expected " + std::to_string(width) + " numbers");
    std::vector<double> r(width);
    for (std::size_t k = 0; k < width; ++k)
      r[k] = expect_number(row[k], path + "[" + std::to_string(k) + "]");
    rows.push_back(std::move(r));
  }
  return rows;
}

inline nlohmann::json parse_json(const std::string& text) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("JSON parse error: ") + e.what());
  }
}

inline void reject_unknown_keys(const nlohmann::json& j,
                                std::initializer_list<const char*> known) {
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) throw FormatError("unknown key \"" + key + "\"");
  }
}

inline void check_version(const nlohmann::json& j) {
  if (!j.contains("format_version") || !j["format_version"].is_string() ||
      j["format_version"].get<std::string>() != kFormatVersion)
    throw FormatError(std::string("format_version: expected \"") +
                      kFormatVersion + "\"");
}

inline int check_dim(const nlohmann::json& j) {
  if (!j.contains("dim") || !j["dim"].is_number_integer())
    throw FormatError("dim: expected an integer");
  const int dim = j["dim"].get<int>();
  if (dim != 2 && dim != 3) throw FormatError("dim: expected 2 or 3");
  return dim;
}

}  // namespace detail

inline MeshFieldDocument parse_document(const std::string& text) {
  const nlohmann::json j = detail::parse_json(text);
  if (!j.is_object()) throw FormatError("document root: expected an object");
  detail::reject_unknown_keys(
      j, {"format_version", "dim", "metadata", "vertices", "cells", "base", "field"});
  detail::check_version(j);

  MeshFieldDocument doc;
  doc.dim = detail::check_dim(j);

  if (j.contains("metadata")) {
    if (!j["metadata"].is_object()) throw FormatError("metadata: expected an object");
    for (const auto& [key, value] : j["metadata"].items()) {
      if (!value.is_string())
        throw FormatError("metadata." + key + ": expected a string");
      doc.metadata[key] = value.get<std::string>();
    }
  }

  if (!j.contains("vertices")) throw FormatError("vertices: missing");
  doc.vertices = detail::expect_number_rows(j["vertices"], "vertices", doc.dim);
  if (doc.vertices.empty()) throw FormatError("vertices: must be nonempty");

  if (!j.contains("cells") || !j["cells"].is_array())
    throw FormatError("cells: expected an array");
  const auto& jc = j["cells"];
  for (std::size_t i = 0; i < jc.size(); ++i) {
    const std::string path = "cells[" + std::to_string(i) + "]";
    if (!jc[i].is_array() || jc[i].size() != std::size_t(doc.dim) + 1)
      throw FormatError(path + ": expected " + std::to_string(doc.dim + 1) +
                        " vertex indices");
    std::vector<std::size_t> cell;
    for (std::size_t k = 0; k < jc[i].size(); ++k) {
      const std::string p = path + "[" + std::to_string(k) + "]";
      if (!jc[i][k].is_number_unsigned())
        throw FormatError(p + ": expected a vertex index");
      const std::size_t v = jc[i][k].get<std::size_t>();
      if (v >= doc.vertices.size())
        throw FormatError(p + ": vertex index " + std::to_string(v) +
                          " out of range (" + std::to_string(doc.vertices.size()) +
                          " vertices)");
      cell.push_back(v);
    }
    doc.cells.push_back(std::move(cell));
  }
  if (doc.cells.empty()) throw FormatError("cells: must be nonempty");

  if (j.contains("base")) {
    doc.base = detail::expect_number_rows(j["base"], "base", doc.dim);
    if (doc.base->size() != doc.vertices.size())
      throw FormatError("base: expected one row per vertex");
  }
  if (j.contains("field")) {
    doc.field = detail::expect_number_rows(j["field"], "field",
                                           std::size_t(doc.dim) * doc.dim);
    if (doc.field->size() != doc.cells.size())
      throw FormatError("field: expected one row per cell");
  }
  return doc;
}

inline std::string emit_run_config(const RunConfig& c) {
  std::string out = "{\n  \"tol_rel\": " + format_double(c.tol_rel) +
                    ",\n  \"tol_decomp\": " + format_double(c.tol_decomp) +
                    ",\n  \"closure_bound\": " + std::to_string(c.closure_bound) +
                    ",\n  \"rng_seed\": " + std::to_string(c.rng_seed) + "\n}\n";
  return out;
}

inline RunConfig parse_run_config(const std::string& text) {
  const nlohmann::json j = detail::parse_json(text);
  if (!j.is_object()) throw FormatError("config root: expected an object");
  detail::reject_unknown_keys(j, {"tol_rel", "tol_decomp", "closure_bound", "rng_seed"});
  RunConfig c;
  if (j.contains("tol_rel")) c.tol_rel = detail::expect_number(j["tol_rel"], "tol_rel");
  if (j.contains("tol_decomp"))
    c.tol_decomp = detail::expect_number(j["tol_decomp"], "tol_decomp");
  if (j.contains("closure_bound")) {
    if (!j["closure_bound"].is_number_unsigned())
      throw FormatError("closure_bound: expected a nonnegative integer");
    c.closure_bound = j["closure_bound"].get<std::size_t>();
  }
  if (j.contains("rng_seed")) {
    if (!j["rng_seed"].is_number_unsigned())
      throw FormatError("rng_seed: expected a nonnegative integer");
    c.rng_seed = j["rng_seed"].get<std::uint64_t>();
  }
  if (!(c.tol_rel > 0.0)) throw FormatError("tol_rel: must be positive");
  if (!(c.tol_decomp > 0.0)) throw FormatError("tol_decomp: must be positive");
  return c;
}

inline FamilyManifest parse_family_manifest(const std::string& text) {
  const nlohmann::json j = detail::parse_json(text);
  if (!j.is_object()) throw FormatError("manifest root: expected an object");
  detail::reject_unknown_keys(j, {"format_version", "dim", "group", "configs"});
  detail::check_version(j);

  FamilyManifest m;
  m.dim = detail::check_dim(j);
  if (j.contains("group")) {
    if (!j["group"].is_string() || j["group"].get<std::string>() != "affine")
      throw FormatError("group: expected \"affine\"");
    m.group = j["group"].get<std::string>();
  }
  if (!j.contains("configs") || !j["configs"].is_array() || j["configs"].empty())
    throw FormatError("configs: expected a nonempty array");
  const auto& jc = j["configs"];
  std::size_t points = 0;
  for (std::size_t i = 0; i < jc.size(); ++i) {
    const std::string path = "configs[" + std::to_string(i) + "]";
    if (!jc[i].is_array() || jc[i].empty())
      throw FormatError(path + ": expected a nonempty point list");
    if (i == 0) points = jc[i].size();
    if (jc[i].size() != points)
      throw FormatError(path + ": expected " + std::to_string(points) + " points");
    m.configs.push_back(detail::expect_number_rows(jc[i], path, m.dim));
  }
  return m;
}

/// One point per line, comma separated, 17 significant digits.
inline std::string emit_points_csv(const std::vector<Eigen::VectorXd>& points) {
  std::string out;
  for (const auto& p : points) {
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      if (i) out += ',';
      out += format_double(p(i));
    }
    out += '\n';
  }
  return out;
}

template <int N>
BodyPtr<N> to_body(const MeshFieldDocument& doc) {
  if (doc.dim != N) throw FormatError("document dim does not match");
  std::vector<Vec<N>> verts;
  verts.reserve(doc.vertices.size());
  for (const auto& row : doc.vertices) {
    Vec<N> v;
    for (int i = 0; i < N; ++i) v(i) = row[i];
    verts.push_back(v);
  }
  std::vector<std::array<std::size_t, N + 1>> cells;
  cells.reserve(doc.cells.size());
  for (const auto& row : doc.cells) {
    std::array<std::size_t, N + 1> c{};
    for (int i = 0; i <= N; ++i) c[i] = row[i];
    cells.push_back(c);
  }
  return std::make_shared<const SimplicialBody<N>>(std::move(verts), std::move(cells));
}

template <int N>
std::vector<Vec<N>> to_points(const std::vector<std::vector<double>>& rows) {
  std::vector<Vec<N>> out;
  out.reserve(rows.size());
  for (const auto& row : rows) {
    Vec<N> v;
    for (int i = 0; i < N; ++i) v(i) = row[i];
    out.push_back(v);
  }
  return out;
}

template <int N>
std::vector<Mat<N>> to_matrices(const std::vector<std::vector<double>>& rows) {
  std::vector<Mat<N>> out;
  out.reserve(rows.size());
  for (const auto& row : rows) {
    Mat<N> m;
    for (int r = 0; r < N; ++r)
      for (int c = 0; c < N; ++c) m(r, c) = row[r * N + c];
    out.push_back(m);
  }
  return out;
}

template <int N>
StandaloneField<N> to_field(const MeshFieldDocument& doc) {
  if (!doc.field) throw FormatError("field: missing (required by this command)");
  return StandaloneField<N>(to_body<N>(doc), to_matrices<N>(*doc.field));
}

template <int N>
Configuration<N> to_configuration(const MeshFieldDocument& doc) {
  if (!doc.base) throw FormatError("base: missing (required by this command)");
  if (!doc.field) throw FormatError("field: missing (required by this command)");
  return Configuration<N>(to_body<N>(doc), to_points<N>(*doc.base),
                          to_matrices<N>(*doc.field));
}

template <int N>
std::vector<std::vector<double>> rows_from_points(const std::vector<Vec<N>>& pts) {
  std::vector<std::vector<double>> rows;
  rows.reserve(pts.size());
  for (const auto& p : pts) {
    std::vector<double> r(N);
    for (int i = 0; i < N; ++i) r[i] = p(i);
    rows.push_back(std::move(r));
  }
  return rows;
}

template <int N>
std::vector<std::vector<double>> rows_from_matrices(const std::vector<Mat<N>>& ms) {
  std::vector<std::vector<double>> rows;
  rows.reserve(ms.size());
  for (const auto& m : ms) {
    std::vector<double> r(N * N);
    for (int i = 0; i < N; ++i)
      for (int c = 0; c < N; ++c) r[i * N + c] = m(i, c);
    rows.push_back(std::move(r));
  }
  return rows;
}

template <int N>
MeshFieldDocument document_from_body(const SimplicialBody<N>& body) {
  MeshFieldDocument doc;
  doc.dim = N;
  doc.vertices = rows_from_points<N>(body.vertices());
  for (const auto& cell : body.cells())
    doc.cells.emplace_back(cell.begin(), cell.end());
  return doc;
}

template <int N>
MeshFieldDocument document_from_configuration(const Configuration<N>& c) {
  MeshFieldDocument doc = document_from_body<N>(*c.body());
  doc.base = rows_from_points<N>(c.base());
  doc.field = rows_from_matrices<N>(c.field());
  return doc;
}

template <int N>
MeshFieldDocument document_from_field(const StandaloneField<N>& f) {
  MeshFieldDocument doc = document_from_body<N>(*f.body());
  doc.field = rows_from_matrices<N>(f.values());
  return doc;
}

}  // namespace anelkin
