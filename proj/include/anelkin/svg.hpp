#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "anelkin/configuration.hpp"
#include "anelkin/document.hpp"

namespace anelkin {

/// Per-cell incompatibility residual: the largest tangential jump
/// ||(F_left - F_right)(b - a)|| over the cell's interior facets {a, b}.
/// Zero everywhere exactly when the field satisfies the jump conditions.
inline std::vector<double> cell_residuals(const StandaloneField<2>& f) {
  const SimplicialBody<2>& body = *f.body();
  std::vector<double> res(body.cell_count(), 0.0);
  for (const auto& facet : body.facets()) {
    if (!facet.interior()) continue;
    const Vec<2> t = body.vertices()[facet.vertices[1]] -
                     body.vertices()[facet.vertices[0]];
    const double jump = ((f[facet.left] - f[facet.right]) * t).norm();
    res[facet.left] = std::max(res[facet.left], jump);
    res[facet.right] = std::max(res[facet.right], jump);
  }
  return res;
}

namespace detail {

inline std::string svg_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

}  // namespace detail

/// Standalone SVG of a 2D body shaded white to red by integrability defect,
/// with an optional loop overlay and a residual legend. Cells are scored by
/// the worst position disagreement among their facets, so both tangential
/// jumps and the translational mismatch around holes show up; an integrable
/// field renders exactly zero. Byte-identical output for identical input; the
/// y axis is flipped at emission so the page matches the chart orientation.
inline std::string render_report_svg(const StandaloneField<2>& f,
                                     const std::vector<Vec<2>>& loop = {},
                                     double tol = kTolRel) {
  const SimplicialBody<2>& body = *f.body();
  std::vector<double> res(body.cell_count(), 0.0);
  double max_res = 0.0;
  for (const FacetViolation& v : field_is_gradient(f, tol).violations) {
    const auto& facet = body.facets()[v.facet];
    res[facet.left] = std::max(res[facet.left], v.residual);
    res[facet.right] = std::max(res[facet.right], v.residual);
    max_res = std::max(max_res, v.residual);
  }

  double xmin = body.vertices()[0](0), xmax = xmin;
  double ymin = body.vertices()[0](1), ymax = ymin;
  auto grow = [&](const Vec<2>& p) {
    xmin = std::min(xmin, p(0));
    xmax = std::max(xmax, p(0));
    ymin = std::min(ymin, p(1));
    ymax = std::max(ymax, p(1));
  };
  for (const auto& v : body.vertices()) grow(v);
  for (const auto& p : loop) grow(p);
  auto flip = [&](double y) { return ymin + ymax - y; };

  const double w = std::max(xmax - xmin, 1e-9), h = std::max(ymax - ymin, 1e-9);
  const double pad = 0.05 * std::max(w, h);
  const double band = 0.14 * std::max(w, h);  // legend strip above the mesh
  const double font = 0.05 * std::max(w, h);
  const double stroke = 0.002 * std::max(w, h);

  std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"";
  out += detail::svg_num(xmin - pad) + " " + detail::svg_num(ymin - pad - band) +
         " " + detail::svg_num(w + 2 * pad) + " " +
         detail::svg_num(h + 2 * pad + band) + "\">\n";
  out += "<rect x=\"" + detail::svg_num(xmin - pad) + "\" y=\"" +
         detail::svg_num(ymin - pad - band) + "\" width=\"" +
         detail::svg_num(w + 2 * pad) + "\" height=\"" +
         detail::svg_num(h + 2 * pad + band) + "\" fill=\"#ffffff\"/>\n";
  out += "<text x=\"" + detail::svg_num(xmin - pad + font) + "\" y=\"" +
         detail::svg_num(ymin - pad - band + 1.5 * font) + "\" font-family=\"monospace\" font-size=\"" +
         detail::svg_num(font) + "\">max facet violation: " + format_double(max_res) +
         "</text>\n";
  out += "<text x=\"" + detail::svg_num(xmin - pad + font) + "\" y=\"" +
         detail::svg_num(ymin - pad - band + 2.8 * font) + "\" font-family=\"monospace\" font-size=\"" +
         detail::svg_num(font) + "\">cells: " + std::to_string(body.cell_count()) +
         "</text>\n";

  out += "<g stroke=\"#333333\" stroke-width=\"" + detail::svg_num(stroke) + "\">\n";
  for (std::size_t c = 0; c < body.cell_count(); ++c) {
    const double t = max_res > 0.0 ? res[c] / max_res : 0.0;
    const int gb = int(std::lround(255.0 * (1.0 - t)));
    out += "<polygon points=\"";
    for (int k = 0; k < 3; ++k) {
      const Vec<2>& p = body.vertices()[body.cells()[c][k]];
      if (k) out += ' ';
      out += detail::svg_num(p(0)) + "," + detail::svg_num(flip(p(1)));
    }
    out += "\" fill=\"rgb(255," + std::to_string(gb) + "," + std::to_string(gb) +
           ")\"/>\n";
  }
  out += "</g>\n";

  if (!loop.empty()) {
    out += "<polyline fill=\"none\" stroke=\"#1f6fb5\" stroke-width=\"" +
           detail::svg_num(3 * stroke) + "\" points=\"";
    for (std::size_t i = 0; i < loop.size(); ++i) {
      if (i) out += ' ';
      out += detail::svg_num(loop[i](0)) + "," + detail::svg_num(flip(loop[i](1)));
    }
    out += "\"/>\n";
  }
  out += "</svg>\n";
  return out;
}

}  // namespace anelkin
