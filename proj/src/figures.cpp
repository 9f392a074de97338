#include "biasaudit/figures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "biasaudit/errors.hpp"
#include "biasaudit/textutil.hpp"

namespace biasaudit {

std::optional<Rgb> parse_hex_color(std::string_view s) {
  if (s.size() != 7 || s[0] != '#') return std::nullopt;
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
  };
  int v[6];
  for (int i = 0; i < 6; ++i) {
    v[i] = nibble(s[static_cast<std::size_t>(i) + 1]);
    if (v[i] < 0) return std::nullopt;
  }
  return Rgb{v[0] * 16 + v[1], v[2] * 16 + v[3], v[4] * 16 + v[5]};
}

std::string to_hex(const Rgb& c) {
  char buf[8];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", c.r, c.g, c.b);
  return buf;
}

Rgb lerp_color(const Rgb& lo, const Rgb& hi, double t) {
  t = std::clamp(t, 0.0, 1.0);
  auto chan = [t](int a, int b) {
    return static_cast<int>(std::lround(static_cast<double>(a) + t * static_cast<double>(b - a)));
  };
  return Rgb{chan(lo.r, hi.r), chan(lo.g, hi.g), chan(lo.b, hi.b)};
}

namespace {

std::string xml_escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string fmt2(double v) { return format_fixed(v, 2); }
std::string fmt3(double v) { return format_fixed(v, 3); }

// Area centroid of a closed ring (shoelace); falls back to the vertex mean
// for degenerate rings.
Point ring_centroid(const Ring& ring, double& area_out) {
  double a2 = 0.0, cx = 0.0, cy = 0.0;
  const auto& p = ring.points;
  for (std::size_t i = 0; i + 1 < p.size(); ++i) {
    const double cross = p[i][0] * p[i + 1][1] - p[i + 1][0] * p[i][1];
    a2 += cross;
    cx += (p[i][0] + p[i + 1][0]) * cross;
    cy += (p[i][1] + p[i + 1][1]) * cross;
  }
  area_out = std::fabs(a2) / 2.0;
  if (a2 == 0.0) {
    double sx = 0, sy = 0;
    for (const auto& pt : p) {
      sx += pt[0];
      sy += pt[1];
    }
    return {sx / static_cast<double>(p.size()), sy / static_cast<double>(p.size())};
  }
  return {cx / (3.0 * a2), cy / (3.0 * a2)};
}

Point region_anchor(const Region& region) {
  double best_area = -1.0;
  Point best{0, 0};
  for (const auto& poly : region.polygons) {
    if (poly.rings.empty()) continue;
    double area = 0.0;
    Point c = ring_centroid(poly.rings.front(), area);
    if (area > best_area) {
      best_area = area;
      best = c;
    }
  }
  return best;
}

}  // namespace

std::string render_choropleth(const std::vector<RegionValue>& values,
                              const GeometrySet& geometry, const ChoroplethStyle& style) {
  // Every group must have geometry before anything is drawn.
  std::vector<std::string> unmatched;
  for (const auto& rv : values) {
    if (geometry.find(rv.group) == nullptr) unmatched.push_back(rv.group);
  }
  if (!unmatched.empty()) {
    std::string list;
    for (const auto& g : unmatched) list += (list.empty() ? "" : ", ") + g;
    throw GeometryError("no geometry for group(s): " + list);
  }

  // Value range: fixed or observed finite min/max.
  double lo = 0.0, hi = 0.0;
  bool any_finite = false;
  if (style.range) {
    lo = style.range->first;
    hi = style.range->second;
    any_finite = true;
  } else {
    lo = std::numeric_limits<double>::infinity();
    hi = -std::numeric_limits<double>::infinity();
    for (const auto& rv : values) {
      if (rv.value && std::isfinite(*rv.value)) {
        lo = std::min(lo, *rv.value);
        hi = std::max(hi, *rv.value);
        any_finite = true;
      }
    }
    if (!any_finite) lo = hi = 0.0;
  }
  const bool degenerate = !(hi > lo);
  auto t_of = [&](double v) { return degenerate ? 0.5 : std::clamp((v - lo) / (hi - lo), 0.0, 1.0); };

  const double width = 840, height = 600;
  const double map_x = 24, map_y = 64, map_w = 600, map_h = 500;
  const Bounds b = geometry.bounds();
  const double bw = std::max(b.max_x - b.min_x, 1e-12);
  const double bh = std::max(b.max_y - b.min_y, 1e-12);
  const double scale = std::min(map_w / bw, map_h / bh);
  const double ox = map_x + (map_w - bw * scale) / 2.0;
  const double oy = map_y + (map_h - bh * scale) / 2.0;
  auto sx = [&](double x) { return ox + (x - b.min_x) * scale; };
  auto sy = [&](double y) { return oy + (b.max_y - y) * scale; };  // SVG y grows downward

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
  svg << "  <defs>\n"
         "    <pattern id=\"hatch\" width=\"6\" height=\"6\" patternUnits=\"userSpaceOnUse\" "
         "patternTransform=\"rotate(45)\">\n"
         "      <rect width=\"6\" height=\"6\" fill=\"#f0f0f0\"/>\n"
         "      <line x1=\"0\" y1=\"0\" x2=\"0\" y2=\"6\" stroke=\"#b0b0b0\" stroke-width=\"2\"/>\n"
         "    </pattern>\n"
         "  </defs>\n";
  svg << "  <rect width=\"" << width << "\" height=\"" << height << "\" fill=\"#ffffff\"/>\n";
  svg << "  <text x=\"" << fmt2(width / 2) << "\" y=\"36\" font-family=\"sans-serif\" "
         "font-size=\"20\" text-anchor=\"middle\">"
      << xml_escape(style.title) << "</text>\n";

  svg << "  <g id=\"regions\" stroke=\"#444444\" stroke-width=\"1\">\n";
  for (const auto& rv : values) {
    const Region* region = geometry.find(rv.group);
    std::string fill;
    if (rv.value && std::isfinite(*rv.value)) {
      fill = to_hex(lerp_color(style.ramp_low, style.ramp_high, t_of(*rv.value)));
    } else {
      fill = "url(#hatch)";
    }
    std::ostringstream d;
    for (const auto& poly : region->polygons) {
      for (const auto& ring : poly.rings) {
        for (std::size_t i = 0; i < ring.points.size(); ++i) {
          d << (i == 0 ? "M " : "L ") << fmt2(sx(ring.points[i][0])) << " "
            << fmt2(sy(ring.points[i][1])) << " ";
        }
        d << "Z ";
      }
    }
    svg << "    <path id=\"region-" << sanitize_filename(rv.group) << "\" fill=\"" << fill
        << "\" fill-rule=\"evenodd\" d=\"" << d.str() << "\"/>\n";
  }
  svg << "  </g>\n";

  svg << "  <g id=\"labels\" font-family=\"sans-serif\" text-anchor=\"middle\">\n";
  for (const auto& rv : values) {
    const Region* region = geometry.find(rv.group);
    const Point c = region_anchor(*region);
    std::string value_text = "n/a";
    if (rv.value) value_text = std::isfinite(*rv.value) ? fmt3(*rv.value) : "inf";
    svg << "    <text x=\"" << fmt2(sx(c[0])) << "\" y=\"" << fmt2(sy(c[1]) - 4)
        << "\" font-size=\"13\">" << xml_escape(rv.group) << "</text>\n";
    svg << "    <text x=\"" << fmt2(sx(c[0])) << "\" y=\"" << fmt2(sy(c[1]) + 12)
        << "\" font-size=\"12\">" << value_text << "</text>\n";
  }
  svg << "  </g>\n";

  // Color bar: discrete steps from low (bottom) to high (top).
  if (any_finite) {
    const double bar_x = 680, bar_y = 120, bar_w = 28, bar_h = 360;
    svg << "  <g id=\"colorbar\" font-family=\"sans-serif\" font-size=\"12\">\n";
    if (degenerate) {
      svg << "    <rect x=\"" << bar_x << "\" y=\"" << fmt2(bar_y + bar_h / 2 - 14)
          << "\" width=\"" << bar_w << "\" height=\"28\" fill=\""
          << to_hex(lerp_color(style.ramp_low, style.ramp_high, 0.5))
          << "\" stroke=\"#444444\"/>\n";
      svg << "    <text x=\"" << fmt2(bar_x + bar_w + 8) << "\" y=\"" << fmt2(bar_y + bar_h / 2 + 4)
          << "\">" << fmt3(lo) << "</text>\n";
    } else {
      const int steps = 64;
      const double step_h = bar_h / steps;
      for (int i = 0; i < steps; ++i) {
        const double t = (static_cast<double>(i) + 0.5) / steps;
        svg << "    <rect x=\"" << bar_x << "\" y=\"" << fmt2(bar_y + bar_h - (i + 1) * step_h)
            << "\" width=\"" << bar_w << "\" height=\"" << fmt2(step_h + 0.5) << "\" fill=\""
            << to_hex(lerp_color(style.ramp_low, style.ramp_high, t)) << "\"/>\n";
      }
      svg << "    <rect x=\"" << bar_x << "\" y=\"" << bar_y << "\" width=\"" << bar_w
          << "\" height=\"" << bar_h << "\" fill=\"none\" stroke=\"#444444\"/>\n";
      svg << "    <text x=\"" << fmt2(bar_x + bar_w + 8) << "\" y=\"" << fmt2(bar_y + 4) << "\">"
          << fmt3(hi) << "</text>\n";
      svg << "    <text x=\"" << fmt2(bar_x + bar_w + 8) << "\" y=\"" << fmt2(bar_y + bar_h + 4)
          << "\">" << fmt3(lo) << "</text>\n";
    }
    svg << "  </g>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

std::string render_prediction_analysis(const ConfusionByFacet& confusion,
                                       std::string_view title) {
  const double width = 680, height = 480;
  const double plot_x = 70, plot_y = 64, plot_w = 540, plot_h = 340;

  struct Bar {
    const char* name;
    const char* color;
    double rate;
  };
  auto bars_of = [](const FacetSideConfusion& side) {
    return std::vector<Bar>{{"tp", "#2f7ec8", side.tp_rate},
                            {"fp", "#d9583b", side.fp_rate},
                            {"tn", "#58a066", side.tn_rate},
                            {"fn", "#e0a53f", side.fn_rate}};
  };

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
  svg << "  <rect width=\"" << width << "\" height=\"" << height << "\" fill=\"#ffffff\"/>\n";
  svg << "  <text x=\"" << fmt2(width / 2) << "\" y=\"32\" font-family=\"sans-serif\" "
         "font-size=\"18\" text-anchor=\"middle\">"
      << xml_escape(title) << "</text>\n";

  // Axis and gridlines on a fixed [0, 1] scale.
  svg << "  <g font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">\n";
  for (int i = 0; i <= 4; ++i) {
    const double v = static_cast<double>(i) / 4.0;
    const double y = plot_y + plot_h * (1.0 - v);
    svg << "    <line x1=\"" << plot_x << "\" y1=\"" << fmt2(y) << "\" x2=\""
        << fmt2(plot_x + plot_w) << "\" y2=\"" << fmt2(y)
        << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    svg << "    <text x=\"" << fmt2(plot_x - 6) << "\" y=\"" << fmt2(y + 4) << "\">" << fmt2(v)
        << "</text>\n";
  }
  svg << "  </g>\n";
  svg << "  <line x1=\"" << plot_x << "\" y1=\"" << fmt2(plot_y + plot_h) << "\" x2=\""
      << fmt2(plot_x + plot_w) << "\" y2=\"" << fmt2(plot_y + plot_h)
      << "\" stroke=\"#444444\" stroke-width=\"1\"/>\n";

  const double bar_w = 44, gap = 10;
  const double cluster_w = 4 * bar_w + 3 * gap;
  auto draw_side = [&](const std::optional<FacetSideConfusion>& side, const char* side_id,
                       const std::string& caption, double center_x) {
    svg << "  <g id=\"facet-" << side_id << "\" font-family=\"sans-serif\">\n";
    svg << "    <text x=\"" << fmt2(center_x) << "\" y=\"" << fmt2(plot_y + plot_h + 40)
        << "\" font-size=\"14\" text-anchor=\"middle\">" << xml_escape(caption) << "</text>\n";
    if (!side) {
      svg << "    <text x=\"" << fmt2(center_x) << "\" y=\"" << fmt2(plot_y + plot_h / 2)
          << "\" font-size=\"13\" text-anchor=\"middle\" fill=\"#888888\">no members</text>\n";
      svg << "  </g>\n";
      return;
    }
    double x = center_x - cluster_w / 2.0;
    for (const auto& bar : bars_of(*side)) {
      const double h = plot_h * bar.rate;
      const double y = plot_y + plot_h - h;
      svg << "    <rect id=\"bar-" << side_id << "-" << bar.name << "\" x=\"" << fmt2(x)
          << "\" y=\"" << fmt2(y) << "\" width=\"" << bar_w << "\" height=\"" << fmt2(h)
          << "\" fill=\"" << bar.color << "\"/>\n";
      svg << "    <text x=\"" << fmt2(x + bar_w / 2) << "\" y=\"" << fmt2(y - 5)
          << "\" font-size=\"11\" text-anchor=\"middle\">" << fmt3(bar.rate) << "</text>\n";
      svg << "    <text x=\"" << fmt2(x + bar_w / 2) << "\" y=\"" << fmt2(plot_y + plot_h + 16)
          << "\" font-size=\"12\" text-anchor=\"middle\">" << bar.name << "</text>\n";
      x += bar_w + gap;
    }
    svg << "  </g>\n";
  };

  draw_side(confusion.facet_a, "a", "facet a (advantaged)", plot_x + plot_w * 0.27);
  draw_side(confusion.facet_d, "d", "facet d (disadvantaged)", plot_x + plot_w * 0.73);
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace biasaudit
