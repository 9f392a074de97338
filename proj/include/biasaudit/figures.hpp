#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "biasaudit/evaluation.hpp"
#include "biasaudit/geometry.hpp"

namespace biasaudit {

struct Rgb {
  int r = 0, g = 0, b = 0;
};

std::optional<Rgb> parse_hex_color(std::string_view s);  // "#rrggbb"
std::string to_hex(const Rgb& c);

// Channel-wise linear interpolation; t is clamped to [0, 1] and rounded to
// the nearest integer channel value.
Rgb lerp_color(const Rgb& lo, const Rgb& hi, double t);

struct ChoroplethStyle {
  std::string title;
  Rgb ramp_low{246, 250, 255};  // #f6faff
  Rgb ramp_high{8, 48, 107};    // #08306b
  // Fixed value range; when absent the observed finite min/max is used (and
  // printed in the legend).
  std::optional<std::pair<double, double>> range;
};

struct RegionValue {
  std::string group;
  std::optional<double> value;  // absent or non-finite renders hatched
};

// Standalone SVG choropleth: one filled path per region, hatched fill for
// null values, a labeled color bar, and per-region value annotations.
// Throws GeometryError listing every group without matching geometry.
std::string render_choropleth(const std::vector<RegionValue>& values,
                              const GeometrySet& geometry, const ChoroplethStyle& style);

// Standalone SVG bar chart: two clusters (facet a, facet d) of four bars
// (normalized tp, fp, tn, fn) on a [0, 1] axis, values printed above bars.
std::string render_prediction_analysis(const ConfusionByFacet& confusion,
                                       std::string_view title);

}  // namespace biasaudit
