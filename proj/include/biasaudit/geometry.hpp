#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace biasaudit {

using Point = std::array<double, 2>;

struct Ring {
  std::vector<Point> points;  // closed: first point == last point
};

struct Polygon {
  std::vector<Ring> rings;  // outer ring first, holes after
};

struct Region {
  std::string name;
  std::vector<Polygon> polygons;
};

struct Bounds {
  double min_x = 0, min_y = 0, max_x = 0, max_y = 0;
};

struct GeometrySet {
  std::vector<Region> regions;

  const Region* find(std::string_view name) const;
  Bounds bounds() const;
};

// Loads a GeoJSON FeatureCollection of Polygon/MultiPolygon features in
// planar coordinates. Region names come from the given feature property.
// Throws GeometryError on structural problems (unclosed rings, missing
// names, duplicates).
GeometrySet load_geojson(const std::filesystem::path& path,
                         std::string_view name_property = "name");

}  // namespace biasaudit
