#include "biasaudit/geometry.hpp"

#include <fstream>
#include <limits>
#include <set>

#include <json.hpp>

#include "biasaudit/errors.hpp"

namespace biasaudit {

const Region* GeometrySet::find(std::string_view name) const {
  for (const auto& r : regions) {
    if (r.name == name) return &r;
  }
  return nullptr;
}

Bounds GeometrySet::bounds() const {
  Bounds b;
  b.min_x = b.min_y = std::numeric_limits<double>::infinity();
  b.max_x = b.max_y = -std::numeric_limits<double>::infinity();
  for (const auto& region : regions) {
    for (const auto& poly : region.polygons) {
      for (const auto& ring : poly.rings) {
        for (const auto& p : ring.points) {
          b.min_x = std::min(b.min_x, p[0]);
          b.min_y = std::min(b.min_y, p[1]);
          b.max_x = std::max(b.max_x, p[0]);
          b.max_y = std::max(b.max_y, p[1]);
        }
      }
    }
  }
  return b;
}

namespace {

using nlohmann::json;

Ring parse_ring(const json& coords, const std::string& where) {
  if (!coords.is_array() || coords.size() < 4) {
    throw GeometryError(where + ": ring needs at least 4 positions");
  }
  Ring ring;
  ring.points.reserve(coords.size());
  for (const auto& pos : coords) {
    if (!pos.is_array() || pos.size() < 2 || !pos[0].is_number() || !pos[1].is_number()) {
      throw GeometryError(where + ": position must be [x, y]");
    }
    ring.points.push_back({pos[0].get<double>(), pos[1].get<double>()});
  }
  if (ring.points.front() != ring.points.back()) {
    throw GeometryError(where + ": ring is not closed (first point != last point)");
  }
  return ring;
}

Polygon parse_polygon(const json& coords, const std::string& where) {
  if (!coords.is_array() || coords.empty()) {
    throw GeometryError(where + ": polygon needs at least one ring");
  }
  Polygon poly;
  for (const auto& ring : coords) poly.rings.push_back(parse_ring(ring, where));
  return poly;
}

}  // namespace

GeometrySet load_geojson(const std::filesystem::path& path, std::string_view name_property) {
  std::ifstream in(path);
  if (!in) throw GeometryError("cannot open geometry file: " + path.string());

  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw GeometryError("invalid GeoJSON in " + path.string() + ": " + e.what());
  }

  if (doc.value("type", "") != "FeatureCollection" || !doc.contains("features")) {
    throw GeometryError(path.string() + ": expected a FeatureCollection");
  }

  GeometrySet set;
  std::set<std::string> seen;
  for (const auto& feature : doc["features"]) {
    const auto& props = feature.value("properties", json::object());
    if (!props.contains(name_property) || !props[std::string(name_property)].is_string()) {
      throw GeometryError(path.string() + ": feature without string property '" +
                          std::string(name_property) + "'");
    }
    Region region;
    region.name = props[std::string(name_property)].get<std::string>();
    if (!seen.insert(region.name).second) {
      throw GeometryError(path.string() + ": duplicate region name '" + region.name + "'");
    }
    const std::string where = path.string() + " region '" + region.name + "'";

    if (!feature.contains("geometry") || feature["geometry"].is_null()) {
      throw GeometryError(where + ": missing geometry");
    }
    const auto& geom = feature["geometry"];
    const std::string type = geom.value("type", "");
    const auto& coords = geom.value("coordinates", json::array());
    if (type == "Polygon") {
      region.polygons.push_back(parse_polygon(coords, where));
    } else if (type == "MultiPolygon") {
      for (const auto& poly : coords) region.polygons.push_back(parse_polygon(poly, where));
    } else {
      throw GeometryError(where + ": unsupported geometry type '" + type + "'");
    }
    set.regions.push_back(std::move(region));
  }
  if (set.regions.empty()) {
    throw GeometryError(path.string() + ": no regions found");
  }
  return set;
}

}  // namespace biasaudit
