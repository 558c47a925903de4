#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace agecohort::geodesy {

struct GeoPoint {
  double lat = 0.0;
  double lon = 0.0;

  friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

// ETRS89-LAEA (EPSG:3035) map coordinates in meters.
struct LaeaPoint {
  double easting = 0.0;
  double northing = 0.0;

  friend bool operator==(const LaeaPoint&, const LaeaPoint&) = default;
};

// Lower-left corner of an EPSG:3035 grid cell.
struct GridCellId {
  std::int64_t resolution_m = 100;
  std::int64_t northing_m = 0;
  std::int64_t easting_m = 0;

  friend bool operator==(const GridCellId&, const GridCellId&) = default;
};

struct BoundingBox {
  double south = 0.0;
  double west = 0.0;
  double north = 0.0;
  double east = 0.0;

  bool contains(const GeoPoint& p) const {
    return p.lat >= south && p.lat <= north && p.lon >= west && p.lon <= east;
  }
  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

struct TileCoord {
  int z = 0;
  std::int64_t x = 0;
  std::int64_t y = 0;

  friend bool operator==(const TileCoord&, const TileCoord&) = default;
};

namespace laea {
// EPSG:3035 projection constants (GRS80 ellipsoid).
inline constexpr double kLatOriginDeg = 52.0;
inline constexpr double kLonOriginDeg = 10.0;
inline constexpr double kFalseEasting = 4321000.0;
inline constexpr double kFalseNorthing = 3210000.0;
inline constexpr double kSemiMajorAxis = 6378137.0;
inline constexpr double kInverseFlattening = 298.257222101;
// Inverse latitude iteration stops once the update is below this (radians).
inline constexpr double kInverseTolerance = 1e-12;

// EPSG:3035 area of use, degrees.
inline constexpr BoundingBox kAreaOfUse{24.60, -35.58, 84.73, 44.83};
}  // namespace laea

inline constexpr double kMaxMercatorLatDeg = 85.0511287798066;
inline constexpr int kMaxZoom = 22;

GeoPoint checked_geopoint(double lat, double lon);

GridCellId parse_grid_id(std::string_view text);
// INSPIRE long form, e.g. "CRS3035RES100mN3090500E4029700".
std::string compose_grid_id(const GridCellId& cell);

LaeaPoint wgs84_to_laea(const GeoPoint& p);
GeoPoint laea_to_wgs84(const LaeaPoint& p);

BoundingBox grid_to_bbox(const GridCellId& cell);

TileCoord lonlat_to_tile(const GeoPoint& p, int zoom);
BoundingBox tile_to_bbox(const TileCoord& t);

}  // namespace agecohort::geodesy
