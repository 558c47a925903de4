#include "agecohort/geodesy.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <numbers>
#include <regex>

#include "agecohort/error.hpp"

namespace agecohort::geodesy {
namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr double kRadToDeg = 180.0 / std::numbers::pi;

// Derived GRS80 / EPSG:3035 quantities shared by both directions.
struct LaeaConstants {
  double e2;
  double e;
  double qp;
  double rq;
  double d;
  double sin_beta0;
  double cos_beta0;
  double lat0;
  double lon0;

  double q(double sin_phi) const {
    const double es = e * sin_phi;
    return (1.0 - e2) * (sin_phi / (1.0 - es * es) - (1.0 / (2.0 * e)) * std::log((1.0 - es) / (1.0 + es)));
  }

  LaeaConstants() {
    const double f = 1.0 / laea::kInverseFlattening;
    e2 = 2.0 * f - f * f;
    e = std::sqrt(e2);
    lat0 = laea::kLatOriginDeg * kDegToRad;
    lon0 = laea::kLonOriginDeg * kDegToRad;
    qp = q(1.0);
    const double q0 = q(std::sin(lat0));
    const double beta0 = std::asin(q0 / qp);
    sin_beta0 = std::sin(beta0);
    cos_beta0 = std::cos(beta0);
    rq = laea::kSemiMajorAxis * std::sqrt(qp / 2.0);
    const double s0 = std::sin(lat0);
    d = laea::kSemiMajorAxis * (std::cos(lat0) / std::sqrt(1.0 - e2 * s0 * s0)) / (rq * cos_beta0);
  }
};

const LaeaConstants& constants() {
  static const LaeaConstants c;
  return c;
}

std::int64_t parse_int(const std::string& s) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw Error(ErrorCode::MalformedGridId, "integer out of range: " + s);
  }
  return v;
}

}  // namespace

GeoPoint checked_geopoint(double lat, double lon) {
  if (!std::isfinite(lat) || !std::isfinite(lon) || lat < -90.0 || lat > 90.0 || lon < -180.0 || lon > 180.0) {
    throw Error(ErrorCode::InvalidArgument, "coordinate outside WGS84 range");
  }
  return {lat, lon};
}

GridCellId parse_grid_id(std::string_view text) {
  static const std::regex kLong(R"(^CRS3035RES([0-9]+)mN([0-9]+)E([0-9]+)$)");
  static const std::regex kShort(R"(^([0-9]+)mN([0-9]+)E([0-9]+)$)");
  const std::string s(text);
  std::smatch m;
  GridCellId cell;
  if (std::regex_match(s, m, kLong)) {
    cell = {parse_int(m[1]), parse_int(m[2]), parse_int(m[3])};
  } else if (std::regex_match(s, m, kShort)) {
    cell = {parse_int(m[1]), parse_int(m[2]) * 100, parse_int(m[3]) * 100};
  } else {
    throw Error(ErrorCode::MalformedGridId, "not a grid id: " + s);
  }
  if (cell.resolution_m <= 0) {
    throw Error(ErrorCode::MalformedGridId, "resolution must be positive: " + s);
  }
  if (cell.northing_m % cell.resolution_m != 0 || cell.easting_m % cell.resolution_m != 0) {
    throw Error(ErrorCode::NonAlignedCorner, "corner not a multiple of resolution: " + s);
  }
  return cell;
}

std::string compose_grid_id(const GridCellId& cell) {
  return "CRS3035RES" + std::to_string(cell.resolution_m) + "mN" + std::to_string(cell.northing_m) + "E" +
         std::to_string(cell.easting_m);
}

LaeaPoint wgs84_to_laea(const GeoPoint& p) {
  if (!std::isfinite(p.lat) || !std::isfinite(p.lon) || !laea::kAreaOfUse.contains(p)) {
    throw Error(ErrorCode::OutOfDomain, "point outside EPSG:3035 area of use");
  }
  const auto& c = constants();
  const double phi = p.lat * kDegToRad;
  const double dlam = p.lon * kDegToRad - c.lon0;
  const double beta = std::asin(std::clamp(c.q(std::sin(phi)) / c.qp, -1.0, 1.0));
  const double sin_beta = std::sin(beta);
  const double cos_beta = std::cos(beta);
  const double denom = 1.0 + c.sin_beta0 * sin_beta + c.cos_beta0 * cos_beta * std::cos(dlam);
  const double b = c.rq * std::sqrt(2.0 / denom);
  return {laea::kFalseEasting + b * c.d * cos_beta * std::sin(dlam),
          laea::kFalseNorthing + (b / c.d) * (c.cos_beta0 * sin_beta - c.sin_beta0 * cos_beta * std::cos(dlam))};
}

GeoPoint laea_to_wgs84(const LaeaPoint& p) {
  if (!std::isfinite(p.easting) || !std::isfinite(p.northing)) {
    throw Error(ErrorCode::OutOfDomain, "non-finite map coordinate");
  }
  const auto& c = constants();
  const double x = p.easting - laea::kFalseEasting;
  const double y = p.northing - laea::kFalseNorthing;
  const double rho = std::hypot(x / c.d, c.d * y);
  if (rho == 0.0) {
    return {laea::kLatOriginDeg, laea::kLonOriginDeg};
  }
  const double ratio = rho / (2.0 * c.rq);
  if (ratio > 1.0) {
    throw Error(ErrorCode::OutOfDomain, "map coordinate outside the projection disc");
  }
  const double cc = 2.0 * std::asin(ratio);
  const double sin_c = std::sin(cc);
  const double cos_c = std::cos(cc);
  const double beta = std::asin(std::clamp(cos_c * c.sin_beta0 + (c.d * y * sin_c * c.cos_beta0) / rho, -1.0, 1.0));
  const double lam = c.lon0 + std::atan2(x * sin_c, c.d * rho * c.cos_beta0 * cos_c - c.d * c.d * y * c.sin_beta0 * sin_c);

  const double q = c.qp * std::sin(beta);
  double phi = std::asin(std::clamp(q / 2.0, -1.0, 1.0));
  for (int i = 0; i < 50; ++i) {
    const double s = std::sin(phi);
    const double es2 = c.e2 * s * s;
    const double cos_phi = std::cos(phi);
    if (cos_phi < 1e-15) {
      break;
    }
    const double delta = ((1.0 - es2) * (1.0 - es2) / (2.0 * cos_phi)) *
                         (q / (1.0 - c.e2) - s / (1.0 - es2) +
                          (1.0 / (2.0 * c.e)) * std::log((1.0 - c.e * s) / (1.0 + c.e * s)));
    phi += delta;
    if (std::abs(delta) < laea::kInverseTolerance) {
      break;
    }
  }
  double lon = lam * kRadToDeg;
  if (lon > 180.0) lon -= 360.0;
  if (lon < -180.0) lon += 360.0;
  return {std::clamp(phi * kRadToDeg, -90.0, 90.0), lon};
}

BoundingBox grid_to_bbox(const GridCellId& cell) {
  const double e0 = static_cast<double>(cell.easting_m);
  const double n0 = static_cast<double>(cell.northing_m);
  const double r = static_cast<double>(cell.resolution_m);
  const std::array<GeoPoint, 4> corners{laea_to_wgs84({e0, n0}), laea_to_wgs84({e0 + r, n0}),
                                        laea_to_wgs84({e0, n0 + r}), laea_to_wgs84({e0 + r, n0 + r})};
  BoundingBox box{corners[0].lat, corners[0].lon, corners[0].lat, corners[0].lon};
  for (const auto& g : corners) {
    box.south = std::min(box.south, g.lat);
    box.north = std::max(box.north, g.lat);
    box.west = std::min(box.west, g.lon);
    box.east = std::max(box.east, g.lon);
  }
  return box;
}

TileCoord lonlat_to_tile(const GeoPoint& p, int zoom) {
  if (zoom < 0 || zoom > kMaxZoom) {
    throw Error(ErrorCode::InvalidArgument, "zoom must be in [0, 22]");
  }
  if (!std::isfinite(p.lat) || std::abs(p.lat) > kMaxMercatorLatDeg) {
    throw Error(ErrorCode::LatitudeOutOfMercatorRange, "latitude beyond Web-Mercator limit");
  }
  if (!std::isfinite(p.lon) || p.lon < -180.0 || p.lon > 180.0) {
    throw Error(ErrorCode::InvalidArgument, "longitude outside [-180, 180]");
  }
  const double n = std::ldexp(1.0, zoom);
  const auto max_index = static_cast<std::int64_t>(n) - 1;
  const double lat_rad = p.lat * kDegToRad;
  const auto x = static_cast<std::int64_t>(std::floor((p.lon + 180.0) / 360.0 * n));
  const auto y = static_cast<std::int64_t>(std::floor((1.0 - std::asinh(std::tan(lat_rad)) / std::numbers::pi) / 2.0 * n));
  return {zoom, std::clamp<std::int64_t>(x, 0, max_index), std::clamp<std::int64_t>(y, 0, max_index)};
}

BoundingBox tile_to_bbox(const TileCoord& t) {
  const double n = std::ldexp(1.0, t.z);
  if (t.z < 0 || t.z > kMaxZoom || t.x < 0 || t.y < 0 || static_cast<double>(t.x) >= n ||
      static_cast<double>(t.y) >= n) {
    throw Error(ErrorCode::InvalidArgument, "tile index outside [0, 2^z)");
  }
  auto lat_of = [n](double y) {
    return std::atan(std::sinh(std::numbers::pi * (1.0 - 2.0 * y / n))) * kRadToDeg;
  };
  const double x = static_cast<double>(t.x);
  const double y = static_cast<double>(t.y);
  return {lat_of(y + 1.0), x / n * 360.0 - 180.0, lat_of(y), (x + 1.0) / n * 360.0 - 180.0};
}

}  // namespace agecohort::geodesy
