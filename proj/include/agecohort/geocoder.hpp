#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "agecohort/geodesy.hpp"
#include "agecohort/normalize.hpp"
#include "agecohort/transport.hpp"

namespace agecohort::inference {

using geodesy::BoundingBox;
using geodesy::GeoPoint;

class GeocoderBackend {
 public:
  virtual ~GeocoderBackend() = default;
  // Candidate points in backend ranking order; empty when nothing matched.
  virtual std::vector<GeoPoint> candidates(const normalize::Address& address) = 0;
};

// Offline resolver: JSON object mapping "<street> <number>, <city>" to [{"lat":..,"lon":..}, ...].
class FixtureGeocoder : public GeocoderBackend {
 public:
  static FixtureGeocoder load(const std::filesystem::path& path);
  static FixtureGeocoder from_json_text(const std::string& text);
  std::vector<GeoPoint> candidates(const normalize::Address& address) override;

 private:
  std::map<std::string, std::vector<GeoPoint>> table_;
};

// Nominatim-compatible search endpoint: GET {url}?format=json&street=..&city=..
class HttpGeocoder : public GeocoderBackend {
 public:
  HttpGeocoder(std::string endpoint, std::shared_ptr<net::HttpTransport> transport);
  std::vector<GeoPoint> candidates(const normalize::Address& address) override;

 private:
  std::string endpoint_;
  std::shared_ptr<net::HttpTransport> transport_;
};

// First candidate inside city_box. Throws GeocodeMiss with no candidates,
// AmbiguousOutsideCity when every candidate lies outside the box.
GeoPoint geocode(const normalize::Address& address, GeocoderBackend& backend, const BoundingBox& city_box);

}  // namespace agecohort::inference
