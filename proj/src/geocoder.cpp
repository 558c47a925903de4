#include "agecohort/geocoder.hpp"

#include <nlohmann/json.hpp>

#include "agecohort/error.hpp"
#include "agecohort/io.hpp"
#include "agecohort/records.hpp"

namespace agecohort::inference {
namespace {

double number_or_string(const nlohmann::json& v) {
  // Nominatim encodes coordinates as strings.
  return v.is_string() ? parse_double(v.get<std::string>()) : v.get<double>();
}

std::vector<GeoPoint> parse_candidates(const nlohmann::json& arr) {
  std::vector<GeoPoint> out;
  for (const auto& c : arr) {
    out.push_back(geodesy::checked_geopoint(number_or_string(c.at("lat")), number_or_string(c.at("lon"))));
  }
  return out;
}

}  // namespace

FixtureGeocoder FixtureGeocoder::from_json_text(const std::string& text) {
  FixtureGeocoder g;
  try {
    const auto j = nlohmann::json::parse(text);
    for (const auto& [key, arr] : j.items()) {
      g.table_[key] = parse_candidates(arr);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("geocoder fixture: ") + e.what());
  }
  return g;
}

FixtureGeocoder FixtureGeocoder::load(const std::filesystem::path& path) {
  return from_json_text(io::read_file(path));
}

std::vector<GeoPoint> FixtureGeocoder::candidates(const normalize::Address& address) {
  auto it = table_.find(normalize::format_address(address));
  return it == table_.end() ? std::vector<GeoPoint>{} : it->second;
}

HttpGeocoder::HttpGeocoder(std::string endpoint, std::shared_ptr<net::HttpTransport> transport)
    : endpoint_(std::move(endpoint)), transport_(std::move(transport)) {}

std::vector<GeoPoint> HttpGeocoder::candidates(const normalize::Address& address) {
  const std::string url = endpoint_ + (endpoint_.find('?') == std::string::npos ? "?" : "&") +
                          "format=json&street=" + net::url_encode(address.house_number + " " + address.street) +
                          "&city=" + net::url_encode(address.city);
  const auto response = transport_->send({"GET", url, "", ""});
  if (response.status != 200) {
    throw Error(ErrorCode::NetworkError, "geocoder returned HTTP " + std::to_string(response.status));
  }
  try {
    return parse_candidates(nlohmann::json::parse(response.body));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedResponse, std::string("geocoder: ") + e.what());
  }
}

GeoPoint geocode(const normalize::Address& address, GeocoderBackend& backend, const BoundingBox& city_box) {
  const auto found = backend.candidates(address);
  if (found.empty()) {
    throw Error(ErrorCode::GeocodeMiss, normalize::format_address(address));
  }
  for (const auto& p : found) {
    if (city_box.contains(p)) return p;
  }
  throw Error(ErrorCode::AmbiguousOutsideCity, "every candidate for " + normalize::format_address(address) + " lies outside the city box");
}

}  // namespace agecohort::inference
