#include "agecohort/connectors.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "agecohort/csv.hpp"
#include "agecohort/error.hpp"
#include "agecohort/html.hpp"
#include "agecohort/io.hpp"
#include "agecohort/normalize.hpp"

namespace agecohort::connectors {
namespace {

struct RingMoments {
  double area2 = 0.0;  // twice the signed area
  double cx = 0.0;
  double cy = 0.0;
  double extent = 0.0;
};

// Shoelace sums relative to the first vertex to keep the cross products small.
RingMoments ring_moments(const std::vector<GeoPoint>& ring) {
  RingMoments m;
  if (ring.size() < 2) return m;
  const double x0 = ring.front().lon;
  const double y0 = ring.front().lat;
  double min_x = 0, max_x = 0, min_y = 0, max_y = 0;
  for (std::size_t i = 0; i + 1 < ring.size(); ++i) {
    const double xi = ring[i].lon - x0, yi = ring[i].lat - y0;
    const double xj = ring[i + 1].lon - x0, yj = ring[i + 1].lat - y0;
    const double cross = xi * yj - xj * yi;
    m.area2 += cross;
    m.cx += (xi + xj) * cross;
    m.cy += (yi + yj) * cross;
    min_x = std::min(min_x, xi);
    max_x = std::max(max_x, xi);
    min_y = std::min(min_y, yi);
    max_y = std::max(max_y, yi);
  }
  m.extent = std::max(max_x - min_x, max_y - min_y);
  return m;
}

bool degenerate(const RingMoments& m) {
  return m.extent == 0.0 || std::abs(m.area2) <= 1e-12 * m.extent * m.extent;
}

std::string header_value(const std::map<std::string, std::string>& headers, std::string_view name) {
  for (const auto& [k, v] : headers) {
    if (k.size() == name.size() &&
        std::equal(k.begin(), k.end(), name.begin(), [](char a, char b) { return std::tolower(a) == std::tolower(b); })) {
      return v;
    }
  }
  return {};
}

std::string bbox_clause(const BoundingBox& box) {
  return "(" + format_fixed(box.south, 7) + "," + format_fixed(box.west, 7) + "," + format_fixed(box.north, 7) + "," +
         format_fixed(box.east, 7) + ")";
}

std::string resolve_url(std::string_view page_url, std::string_view href) {
  if (href.find("://") != std::string_view::npos) return std::string(href);
  const auto scheme = page_url.find("://");
  if (!href.empty() && href.front() == '/') {
    const auto path = scheme == std::string_view::npos ? std::string_view::npos : page_url.find('/', scheme + 3);
    return std::string(page_url.substr(0, path)) + std::string(href);
  }
  const auto slash = page_url.rfind('/');
  if (slash == std::string_view::npos || (scheme != std::string_view::npos && slash < scheme + 3)) {
    return std::string(page_url) + "/" + std::string(href);
  }
  return std::string(page_url.substr(0, slash + 1)) + std::string(href);
}

}  // namespace

double ring_area(const std::vector<GeoPoint>& ring) { return ring_moments(ring).area2 / 2.0; }

BuildingFootprint make_footprint(std::string way_id, std::vector<GeoPoint> ring,
                                 std::map<std::string, std::string> tags) {
  if (ring.size() < 4 || !(ring.front() == ring.back())) {
    throw Error(ErrorCode::DegeneratePolygon, "way " + way_id + ": ring must be closed with at least 4 points");
  }
  if (degenerate(ring_moments(ring))) {
    throw Error(ErrorCode::DegeneratePolygon, "way " + way_id + ": zero area");
  }
  return {std::move(way_id), std::move(ring), std::move(tags)};
}

GeoPoint representative_point(const BuildingFootprint& footprint) {
  const auto m = ring_moments(footprint.polygon);
  if (footprint.polygon.size() < 4 || degenerate(m)) {
    throw Error(ErrorCode::DegeneratePolygon, "way " + footprint.way_id + ": zero area");
  }
  const double x0 = footprint.polygon.front().lon;
  const double y0 = footprint.polygon.front().lat;
  return {y0 + m.cy / (3.0 * m.area2), x0 + m.cx / (3.0 * m.area2)};
}

std::string building_query(const BoundingBox& box, int timeout_secs) {
  return "[out:json][timeout:" + std::to_string(timeout_secs) + "];way[\"building\"]" + bbox_clause(box) + ";out geom;";
}

std::string year_tag_query(const BoundingBox& box, int timeout_secs) {
  const std::string clause = bbox_clause(box);
  return "[out:json][timeout:" + std::to_string(timeout_secs) + "];way[\"building\"][\"building:start_date\"]" +
         clause + ";way[\"building\"][\"building:year_built\"]" + clause + ";out geom;";
}

std::vector<BuildingFootprint> parse_overpass_ways(std::string_view body) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(body);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedResponse, std::string("overpass body: ") + e.what());
  }
  if (!j.is_object() || !j.contains("elements") || !j["elements"].is_array()) {
    throw Error(ErrorCode::MalformedResponse, "overpass body has no elements array");
  }
  std::vector<BuildingFootprint> out;
  for (const auto& el : j["elements"]) {
    try {
      if (el.value("type", "") != "way" || !el.contains("geometry")) continue;
      std::vector<GeoPoint> ring;
      for (const auto& node : el.at("geometry")) {
        ring.push_back(geodesy::checked_geopoint(node.at("lat").get<double>(), node.at("lon").get<double>()));
      }
      std::map<std::string, std::string> tags;
      if (el.contains("tags")) {
        for (const auto& [k, v] : el["tags"].items()) {
          tags[k] = v.is_string() ? v.get<std::string>() : v.dump();
        }
      }
      const std::string id = el.at("id").is_string() ? el.at("id").get<std::string>() : el.at("id").dump();
      out.push_back(make_footprint(id, std::move(ring), std::move(tags)));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::MalformedResponse, std::string("overpass element: ") + e.what());
    } catch (const Error& e) {
      spdlog::debug("skipping way: {}", e.what());
    }
  }
  return out;
}

OverpassClient::OverpassClient(std::string endpoint, std::shared_ptr<net::HttpTransport> transport, int timeout_secs)
    : endpoint_(std::move(endpoint)), transport_(std::move(transport)), timeout_secs_(timeout_secs) {}

std::vector<BuildingFootprint> OverpassClient::run(const std::string& query) const {
  const net::HttpRequest request{"POST", endpoint_, "data=" + net::url_encode(query),
                                 "application/x-www-form-urlencoded"};
  const auto response = transport_->send(request);
  if (response.status == 429) {
    int retry_after = 60;
    const auto header = header_value(response.headers, "Retry-After");
    try {
      if (!header.empty()) retry_after = static_cast<int>(parse_integer(header));
    } catch (const Error&) {
    }
    throw RateLimitedError("overpass rate limit", retry_after);
  }
  if (response.status >= 500) {
    throw Error(ErrorCode::NetworkError, "overpass HTTP " + std::to_string(response.status));
  }
  if (response.status != 200) {
    throw Error(ErrorCode::MalformedResponse, "overpass HTTP " + std::to_string(response.status));
  }
  return parse_overpass_ways(response.body);
}

std::vector<BuildingFootprint> fetch_buildings_in_bbox(const BoundingBox& box, const OverpassClient& client) {
  auto all = client.run(building_query(box, client.timeout_secs()));
  std::vector<BuildingFootprint> inside;
  for (auto& f : all) {
    if (box.contains(representative_point(f))) inside.push_back(std::move(f));
  }
  return inside;
}

std::vector<TaggedFootprint> extract_year_tagged_buildings(const std::vector<BuildingFootprint>& footprints) {
  std::vector<TaggedFootprint> out;
  for (const auto& f : footprints) {
    for (auto tag : {kStartDateTag, kYearBuiltTag}) {
      if (auto it = f.tags.find(std::string(tag)); it != f.tags.end() && !it->second.empty()) {
        out.push_back({f, it->second});
        break;
      }
    }
  }
  return out;
}

std::vector<MonumentEntry> scrape_monument_entries(std::string_view html, const MonumentSelectors& selectors,
                                                   std::string_view page_url) {
  const auto doc = html::Document::parse(html);
  const auto entries = doc.select(selectors.entry);
  if (entries.empty()) {
    throw Error(ErrorCode::SelectorMiss, "no element matches '" + selectors.entry + "' on " + std::string(page_url));
  }
  auto first_text = [&](html::NodeId scope, const std::string& selector) -> std::string {
    if (selector.empty()) return {};
    const auto found = doc.select(selector, scope);
    return found.empty() ? std::string{} : doc.text(found.front());
  };
  std::vector<MonumentEntry> out;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    MonumentEntry e;
    e.address_text = first_text(entries[i], selectors.address);
    e.description_text = first_text(entries[i], selectors.description);
    if (e.address_text.empty() && e.description_text.empty()) continue;
    if (!selectors.link.empty()) {
      const auto links = doc.select(selectors.link, entries[i]);
      if (!links.empty()) {
        if (auto href = doc.attribute(links.front(), selectors.link_attribute); href && !href->empty()) {
          e.url = resolve_url(page_url, *href);
        }
      }
    }
    if (e.url.empty()) e.url = std::string(page_url) + "#entry-" + std::to_string(i);
    out.push_back(std::move(e));
  }
  return out;
}

AnnotatorResponse RuleBasedAnnotator::annotate(const MonumentEntry& entry) {
  const auto result = normalize::normalize_temporal(entry.description_text);
  return {result.year};
}

RemoteAnnotator::RemoteAnnotator(std::string endpoint, std::shared_ptr<net::HttpTransport> transport)
    : endpoint_(std::move(endpoint)), transport_(std::move(transport)) {}

std::string RemoteAnnotator::request_body(const std::string& text) {
  nlohmann::ordered_json j;
  j["text"] = text;
  j["cohorts"] = nlohmann::json::array();
  for (auto c : kAllCohorts) j["cohorts"].push_back(std::string(to_string(c)));
  return j.dump();
}

AnnotatorResponse RemoteAnnotator::annotate(const MonumentEntry& entry) {
  const std::string& text = entry.description_text.empty() ? entry.address_text : entry.description_text;
  net::HttpResponse response;
  try {
    response = transport_->send({"POST", endpoint_, request_body(text), "application/json"});
  } catch (const Error& e) {
    throw Error(ErrorCode::AnnotatorUnavailable, e.what());
  }
  if (response.status != 200) {
    throw Error(ErrorCode::AnnotatorUnavailable, "annotator HTTP " + std::to_string(response.status));
  }
  return parse_annotator_reply(response.body);
}

AnnotatorResponse parse_annotator_reply(std::string_view body) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(body);
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorCode::ContractViolation, "annotator reply is not JSON");
  }
  if (!j.is_object() || j.size() != 1 || !j.contains("construction_year")) {
    throw Error(ErrorCode::ContractViolation, "annotator reply must be exactly {\"construction_year\": ...}");
  }
  const auto& v = j["construction_year"];
  if (v.is_null()) return {};
  if (!v.is_number_integer()) {
    throw Error(ErrorCode::ContractViolation, "construction_year must be an integer or null");
  }
  return {v.get<int>()};
}

AnnotatorResponse annotate_year(const MonumentEntry& entry, Annotator& annotator) {
  auto response = annotator.annotate(entry);
  if (response.construction_year && !is_plausible_year(*response.construction_year)) {
    spdlog::warn("annotator returned implausible year {} for {}; using null", *response.construction_year, entry.url);
    response.construction_year.reset();
  }
  return response;
}

ZensusLabelMap ZensusLabelMap::from_csv_text(std::string_view text) {
  const auto table = csv::Table::from_text(text);
  const auto label = table.column("label");
  const auto year = table.column("year_raw");
  ZensusLabelMap m;
  for (const auto& row : table.rows()) {
    if (row[year].empty()) throw Error(ErrorCode::ParseError, "empty year_raw for census label " + row[label]);
    m.map_[row[label]] = row[year];
  }
  return m;
}

ZensusLabelMap ZensusLabelMap::load(const std::filesystem::path& path) { return from_csv_text(io::read_file(path)); }

const std::string& ZensusLabelMap::year_raw(const std::string& label) const {
  auto it = map_.find(label);
  if (it == map_.end()) throw Error(ErrorCode::ParseError, "unknown census period label: " + label);
  return it->second;
}

std::vector<ZensusCell> read_zensus_cells(std::string_view csv_text, const ZensusLabelMap& labels) {
  const auto table = csv::Table::from_text(csv_text);
  const auto id = table.column("grid_id");
  const auto label = table.column("period_label");
  std::vector<ZensusCell> out;
  for (const auto& row : table.rows()) {
    if (!labels.contains(row[label])) {
      throw Error(ErrorCode::ParseError, "unknown census period label: " + row[label]);
    }
    out.push_back({geodesy::parse_grid_id(row[id]), row[label]});
  }
  return out;
}

AgentRun run_zensus_agent(const std::vector<ZensusCell>& cells, const OverpassClient& client,
                          const ZensusLabelMap& labels) {
  AgentRun run;
  for (const auto& cell : cells) {
    try {
      const auto box = geodesy::grid_to_bbox(cell.grid_id);
      const auto& year_raw = labels.year_raw(cell.period_label);
      std::vector<RawRecord> cell_records;
      for (const auto& f : fetch_buildings_in_bbox(box, client)) {
        cell_records.push_back(make_raw_record(representative_point(f), year_raw, Source::Zensus));
      }
      run.records.insert(run.records.end(), cell_records.begin(), cell_records.end());
    } catch (const Error& e) {
      const std::string msg = geodesy::compose_grid_id(cell.grid_id) + ": " + e.what();
      spdlog::warn("zensus cell skipped: {}", msg);
      run.skipped.push_back(msg);
    }
  }
  return run;
}

AgentRun run_osm_agent(const BoundingBox& box, const OverpassClient& client) {
  AgentRun run;
  std::vector<BuildingFootprint> inside;
  for (auto& f : client.run(year_tag_query(box, client.timeout_secs()))) {
    if (box.contains(representative_point(f))) inside.push_back(std::move(f));
  }
  for (const auto& tagged : extract_year_tagged_buildings(inside)) {
    run.records.push_back(make_raw_record(representative_point(tagged.footprint), tagged.year_raw, Source::OSM));
  }
  return run;
}

AgentRun run_monument_agent(const std::vector<std::string>& page_urls, net::HttpTransport& transport,
                            const MonumentAgentConfig& config, Annotator& annotator,
                            inference::GeocoderBackend& geocoder) {
  AgentRun run;
  bool any_page_scraped = false;
  std::optional<Error> selector_miss;
  for (const auto& url : page_urls) {
    std::vector<MonumentEntry> entries;
    try {
      const auto response = transport.send({"GET", url, "", ""});
      if (response.status != 200) {
        throw Error(ErrorCode::NetworkError, "HTTP " + std::to_string(response.status));
      }
      entries = scrape_monument_entries(response.body, config.selectors, url);
      any_page_scraped = true;
    } catch (const Error& e) {
      if (e.code() == ErrorCode::SelectorMiss) selector_miss = e;
      spdlog::warn("monument page skipped: {}: {}", url, e.what());
      run.skipped.push_back(url + ": " + e.what());
      continue;
    }
    for (const auto& entry : entries) {
      try {
        const auto annotation = annotate_year(entry, annotator);
        if (!annotation.construction_year) {
          run.skipped.push_back(entry.url + ": no construction year");
          continue;
        }
        const auto address = normalize::parse_address(entry.address_text);
        const auto point = inference::geocode(address, geocoder, config.city_box);
        run.records.push_back(make_raw_record(point, std::to_string(*annotation.construction_year), Source::Monument));
      } catch (const Error& e) {
        if (e.code() == ErrorCode::AnnotatorUnavailable) throw;
        spdlog::warn("monument entry skipped: {}: {}", entry.url, e.what());
        run.skipped.push_back(entry.url + ": " + e.what());
      }
    }
  }
  if (!any_page_scraped && selector_miss) throw *selector_miss;
  return run;
}

}  // namespace agecohort::connectors
