#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "agecohort/geocoder.hpp"
#include "agecohort/geodesy.hpp"
#include "agecohort/records.hpp"
#include "agecohort/transport.hpp"

namespace agecohort::connectors {

using geodesy::BoundingBox;
using geodesy::GeoPoint;
using geodesy::GridCellId;

struct BuildingFootprint {
  std::string way_id;
  std::vector<GeoPoint> polygon;  // closed ring, first == last
  std::map<std::string, std::string> tags;
};

// Validates ring closure, size >= 4 and non-zero area.
BuildingFootprint make_footprint(std::string way_id, std::vector<GeoPoint> ring,
                                 std::map<std::string, std::string> tags);

// Signed shoelace area in squared degrees (lon as x, lat as y).
double ring_area(const std::vector<GeoPoint>& ring);
// Area-weighted centroid of the ring. Throws DegeneratePolygon for zero area.
GeoPoint representative_point(const BuildingFootprint& footprint);

// ---- Overpass --------------------------------------------------------------

inline constexpr int kDefaultOverpassTimeout = 25;

std::string building_query(const BoundingBox& box, int timeout_secs);
std::string year_tag_query(const BoundingBox& box, int timeout_secs);

// Parses an Overpass JSON body into footprints; ways with invalid rings are skipped.
std::vector<BuildingFootprint> parse_overpass_ways(std::string_view body);

class OverpassClient {
 public:
  OverpassClient(std::string endpoint, std::shared_ptr<net::HttpTransport> transport,
                 int timeout_secs = kDefaultOverpassTimeout);

  // Raw footprints for a query. NetworkError, RateLimited or MalformedResponse on failure.
  std::vector<BuildingFootprint> run(const std::string& query) const;
  int timeout_secs() const { return timeout_secs_; }

 private:
  std::string endpoint_;
  std::shared_ptr<net::HttpTransport> transport_;
  int timeout_secs_;
};

// Building footprints whose representative point lies inside box.
std::vector<BuildingFootprint> fetch_buildings_in_bbox(const BoundingBox& box, const OverpassClient& client);

struct TaggedFootprint {
  BuildingFootprint footprint;
  std::string year_raw;
};

inline constexpr std::string_view kStartDateTag = "building:start_date";
inline constexpr std::string_view kYearBuiltTag = "building:year_built";

// Keeps footprints carrying a date tag; building:start_date wins over building:year_built.
std::vector<TaggedFootprint> extract_year_tagged_buildings(const std::vector<BuildingFootprint>& footprints);

// ---- Monument registry -----------------------------------------------------

struct MonumentEntry {
  std::string url;
  std::string address_text;
  std::string description_text;

  friend bool operator==(const MonumentEntry&, const MonumentEntry&) = default;
};

// Element selectors describing where entries live on a registry page.
struct MonumentSelectors {
  std::string entry = ".monument";
  std::string address = ".address";
  std::string description = ".description";
  std::string link = "a";
  std::string link_attribute = "href";
};

// Throws SelectorMiss when the entry selector matches nothing.
std::vector<MonumentEntry> scrape_monument_entries(std::string_view html, const MonumentSelectors& selectors,
                                                   std::string_view page_url);

struct AnnotatorResponse {
  std::optional<int> construction_year;

  friend bool operator==(const AnnotatorResponse&, const AnnotatorResponse&) = default;
};

class Annotator {
 public:
  virtual ~Annotator() = default;
  virtual AnnotatorResponse annotate(const MonumentEntry& entry) = 0;
};

// Year from the temporal normalizer on the description text; null when it finds no year.
class RuleBasedAnnotator : public Annotator {
 public:
  AnnotatorResponse annotate(const MonumentEntry& entry) override;
};

// POSTs {"text": .., "cohorts": [..]} and expects exactly {"construction_year": <int|null>}.
class RemoteAnnotator : public Annotator {
 public:
  RemoteAnnotator(std::string endpoint, std::shared_ptr<net::HttpTransport> transport);
  AnnotatorResponse annotate(const MonumentEntry& entry) override;

  static std::string request_body(const std::string& text);

 private:
  std::string endpoint_;
  std::shared_ptr<net::HttpTransport> transport_;
};

// Strict parse of the annotator reply. Throws ContractViolation.
AnnotatorResponse parse_annotator_reply(std::string_view body);

// Annotates and coerces years outside the plausibility window to null (with a warning).
AnnotatorResponse annotate_year(const MonumentEntry& entry, Annotator& annotator);

// ---- Census grid -----------------------------------------------------------

struct ZensusCell {
  GridCellId grid_id;
  std::string period_label;
};

// Census construction-period label -> year_raw text understood by the normalizer.
class ZensusLabelMap {
 public:
  static ZensusLabelMap load(const std::filesystem::path& path);  // CSV label,year_raw
  static ZensusLabelMap from_csv_text(std::string_view text);

  bool contains(const std::string& label) const { return map_.count(label) > 0; }
  const std::string& year_raw(const std::string& label) const;

 private:
  std::map<std::string, std::string> map_;
};

// CSV grid_id,period_label. Labels outside the map are rejected with ParseError.
std::vector<ZensusCell> read_zensus_cells(std::string_view csv_text, const ZensusLabelMap& labels);

// ---- Agents ----------------------------------------------------------------

struct AgentRun {
  std::vector<RawRecord> records;
  std::vector<std::string> skipped;  // one message per isolated failure
};

// Per cell: bbox -> footprints -> one Zensus RawRecord per footprint. Failing cells are logged and skipped.
AgentRun run_zensus_agent(const std::vector<ZensusCell>& cells, const OverpassClient& client,
                          const ZensusLabelMap& labels);

// Date-tagged buildings inside box as OSM RawRecords.
AgentRun run_osm_agent(const BoundingBox& box, const OverpassClient& client);

struct MonumentAgentConfig {
  MonumentSelectors selectors;
  BoundingBox city_box;
};

// Fetches each page, scrapes entries, annotates years and geocodes addresses.
AgentRun run_monument_agent(const std::vector<std::string>& page_urls, net::HttpTransport& transport,
                            const MonumentAgentConfig& config, Annotator& annotator,
                            inference::GeocoderBackend& geocoder);

}  // namespace agecohort::connectors
