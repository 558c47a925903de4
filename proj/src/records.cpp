#include "agecohort/records.hpp"

#include <charconv>
#include <chrono>
#include <cmath>

#include <fmt/format.h>

#include "agecohort/csv.hpp"
#include "agecohort/error.hpp"

namespace agecohort {

std::string_view to_string(Source s) {
  switch (s) {
    case Source::Monument: return "monument";
    case Source::Zensus: return "zensus";
    case Source::OSM: return "osm";
  }
  return "osm";
}

Source parse_source(std::string_view text) {
  for (Source s : kAllSources) {
    if (text == to_string(s)) return s;
  }
  throw Error(ErrorCode::ParseError, "unknown source: " + std::string(text));
}

std::string_view to_string(AgeCohort c) {
  switch (c) {
    case AgeCohort::Pre1919: return "pre-1919";
    case AgeCohort::C1919_1950: return "1919-1950";
    case AgeCohort::C1951_1978: return "1951-1978";
    case AgeCohort::C1979_2000: return "1979-2000";
    case AgeCohort::Post2000: return "post-2000";
  }
  return "pre-1919";
}

AgeCohort parse_cohort(std::string_view text) {
  for (AgeCohort c : kAllCohorts) {
    if (text == to_string(c)) return c;
  }
  throw Error(ErrorCode::ParseError, "unknown cohort: " + std::string(text));
}

int cohort_index(AgeCohort c) { return static_cast<int>(c); }

AgeCohort cohort_from_index(int index) {
  if (index < 0 || index >= kNumCohorts) {
    throw Error(ErrorCode::InvalidArgument, "cohort index out of range: " + std::to_string(index));
  }
  return static_cast<AgeCohort>(index);
}

YearRange cohort_years(AgeCohort c) {
  switch (c) {
    case AgeCohort::Pre1919: return {kMinPlausibleYear, 1918};
    case AgeCohort::C1919_1950: return {1919, 1950};
    case AgeCohort::C1951_1978: return {1951, 1978};
    case AgeCohort::C1979_2000: return {1979, 2000};
    case AgeCohort::Post2000: return {2001, max_plausible_year()};
  }
  return {0, 0};
}

int cohort_midpoint_year(AgeCohort c) {
  switch (c) {
    case AgeCohort::Pre1919: return 1900;
    case AgeCohort::Post2000: return 2010;
    default: {
      const auto r = cohort_years(c);
      return (r.first + r.last) / 2;
    }
  }
}

int max_plausible_year() {
  const auto today = std::chrono::year_month_day{std::chrono::floor<std::chrono::days>(std::chrono::system_clock::now())};
  return static_cast<int>(today.year()) + 1;
}

bool is_plausible_year(int year) { return year >= kMinPlausibleYear && year <= max_plausible_year(); }

AgeCohort cohort_of_unchecked(int year) {
  if (year <= 1918) return AgeCohort::Pre1919;
  if (year <= 1950) return AgeCohort::C1919_1950;
  if (year <= 1978) return AgeCohort::C1951_1978;
  if (year <= 2000) return AgeCohort::C1979_2000;
  return AgeCohort::Post2000;
}

AgeCohort cohort_of(int year) {
  if (!is_plausible_year(year)) {
    throw Error(ErrorCode::ImplausibleYear, std::to_string(year));
  }
  return cohort_of_unchecked(year);
}

RawRecord make_raw_record(GeoPoint location, std::string year_raw, Source source) {
  if (year_raw.empty()) {
    throw Error(ErrorCode::InvalidArgument, "year_raw must be non-empty");
  }
  return {geodesy::checked_geopoint(location.lat, location.lon), std::move(year_raw), source};
}

FusedRecord make_fused_record(GeoPoint location, int chosen_year, Source source) {
  return {geodesy::checked_geopoint(location.lat, location.lon), chosen_year, source, cohort_of(chosen_year)};
}

std::string format_fixed(double value, int decimals) {
  std::string s = fmt::format("{:.{}f}", value, decimals);
  // "-0.000000" and "0.000000" must serialize identically.
  if (s.front() == '-' && s.find_first_not_of("-0.") == std::string::npos) {
    s.erase(0, 1);
  }
  return s;
}

double parse_double(std::string_view text) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(v)) {
    throw Error(ErrorCode::ParseError, "not a number: " + std::string(text));
  }
  return v;
}

long long parse_integer(std::string_view text) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw Error(ErrorCode::ParseError, "not an integer: " + std::string(text));
  }
  return v;
}

std::string fused_to_csv(const std::vector<FusedRecord>& records, int decimals) {
  std::string out = "lat,lon,chosen_year,chosen_source,cohort\n";
  for (const auto& r : records) {
    out += csv::format_row({format_fixed(r.location.lat, decimals), format_fixed(r.location.lon, decimals),
                            std::to_string(r.chosen_year), std::string(to_string(r.chosen_source)),
                            std::string(to_string(r.cohort))});
    out += '\n';
  }
  return out;
}

std::vector<FusedRecord> fused_from_csv(std::string_view text) {
  const auto table = csv::Table::from_text(text);
  const auto lat = table.column("lat");
  const auto lon = table.column("lon");
  const auto year = table.column("chosen_year");
  const auto source = table.column("chosen_source");
  const auto cohort = table.column("cohort");
  std::vector<FusedRecord> out;
  out.reserve(table.rows().size());
  for (const auto& row : table.rows()) {
    auto rec = make_fused_record({parse_double(row[lat]), parse_double(row[lon])},
                                 static_cast<int>(parse_integer(row[year])), parse_source(row[source]));
    if (rec.cohort != parse_cohort(row[cohort])) {
      throw Error(ErrorCode::ParseError, "cohort column disagrees with chosen_year " + row[year]);
    }
    out.push_back(rec);
  }
  return out;
}

std::string raw_to_csv(const std::vector<RawRecord>& records, int decimals) {
  std::string out = "lat,lon,year_raw,source\n";
  for (const auto& r : records) {
    out += csv::format_row({format_fixed(r.location.lat, decimals), format_fixed(r.location.lon, decimals), r.year_raw,
                            std::string(to_string(r.source))});
    out += '\n';
  }
  return out;
}

std::vector<RawRecord> raw_from_csv(std::string_view text) {
  const auto table = csv::Table::from_text(text);
  const auto lat = table.column("lat");
  const auto lon = table.column("lon");
  const auto year = table.column("year_raw");
  const auto source = table.column("source");
  std::vector<RawRecord> out;
  for (const auto& row : table.rows()) {
    out.push_back(make_raw_record({parse_double(row[lat]), parse_double(row[lon])}, row[year], parse_source(row[source])));
  }
  return out;
}

}  // namespace agecohort
