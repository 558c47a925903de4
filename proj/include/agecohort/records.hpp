#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "agecohort/geodesy.hpp"

namespace agecohort {

using geodesy::GeoPoint;

// Declaration order is the fusion priority: Monument beats Zensus beats OSM.
enum class Source { Monument, Zensus, OSM };

inline constexpr std::array<Source, 3> kAllSources{Source::Monument, Source::Zensus, Source::OSM};

std::string_view to_string(Source s);
Source parse_source(std::string_view text);

enum class AgeCohort { Pre1919, C1919_1950, C1951_1978, C1979_2000, Post2000 };

inline constexpr int kNumCohorts = 5;
inline constexpr std::array<AgeCohort, kNumCohorts> kAllCohorts{
    AgeCohort::Pre1919, AgeCohort::C1919_1950, AgeCohort::C1951_1978, AgeCohort::C1979_2000, AgeCohort::Post2000};

// Canonical serialized labels: pre-1919, 1919-1950, ...
std::string_view to_string(AgeCohort c);
AgeCohort parse_cohort(std::string_view text);

int cohort_index(AgeCohort c);
AgeCohort cohort_from_index(int index);

// Inclusive year range of a cohort; open ends are reported as the plausibility bounds.
struct YearRange {
  int first;
  int last;
};
YearRange cohort_years(AgeCohort c);

// Representative year used when only a cohort is known:
// Pre1919 -> 1900, Post2000 -> 2010, otherwise the floored midpoint.
int cohort_midpoint_year(AgeCohort c);

inline constexpr int kMinPlausibleYear = 1000;
int max_plausible_year();  // current calendar year + 1
bool is_plausible_year(int year);

// Cohort containing year; throws ImplausibleYear outside [1000, current_year + 1].
AgeCohort cohort_of(int year);
// Same boundaries without the plausibility window (for cohort hints from phrases).
AgeCohort cohort_of_unchecked(int year);

struct RawRecord {
  GeoPoint location;
  std::string year_raw;
  Source source = Source::OSM;

  friend bool operator==(const RawRecord&, const RawRecord&) = default;
};

RawRecord make_raw_record(GeoPoint location, std::string year_raw, Source source);

struct FusedRecord {
  GeoPoint location;
  int chosen_year = 0;
  Source chosen_source = Source::OSM;
  AgeCohort cohort = AgeCohort::Pre1919;

  friend bool operator==(const FusedRecord&, const FusedRecord&) = default;
};

// Validates the year window and recomputes the cohort.
FusedRecord make_fused_record(GeoPoint location, int chosen_year, Source source);

// CSV: lat,lon,chosen_year,chosen_source,cohort
std::string fused_to_csv(const std::vector<FusedRecord>& records, int decimals = 6);
std::vector<FusedRecord> fused_from_csv(std::string_view text);

// CSV: lat,lon,year_raw,source
std::string raw_to_csv(const std::vector<RawRecord>& records, int decimals = 7);
std::vector<RawRecord> raw_from_csv(std::string_view text);

std::string format_fixed(double value, int decimals);
double parse_double(std::string_view text);
long long parse_integer(std::string_view text);

}  // namespace agecohort
