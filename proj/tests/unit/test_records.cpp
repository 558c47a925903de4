#include <doctest.h>

#include <chrono>

#include "agecohort/records.hpp"
#include "support/expect.hpp"
#include "support/gen.hpp"

using namespace agecohort;
using testgen::code_of;

TEST_CASE("cohort boundaries are inclusive") {
  CHECK(cohort_of(1918) == AgeCohort::Pre1919);
  CHECK(cohort_of(1919) == AgeCohort::C1919_1950);
  CHECK(cohort_of(1950) == AgeCohort::C1919_1950);
  CHECK(cohort_of(1951) == AgeCohort::C1951_1978);
  CHECK(cohort_of(1978) == AgeCohort::C1951_1978);
  CHECK(cohort_of(1979) == AgeCohort::C1979_2000);
  CHECK(cohort_of(2000) == AgeCohort::C1979_2000);
  CHECK(cohort_of(2001) == AgeCohort::Post2000);
  CHECK(code_of([] { cohort_of(842); }) == ErrorCode::ImplausibleYear);
  CHECK(code_of([] { cohort_of(max_plausible_year() + 1); }) == ErrorCode::ImplausibleYear);
  CHECK(cohort_of(1000) == AgeCohort::Pre1919);
}

TEST_CASE("plausibility window tracks the calendar") {
  const auto today = std::chrono::year_month_day(std::chrono::floor<std::chrono::days>(std::chrono::system_clock::now()));
  CHECK(max_plausible_year() == static_cast<int>(today.year()) + 1);
  CHECK(is_plausible_year(max_plausible_year()));
  CHECK_FALSE(is_plausible_year(999));
}

TEST_CASE("cohort ranges partition the plausible years") {
  int previous = -1;
  for (int y = 1000; y <= 2100; ++y) {
    if (!is_plausible_year(y)) break;
    const int idx = cohort_index(cohort_of(y));
    const auto range = cohort_years(cohort_of(y));
    CHECK(y >= range.first);
    CHECK(y <= range.last);
    CHECK(idx >= previous);
    CHECK(idx - previous <= 1);
    previous = idx;
  }
  CHECK(previous == 4);
}

TEST_CASE("cohort index is a chronological bijection") {
  CHECK(cohort_index(AgeCohort::Pre1919) == 0);
  CHECK(cohort_index(AgeCohort::Post2000) == 4);
  for (int i = 0; i < kNumCohorts; ++i) {
    CHECK(cohort_index(cohort_from_index(i)) == i);
    CHECK(cohort_from_index(i) == kAllCohorts[i]);
    CHECK(parse_cohort(to_string(kAllCohorts[i])) == kAllCohorts[i]);
  }
  CHECK(to_string(AgeCohort::C1951_1978) == "1951-1978");
  CHECK(code_of([] { cohort_from_index(5); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("cohort midpoints") {
  CHECK(cohort_midpoint_year(AgeCohort::Pre1919) == 1900);
  CHECK(cohort_midpoint_year(AgeCohort::C1919_1950) == 1934);
  CHECK(cohort_midpoint_year(AgeCohort::C1951_1978) == 1964);
  CHECK(cohort_midpoint_year(AgeCohort::C1979_2000) == 1989);
  CHECK(cohort_midpoint_year(AgeCohort::Post2000) == 2010);
  for (auto c : kAllCohorts) CHECK(cohort_of(cohort_midpoint_year(c)) == c);
}

TEST_CASE("sources") {
  for (auto s : kAllSources) CHECK(parse_source(to_string(s)) == s);
  CHECK(to_string(Source::OSM) == "osm");
  CHECK(Source::Monument < Source::Zensus);
  CHECK(Source::Zensus < Source::OSM);
}

TEST_CASE("fused record invariants") {
  const auto r = make_fused_record({50.77, 6.08}, 1983, Source::OSM);
  CHECK(r.cohort == AgeCohort::C1979_2000);
  CHECK(code_of([] { make_fused_record({50.77, 6.08}, 500, Source::OSM); }) == ErrorCode::ImplausibleYear);
  CHECK(code_of([] { make_raw_record({50.77, 6.08}, "", Source::OSM); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("csv round trips") {
  testgen::Gen g(1);
  std::vector<FusedRecord> fused;
  std::vector<RawRecord> raw;
  for (int i = 0; i < 300; ++i) {
    const GeoPoint p{std::round(g.uniform(-80, 80) * 1e6) / 1e6, std::round(g.uniform(-179, 179) * 1e6) / 1e6};
    const auto source = g.pick(std::vector<Source>(kAllSources.begin(), kAllSources.end()));
    fused.push_back(make_fused_record(p, static_cast<int>(g.integer(1000, 2025)), source));
    raw.push_back(make_raw_record(p, g.coin() ? "um 1900, \"Anbau\"" : std::to_string(g.integer(1000, 2025)), source));
  }
  CHECK(fused_from_csv(fused_to_csv(fused)) == fused);
  CHECK(raw_from_csv(raw_to_csv(raw, 6)) == raw);
  CHECK(fused_to_csv({}) == "lat,lon,chosen_year,chosen_source,cohort\n");
  CHECK(code_of([] { fused_from_csv("lat,lon,chosen_year,chosen_source,cohort\n1,2,1890,osm,post-2000\n"); }) ==
        ErrorCode::ParseError);
}

TEST_CASE("fixed formatting never prints negative zero") {
  CHECK(format_fixed(-0.0000001, 6) == "0.000000");
  CHECK(format_fixed(6.0839, 4) == "6.0839");
}
