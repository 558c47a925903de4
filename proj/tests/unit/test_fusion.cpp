#include <doctest.h>

#include <set>
#include <stdexcept>
#include <thread>

#include <nlohmann/json.hpp>

#include "agecohort/fusion.hpp"
#include "oracle/brute_harmonizer.hpp"
#include "support/expect.hpp"
#include "support/gen.hpp"

using namespace agecohort;
using namespace agecohort::fusion;
using testgen::code_of;

namespace {

RawRecord raw(double lat, double lon, std::string year, Source s) { return make_raw_record({lat, lon}, std::move(year), s); }

}  // namespace

TEST_CASE("priority examples") {
  auto r = harmonize({raw(50.77, 6.08, "1890", Source::Monument), raw(50.77, 6.08, "1951–1978", Source::Zensus)});
  REQUIRE(r.records.size() == 1);
  CHECK(r.records[0].chosen_year == 1890);
  CHECK(r.records[0].chosen_source == Source::Monument);
  CHECK(r.records[0].cohort == AgeCohort::Pre1919);
  CHECK(r.report.conflicts_resolved.at("monument>zensus") == 1);

  r = harmonize({raw(50.77, 6.08, "1983", Source::OSM)});
  REQUIRE(r.records.size() == 1);
  CHECK(r.records[0].chosen_year == 1983);
  CHECK(r.records[0].cohort == AgeCohort::C1979_2000);

  r = harmonize({raw(50.77, 6.08, "unreadable", Source::Zensus), raw(50.77, 6.08, "no-match text", Source::OSM)});
  CHECK(r.records.empty());
  CHECK(r.report.groups_dropped_null == 1);
  CHECK(r.report.dropped_keys.size() == 1);
}

TEST_CASE("hint-only winner takes the cohort midpoint year") {
  const auto r = harmonize({raw(50.77, 6.08, "mid-20C", Source::Monument), raw(50.77, 6.08, "1999", Source::OSM)});
  REQUIRE(r.records.size() == 1);
  CHECK(r.records[0].chosen_source == Source::Monument);
  CHECK(r.records[0].cohort == AgeCohort::C1951_1978);
  CHECK(r.records[0].chosen_year == 1964);
}

TEST_CASE("earliest year within a source") {
  const auto r = harmonize({raw(50.77, 6.08, "1960", Source::OSM), raw(50.77, 6.08, "1905", Source::OSM),
                            raw(50.77, 6.08, "vor 1919", Source::OSM)});
  REQUIRE(r.records.size() == 1);
  CHECK(r.records[0].chosen_year == 1900);
  const auto tie = harmonize({raw(50.77, 6.08, "vor 1919", Source::OSM), raw(50.77, 6.08, "1900", Source::OSM)});
  CHECK(tie.records[0].chosen_year == 1900);
}

TEST_CASE("custom priority order") {
  FusionConfig cfg;
  cfg.priority = {Source::OSM, Source::Zensus, Source::Monument};
  const auto r = harmonize({raw(50.77, 6.08, "1890", Source::Monument), raw(50.77, 6.08, "1983", Source::OSM)}, cfg);
  CHECK(r.records[0].chosen_source == Source::OSM);
  cfg.priority = {Source::OSM, Source::OSM, Source::Monument};
  CHECK(code_of([&] { harmonize({}, cfg); }) == ErrorCode::InvalidArgument);
  cfg = {};
  cfg.coord_quantize_decimals = 9;
  CHECK(code_of([&] { harmonize({}, cfg); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("grouping quantizes coordinates") {
  const auto r = harmonize({raw(50.7700000001, 6.08, "1890", Source::OSM), raw(50.7699999999, 6.08, "1950", Source::Zensus)});
  CHECK(r.records.size() == 1);
  CHECK(r.report.groups_total == 1);
  const auto apart = harmonize({raw(50.770001, 6.08, "1890", Source::OSM), raw(50.770002, 6.08, "1950", Source::OSM)});
  CHECK(apart.records.size() == 2);
}

TEST_CASE("matches the brute-force harmonizer under permutation") {
  testgen::Gen g(20240501);
  const std::vector<Source> priority{Source::Monument, Source::Zensus, Source::OSM};
  for (int trial = 0; trial < 500; ++trial) {
    auto instance = oracle::random_instance(g);
    const auto expected = oracle::brute_harmonize(instance, priority);
    for (int perm = 0; perm < 3; ++perm) {
      g.shuffle(instance);
      std::vector<RawRecord> records;
      for (const auto& l : instance) records.push_back(l.record);
      const auto got = harmonize(records);
      REQUIRE(got.records.size() == expected.size());
      for (std::size_t i = 0; i < expected.size(); ++i) {
        CHECK(std::lround(got.records[i].location.lat * 1e6) == expected[i].qlat);
        CHECK(std::lround(got.records[i].location.lon * 1e6) == expected[i].qlon);
        CHECK(got.records[i].chosen_year == expected[i].year);
        CHECK(got.records[i].chosen_source == expected[i].source);
        CHECK(got.records[i].cohort == expected[i].cohort);
      }
      CHECK(got.report.output_count + got.report.groups_dropped_null == got.report.groups_total);
    }
  }
}

TEST_CASE("harmonize properties") {
  testgen::Gen g(77);
  for (int trial = 0; trial < 200; ++trial) {
    const auto instance = oracle::random_instance(g);
    std::vector<RawRecord> records;
    for (const auto& l : instance) records.push_back(l.record);
    const auto result = harmonize(records);

    std::set<LocationKey> keys;
    for (const auto& r : result.records) CHECK(keys.insert(quantize(r.location, 6)).second);
    CHECK(std::is_sorted(result.records.begin(), result.records.end(), [](const auto& a, const auto& b) {
      return quantize(a.location, 6) < quantize(b.location, 6);
    }));

    // Re-wrapping the output as raw records is a fixed point.
    std::vector<RawRecord> rewrapped;
    for (const auto& r : result.records) rewrapped.push_back(make_raw_record(r.location, std::to_string(r.chosen_year), r.chosen_source));
    CHECK(harmonize(rewrapped).records == result.records);

    // No higher-priority source in the group had a usable reading.
    for (const auto& r : result.records) {
      for (const auto& l : instance) {
        if (quantize(l.record.location, 6) == quantize(r.location, 6) && l.record.source < r.chosen_source) {
          CHECK_FALSE((l.meaning.year || l.meaning.cohort));
        }
      }
    }
  }
}

TEST_CASE("concatenation") {
  std::map<Source, std::vector<RawRecord>> lists{
      {Source::Monument, {raw(1, 1, "1900", Source::Monument), raw(1, 2, "1900", Source::Monument)}},
      {Source::Zensus, std::vector<RawRecord>(3, raw(2, 2, "1950", Source::Zensus))},
      {Source::OSM, std::vector<RawRecord>(4, raw(3, 3, "2001", Source::OSM))}};
  CHECK(fuse(lists).size() == 9);
  CHECK(fuse({}).empty());
}

TEST_CASE("agents run concurrently and fail in isolation") {
  std::map<Source, AgentFn> agents{
      {Source::Monument, [] () -> std::vector<RawRecord> { throw Error(ErrorCode::NetworkError, "down"); }},
      {Source::Zensus, [] { return std::vector<RawRecord>{raw(1, 1, "1900", Source::Zensus)}; }},
      {Source::OSM, [] {
         std::this_thread::sleep_for(std::chrono::milliseconds(20));
         return std::vector<RawRecord>{raw(2, 2, "1990", Source::OSM)};
       }}};
  const auto out = run_agents(agents);
  CHECK(out.records.size() == 2);
  CHECK(out.failures.count(Source::Monument) == 1);

  std::map<Source, AgentFn> broken;
  for (auto s : kAllSources) broken[s] = [] () -> std::vector<RawRecord> { throw std::runtime_error("x"); };
  CHECK(code_of([&] { run_agents(broken); }) == ErrorCode::AllAgentsFailed);
  CHECK(code_of([] { run_agents({}); }) == ErrorCode::AllAgentsFailed);
}

TEST_CASE("cohort distribution") {
  const auto shares = cohort_distribution_from_counts({2722, 1114, 10212, 892, 396});
  const double printed[] = {17.76, 7.26, 66.60, 5.82, 2.58};
  double sum = 0.0;
  for (int i = 0; i < kNumCohorts; ++i) {
    CHECK(std::abs(shares[i].share_percent - printed[i]) <= 0.02 + 1e-9);
    sum += shares[i].share_percent;
  }
  CHECK(std::abs(sum - 100.0) <= 0.02 + 1e-9);
  CHECK(shares[0].share_percent == 17.75);

  std::vector<FusedRecord> single(3, make_fused_record({1, 1}, 1990, Source::OSM));
  CHECK(cohort_distribution(single)[3].share_percent == 100.0);
  for (const auto& s : cohort_distribution({})) CHECK(s.count == 0);
}

TEST_CASE("report and geojson serialization") {
  const auto r = harmonize({raw(50.77, 6.08, "1890", Source::Monument), raw(50.78, 6.08, "junk", Source::OSM)});
  const auto json = nlohmann::json::parse(report_to_json(r.report, 6));
  CHECK(json["groups_total"] == 2);
  CHECK(json["groups_dropped_null"] == 1);
  CHECK(json["dropped_keys"][0][0] == "50.780000");
  const auto geo = nlohmann::json::parse(to_geojson(r.records, 6));
  CHECK(geo["type"] == "FeatureCollection");
  CHECK(geo["features"][0]["geometry"]["coordinates"][0] == 6.08);
  CHECK(geo["features"][0]["properties"]["cohort"] == "pre-1919");
}
