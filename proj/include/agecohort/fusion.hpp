#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "agecohort/normalize.hpp"
#include "agecohort/records.hpp"

namespace agecohort::fusion {

struct FusionConfig {
  int coord_quantize_decimals = 6;
  std::array<Source, 3> priority{Source::Monument, Source::Zensus, Source::OSM};
};

// Throws InvalidArgument unless decimals in [4, 8] and priority is a permutation of all sources.
void validate(const FusionConfig& config);

// Grouping key: coordinates scaled by 10^decimals and rounded to the nearest integer.
struct LocationKey {
  std::int64_t lat = 0;
  std::int64_t lon = 0;

  friend auto operator<=>(const LocationKey&, const LocationKey&) = default;
};

LocationKey quantize(const GeoPoint& p, int decimals);
GeoPoint dequantize(const LocationKey& key, int decimals);

struct FusionReport {
  std::map<Source, std::size_t> input_counts;
  std::size_t groups_total = 0;
  std::size_t groups_dropped_null = 0;
  std::size_t output_count = 0;
  // "winner>loser" -> groups where the winner overrode another source that also had a usable year.
  std::map<std::string, std::size_t> conflicts_resolved;
  std::vector<GeoPoint> dropped_keys;
};

std::string report_to_json(const FusionReport& report, int decimals);

// ---- Orchestration ----------------------------------------------------------

using AgentFn = std::function<std::vector<RawRecord>()>;

struct AgentOutputs {
  std::map<Source, std::vector<RawRecord>> records;  // only sources that succeeded
  std::map<Source, std::string> failures;
};

// Runs the three agents concurrently; one failing agent never aborts the others.
// Throws AllAgentsFailed when every provided agent fails (or none is provided).
AgentOutputs run_agents(const std::map<Source, AgentFn>& agents);

// Concatenation in priority-independent source order (Monument, Zensus, OSM).
std::vector<RawRecord> fuse(const std::map<Source, std::vector<RawRecord>>& per_source);

struct HarmonizeResult {
  std::vector<FusedRecord> records;
  FusionReport report;
};

// Groups by quantized location, picks the first source in priority order that yields a year or cohort,
// drops groups where none does, and returns records sorted by (lat, lon, source).
HarmonizeResult harmonize(const std::vector<RawRecord>& records, const FusionConfig& config,
                          const normalize::TemporalVocabulary& vocab);
HarmonizeResult harmonize(const std::vector<RawRecord>& records, const FusionConfig& config = {});

struct CohortShare {
  std::size_t count = 0;
  double share_percent = 0.0;  // rounded half-up to 2 dp
};

std::array<CohortShare, kNumCohorts> cohort_distribution(const std::vector<FusedRecord>& dataset);
std::array<CohortShare, kNumCohorts> cohort_distribution_from_counts(const std::array<std::size_t, kNumCohorts>& counts);

// GeoJSON FeatureCollection with Point geometries.
std::string to_geojson(const std::vector<FusedRecord>& records, int decimals);

}  // namespace agecohort::fusion
