#include "agecohort/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <set>

#include <nlohmann/json.hpp>

#include "agecohort/error.hpp"
#include "agecohort/percent.hpp"

namespace agecohort::fusion {
namespace {

struct Candidate {
  int year;       // actual or cohort-midpoint year
  bool explicit_year;
  AgeCohort cohort;
};

std::optional<Candidate> best_candidate(const std::vector<const RawRecord*>& records,
                                        const normalize::TemporalVocabulary& vocab) {
  std::optional<Candidate> best;
  for (const RawRecord* r : records) {
    const auto t = normalize::normalize_temporal(r->year_raw, vocab);
    std::optional<Candidate> c;
    if (t.year) {
      c = Candidate{*t.year, true, cohort_of(*t.year)};
    } else if (t.cohort_hint) {
      c = Candidate{cohort_midpoint_year(*t.cohort_hint), false, *t.cohort_hint};
    }
    if (!c) continue;
    // Earliest year wins; on equal years an explicit year beats a cohort midpoint.
    if (!best || c->year < best->year || (c->year == best->year && c->explicit_year && !best->explicit_year)) {
      best = c;
    }
  }
  return best;
}

}  // namespace

void validate(const FusionConfig& config) {
  if (config.coord_quantize_decimals < 4 || config.coord_quantize_decimals > 8) {
    throw Error(ErrorCode::InvalidArgument, "coord_quantize_decimals must be in [4, 8]");
  }
  std::set<Source> seen(config.priority.begin(), config.priority.end());
  if (seen.size() != kAllSources.size()) {
    throw Error(ErrorCode::InvalidArgument, "priority must list each source exactly once");
  }
}

LocationKey quantize(const GeoPoint& p, int decimals) {
  const double scale = std::pow(10.0, decimals);
  return {std::llround(p.lat * scale), std::llround(p.lon * scale)};
}

GeoPoint dequantize(const LocationKey& key, int decimals) {
  const double scale = std::pow(10.0, decimals);
  return {static_cast<double>(key.lat) / scale, static_cast<double>(key.lon) / scale};
}

std::string report_to_json(const FusionReport& report, int decimals) {
  nlohmann::ordered_json j;
  j["input_counts"] = nlohmann::ordered_json::object();
  for (Source s : kAllSources) {
    auto it = report.input_counts.find(s);
    j["input_counts"][std::string(to_string(s))] = it == report.input_counts.end() ? 0 : it->second;
  }
  j["groups_total"] = report.groups_total;
  j["groups_dropped_null"] = report.groups_dropped_null;
  j["output_count"] = report.output_count;
  j["conflicts_resolved"] = nlohmann::ordered_json::object();
  for (const auto& [pair, n] : report.conflicts_resolved) j["conflicts_resolved"][pair] = n;
  j["dropped_keys"] = nlohmann::ordered_json::array();
  for (const auto& p : report.dropped_keys) {
    j["dropped_keys"].push_back({format_fixed(p.lat, decimals), format_fixed(p.lon, decimals)});
  }
  return j.dump(2) + "\n";
}

AgentOutputs run_agents(const std::map<Source, AgentFn>& agents) {
  std::map<Source, std::future<std::vector<RawRecord>>> running;
  for (const auto& [source, fn] : agents) {
    if (fn) running.emplace(source, std::async(std::launch::async, fn));
  }
  AgentOutputs out;
  for (auto& [source, fut] : running) {
    try {
      out.records[source] = fut.get();
    } catch (const std::exception& e) {
      out.failures[source] = e.what();
    }
  }
  if (out.records.empty()) {
    std::string detail;
    for (const auto& [s, msg] : out.failures) detail += std::string(to_string(s)) + ": " + msg + "; ";
    throw Error(ErrorCode::AllAgentsFailed, detail.empty() ? "no agents configured" : detail);
  }
  return out;
}

std::vector<RawRecord> fuse(const std::map<Source, std::vector<RawRecord>>& per_source) {
  std::vector<RawRecord> out;
  for (const auto& [source, records] : per_source) {
    out.insert(out.end(), records.begin(), records.end());
  }
  return out;
}

HarmonizeResult harmonize(const std::vector<RawRecord>& records, const FusionConfig& config,
                          const normalize::TemporalVocabulary& vocab) {
  validate(config);
  const int decimals = config.coord_quantize_decimals;
  HarmonizeResult result;
  auto& report = result.report;
  for (Source s : kAllSources) report.input_counts[s] = 0;

  std::map<LocationKey, std::map<Source, std::vector<const RawRecord*>>> groups;
  for (const auto& r : records) {
    groups[quantize(r.location, decimals)][r.source].push_back(&r);
    ++report.input_counts[r.source];
  }
  report.groups_total = groups.size();

  for (const auto& [key, by_source] : groups) {
    std::map<Source, Candidate> usable;
    for (const auto& [source, members] : by_source) {
      if (auto c = best_candidate(members, vocab)) usable.emplace(source, *c);
    }
    std::optional<Source> winner;
    for (Source s : config.priority) {
      if (usable.count(s)) {
        winner = s;
        break;
      }
    }
    if (!winner) {
      ++report.groups_dropped_null;
      report.dropped_keys.push_back(dequantize(key, decimals));
      continue;
    }
    for (const auto& [source, c] : usable) {
      if (source != *winner) {
        ++report.conflicts_resolved[std::string(to_string(*winner)) + ">" + std::string(to_string(source))];
      }
    }
    const Candidate& chosen = usable.at(*winner);
    result.records.push_back(FusedRecord{dequantize(key, decimals), chosen.year, *winner, chosen.cohort});
  }
  // Group keys are unique and std::map iterates them in (lat, lon) order, so the output is already canonical.
  report.output_count = result.records.size();
  return result;
}

HarmonizeResult harmonize(const std::vector<RawRecord>& records, const FusionConfig& config) {
  return harmonize(records, config, normalize::default_vocabulary());
}

std::array<CohortShare, kNumCohorts> cohort_distribution_from_counts(const std::array<std::size_t, kNumCohorts>& counts) {
  std::size_t total = 0;
  for (auto c : counts) total += c;
  std::array<CohortShare, kNumCohorts> out{};
  for (int i = 0; i < kNumCohorts; ++i) {
    out[i] = {counts[i], percent_2dp(counts[i], total)};
  }
  return out;
}

std::array<CohortShare, kNumCohorts> cohort_distribution(const std::vector<FusedRecord>& dataset) {
  std::array<std::size_t, kNumCohorts> counts{};
  for (const auto& r : dataset) ++counts[cohort_index(r.cohort)];
  return cohort_distribution_from_counts(counts);
}

std::string to_geojson(const std::vector<FusedRecord>& records, int decimals) {
  const double scale = std::pow(10.0, decimals);
  auto rounded = [scale](double v) { return std::round(v * scale) / scale; };
  nlohmann::ordered_json fc;
  fc["type"] = "FeatureCollection";
  fc["features"] = nlohmann::ordered_json::array();
  for (const auto& r : records) {
    nlohmann::ordered_json f;
    f["type"] = "Feature";
    f["geometry"] = {{"type", "Point"}, {"coordinates", {rounded(r.location.lon), rounded(r.location.lat)}}};
    f["properties"] = {{"chosen_year", r.chosen_year},
                       {"chosen_source", std::string(to_string(r.chosen_source))},
                       {"cohort", std::string(to_string(r.cohort))}};
    fc["features"].push_back(std::move(f));
  }
  return fc.dump(2) + "\n";
}

}  // namespace agecohort::fusion
