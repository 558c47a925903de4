#pragma once

// Naive reference harmonizer for randomized comparison. It does not call the normalizer: every
// generated year_raw carries its meaning alongside, and the oracle works from that meaning.

#include <algorithm>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "agecohort/records.hpp"
#include "support/gen.hpp"

namespace oracle {

using agecohort::AgeCohort;
using agecohort::Source;

struct Meaning {
  std::optional<int> year;
  std::optional<AgeCohort> cohort;
};

struct LabeledRaw {
  agecohort::RawRecord record;
  Meaning meaning;
};

inline AgeCohort cohort_for_year(int y) {
  if (y <= 1918) return AgeCohort::Pre1919;
  if (y <= 1950) return AgeCohort::C1919_1950;
  if (y <= 1978) return AgeCohort::C1951_1978;
  if (y <= 2000) return AgeCohort::C1979_2000;
  return AgeCohort::Post2000;
}

inline int midpoint_for(AgeCohort c) {
  switch (c) {
    case AgeCohort::Pre1919: return 1900;
    case AgeCohort::C1919_1950: return 1934;
    case AgeCohort::C1951_1978: return 1964;
    case AgeCohort::C1979_2000: return 1989;
    case AgeCohort::Post2000: return 2010;
  }
  return 0;
}

// A year expression with a known reading.
inline std::pair<std::string, Meaning> random_year_raw(testgen::Gen& g) {
  const int y = static_cast<int>(g.integer(1200, 2024));
  switch (g.integer(0, 7)) {
    case 0:
    case 1: return {std::to_string(y), {y, std::nullopt}};
    case 2: return {"um " + std::to_string(y), {y, std::nullopt}};
    case 3: {
      const int b = y + static_cast<int>(g.integer(0, 30));
      if (b > 2025) return {std::to_string(y), {y, std::nullopt}};
      return {std::to_string(y) + "\xE2\x80\x93" + std::to_string(b), {(y + b) / 2, std::nullopt}};
    }
    case 4: {
      const int d = y / 10 * 10;
      if (d + 5 > 2025) return {std::to_string(y), {y, std::nullopt}};
      return {std::to_string(d) + "er", {d + 5, std::nullopt}};
    }
    case 5: {
      static const std::vector<std::pair<std::string, AgeCohort>> labels{
          {"vor 1919", AgeCohort::Pre1919}, {"pre-1919", AgeCohort::Pre1919}, {"post-2000", AgeCohort::Post2000},
          {"mid-20C", AgeCohort::C1951_1978}, {"early 19C", AgeCohort::Pre1919}, {"late 20th century", AgeCohort::C1979_2000}};
      const auto& [text, c] = g.pick(labels);
      return {text, {std::nullopt, c}};
    }
    default: {
      static const std::vector<std::string> junk{"unbekannt", "gothic portal", "n/a", "Baujahr fehlt"};
      return {g.pick(junk), {}};
    }
  }
}

struct Expected {
  int qlat, qlon;  // micro-degrees
  int year;
  Source source;
  AgeCohort cohort;
};

inline std::vector<Expected> brute_harmonize(const std::vector<LabeledRaw>& input,
                                             const std::vector<Source>& priority) {
  std::vector<std::pair<int, int>> keys;
  for (const auto& r : input) {
    keys.emplace_back(static_cast<int>(std::lround(r.record.location.lat * 1e6)),
                      static_cast<int>(std::lround(r.record.location.lon * 1e6)));
  }
  std::vector<std::pair<int, int>> distinct = keys;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

  std::vector<Expected> out;
  for (const auto& key : distinct) {
    bool done = false;
    for (Source s : priority) {
      if (done) break;
      // Scan every record for this key and source, keep the earliest usable year.
      std::optional<int> best_year;
      bool best_explicit = false;
      AgeCohort best_cohort{};
      for (std::size_t i = 0; i < input.size(); ++i) {
        if (keys[i] != key || input[i].record.source != s) continue;
        const auto& m = input[i].meaning;
        int y;
        bool is_explicit;
        AgeCohort c;
        if (m.year) {
          y = *m.year;
          is_explicit = true;
          c = cohort_for_year(y);
        } else if (m.cohort) {
          y = midpoint_for(*m.cohort);
          is_explicit = false;
          c = *m.cohort;
        } else {
          continue;
        }
        if (!best_year || y < *best_year || (y == *best_year && is_explicit && !best_explicit)) {
          best_year = y;
          best_explicit = is_explicit;
          best_cohort = c;
        }
      }
      if (best_year) {
        out.push_back({key.first, key.second, *best_year, s, best_cohort});
        done = true;
      }
    }
  }
  return out;
}

// Up to 50 records over up to 10 locations with random sources and year texts.
inline std::vector<LabeledRaw> random_instance(testgen::Gen& g) {
  const int n_locations = static_cast<int>(g.integer(1, 10));
  std::vector<agecohort::GeoPoint> locations;
  for (int i = 0; i < n_locations; ++i) {
    locations.push_back({50.7 + static_cast<double>(g.integer(0, 200000)) * 1e-6, 6.0 + static_cast<double>(g.integer(0, 200000)) * 1e-6});
  }
  const int n = static_cast<int>(g.integer(0, 50));
  std::vector<LabeledRaw> out;
  for (int i = 0; i < n; ++i) {
    auto p = g.pick(locations);
    // Sub-quantum jitter, as different sources print coordinates differently.
    p.lat += g.uniform(-2e-8, 2e-8);
    p.lon += g.uniform(-2e-8, 2e-8);
    auto [text, meaning] = random_year_raw(g);
    const auto source = g.pick(std::vector<agecohort::Source>{agecohort::Source::Monument, agecohort::Source::Zensus, agecohort::Source::OSM});
    out.push_back({agecohort::make_raw_record(p, text, source), meaning});
  }
  return out;
}

}  // namespace oracle
