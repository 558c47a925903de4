#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "agecohort/fusion.hpp"
#include "agecohort/geodesy.hpp"
#include "agecohort/transport.hpp"

namespace agecohort::config {

struct Endpoints {
  std::string overpass = "https://overpass-api.de/api/interpreter";
  std::string geocoder = "https://nominatim.openstreetmap.org/search";
  std::string geocoder_fixture;  // non-empty: offline geocoding from this JSON file
  std::string tile = "https://tile.openstreetmap.org/{z}/{x}/{y}.png";
  std::string annotator;  // empty: rule-based annotation
};

struct HttpSettings {
  int timeout_secs = 30;
  net::CacheMode mode = net::CacheMode::Live;
  double requests_per_second = 1.0;
};

struct FoldSettings {
  int k = 6;
  std::uint64_t seed = 7;
};

struct InferenceSettings {
  double tau = 0.65;
  int zoom = 19;
  std::string backend = "stub";  // stub | sidecar | uniform
  std::string stub_table;
  std::string sidecar_command;  // whitespace-separated argv
  int sidecar_timeout_secs = 30;
};

struct Paths {
  std::string cache = ".cache/http";
  std::string output = "out";
  std::string data;  // empty: built-in data directory
};

struct PipelineConfig {
  Endpoints endpoints;
  HttpSettings http;
  fusion::FusionConfig fusion;
  FoldSettings folds;
  InferenceSettings inference;
  Paths paths;
  geodesy::BoundingBox city_box{50.70, 5.97, 50.86, 6.22};

  // Sets one dotted key (e.g. "folds.k"); InvalidArgument for unknown keys or bad values.
  void set(std::string_view key, std::string_view value);
  // Range checks: tau in (0,1), k >= 1, zoom in [0,22], fusion config valid.
  void validate() const;
};

std::vector<std::string> known_keys();

// Environment variable that overrides a key, if any.
std::optional<std::string> env_var_for(std::string_view key);

// "key = value" lines; '#' starts a comment; blank lines ignored.
std::map<std::string, std::string> parse_key_values(std::string_view text);

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;
EnvLookup process_env();

// Layers defaults < file < environment < explicit overrides, then validates.
PipelineConfig resolve(const std::optional<std::filesystem::path>& file, const EnvLookup& env,
                       const std::map<std::string, std::string>& overrides);

}  // namespace agecohort::config
