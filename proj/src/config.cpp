#include "agecohort/config.hpp"

#include <cstdlib>

#include <fmt/format.h>

#include "agecohort/error.hpp"
#include "agecohort/io.hpp"
#include "agecohort/records.hpp"

namespace agecohort::config {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

const std::map<std::string, std::string, std::less<>>& env_names() {
  static const std::map<std::string, std::string, std::less<>> names{
      {"endpoints.overpass", "OVERPASS_URL"},
      {"endpoints.annotator", "ANNOTATOR_URL"},
      {"endpoints.geocoder", "GEOCODER_URL"},
      {"endpoints.geocoder_fixture", "GEOCODER_FIXTURE"},
      {"endpoints.tile", "TILE_URL"},
      {"http.timeout_secs", "HTTP_TIMEOUT_SECS"},
      {"http.mode", "HTTP_CACHE_MODE"},
      {"paths.cache", "CACHE_DIR"},
      {"paths.data", "AGECOHORT_DATA_DIR"},
  };
  return names;
}

int to_int(std::string_view key, std::string_view value) {
  try {
    return static_cast<int>(parse_integer(value));
  } catch (const Error&) {
    throw Error(ErrorCode::InvalidArgument, fmt::format("{} expects an integer, got '{}'", key, value));
  }
}

double to_real(std::string_view key, std::string_view value) {
  try {
    return parse_double(value);
  } catch (const Error&) {
    throw Error(ErrorCode::InvalidArgument, fmt::format("{} expects a number, got '{}'", key, value));
  }
}

geodesy::BoundingBox to_box(std::string_view key, std::string_view value) {
  std::vector<double> v;
  std::string_view rest = value;
  while (true) {
    const auto comma = rest.find(',');
    v.push_back(to_real(key, trim(rest.substr(0, comma))));
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  if (v.size() != 4 || v[0] >= v[2] || v[1] >= v[3]) {
    throw Error(ErrorCode::InvalidArgument, fmt::format("{} expects south,west,north,east, got '{}'", key, value));
  }
  return {v[0], v[1], v[2], v[3]};
}

std::array<Source, 3> to_priority(std::string_view key, std::string_view value) {
  std::array<Source, 3> out{};
  std::size_t n = 0;
  std::string_view rest = value;
  while (true) {
    const auto sep = rest.find_first_of(",>");
    if (n == 3) throw Error(ErrorCode::InvalidArgument, fmt::format("{} lists too many sources", key));
    out[n++] = parse_source(trim(rest.substr(0, sep)));
    if (sep == std::string_view::npos) break;
    rest.remove_prefix(sep + 1);
  }
  if (n != 3) throw Error(ErrorCode::InvalidArgument, fmt::format("{} must list all three sources", key));
  return out;
}

}  // namespace

void PipelineConfig::set(std::string_view key, std::string_view raw) {
  const std::string value = trim(raw);
  if (key == "endpoints.overpass") endpoints.overpass = value;
  else if (key == "endpoints.geocoder") endpoints.geocoder = value;
  else if (key == "endpoints.geocoder_fixture") endpoints.geocoder_fixture = value;
  else if (key == "endpoints.tile") endpoints.tile = value;
  else if (key == "endpoints.annotator") endpoints.annotator = value;
  else if (key == "http.timeout_secs") http.timeout_secs = to_int(key, value);
  else if (key == "http.mode") http.mode = net::parse_cache_mode(value);
  else if (key == "http.requests_per_second") http.requests_per_second = to_real(key, value);
  else if (key == "fusion.decimals") fusion.coord_quantize_decimals = to_int(key, value);
  else if (key == "fusion.priority") fusion.priority = to_priority(key, value);
  else if (key == "folds.k") folds.k = to_int(key, value);
  else if (key == "folds.seed") {
    try {
      folds.seed = std::stoull(value);
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidArgument, "folds.seed expects an unsigned integer");
    }
  } else if (key == "inference.tau") inference.tau = to_real(key, value);
  else if (key == "inference.zoom") inference.zoom = to_int(key, value);
  else if (key == "inference.backend") inference.backend = value;
  else if (key == "inference.stub_table") inference.stub_table = value;
  else if (key == "inference.sidecar") inference.sidecar_command = value;
  else if (key == "inference.sidecar_timeout_secs") inference.sidecar_timeout_secs = to_int(key, value);
  else if (key == "paths.cache") paths.cache = value;
  else if (key == "paths.output") paths.output = value;
  else if (key == "paths.data") paths.data = value;
  else if (key == "city_box") city_box = to_box(key, value);
  else throw Error(ErrorCode::InvalidArgument, fmt::format("unknown config key '{}'", key));
}

void PipelineConfig::validate() const {
  if (!(inference.tau > 0.0 && inference.tau < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, fmt::format("inference.tau must lie in (0,1), got {}", inference.tau));
  }
  if (folds.k < 1) throw Error(ErrorCode::InvalidArgument, "folds.k must be >= 1");
  if (inference.zoom < 0 || inference.zoom > geodesy::kMaxZoom) {
    throw Error(ErrorCode::InvalidArgument, "inference.zoom out of range");
  }
  if (inference.backend != "stub" && inference.backend != "sidecar" && inference.backend != "uniform") {
    throw Error(ErrorCode::InvalidArgument, "inference.backend must be stub, sidecar or uniform");
  }
  if (http.timeout_secs <= 0) throw Error(ErrorCode::InvalidArgument, "http.timeout_secs must be positive");
  if (!(http.requests_per_second > 0.0)) throw Error(ErrorCode::InvalidArgument, "http.requests_per_second must be positive");
  fusion::validate(fusion);
}

std::vector<std::string> known_keys() {
  return {"endpoints.overpass", "endpoints.geocoder", "endpoints.geocoder_fixture", "endpoints.tile",
          "endpoints.annotator", "http.timeout_secs", "http.mode", "http.requests_per_second",
          "fusion.decimals", "fusion.priority", "folds.k", "folds.seed", "inference.tau", "inference.zoom",
          "inference.backend", "inference.stub_table", "inference.sidecar", "inference.sidecar_timeout_secs",
          "paths.cache", "paths.output", "paths.data", "city_box"};
}

std::optional<std::string> env_var_for(std::string_view key) {
  const auto& names = env_names();
  if (auto it = names.find(key); it != names.end()) return it->second;
  return std::nullopt;
}

std::map<std::string, std::string> parse_key_values(std::string_view text) {
  std::map<std::string, std::string> out;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::ParseError, fmt::format("config line {}: expected key = value", line_no));
    }
    out[trim(std::string_view(t).substr(0, eq))] = trim(std::string_view(t).substr(eq + 1));
  }
  return out;
}

EnvLookup process_env() {
  return [](const std::string& name) -> std::optional<std::string> {
    if (const char* v = std::getenv(name.c_str()); v != nullptr && *v != '\0') return std::string(v);
    return std::nullopt;
  };
}

PipelineConfig resolve(const std::optional<std::filesystem::path>& file, const EnvLookup& env,
                       const std::map<std::string, std::string>& overrides) {
  PipelineConfig config;
  if (file) {
    for (const auto& [k, v] : parse_key_values(io::read_file(*file))) config.set(k, v);
  }
  for (const auto& [key, name] : env_names()) {
    if (auto v = env(name)) config.set(key, *v);
  }
  for (const auto& [k, v] : overrides) config.set(k, v);
  config.validate();
  return config;
}

}  // namespace agecohort::config
