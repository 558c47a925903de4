#include <doctest.h>

#include <fstream>

#include "agecohort/config.hpp"
#include "support/expect.hpp"
#include "support/fake_transport.hpp"

using namespace agecohort;
using namespace agecohort::config;
using testgen::code_of;

namespace {

EnvLookup env_of(std::map<std::string, std::string> vars) {
  return [vars](const std::string& name) -> std::optional<std::string> {
    auto it = vars.find(name);
    if (it == vars.end()) return std::nullopt;
    return it->second;
  };
}

}  // namespace

TEST_CASE("defaults") {
  const PipelineConfig c;
  CHECK(c.inference.tau == 0.65);
  CHECK(c.inference.zoom == 19);
  CHECK(c.folds.k == 6);
  CHECK(c.fusion.coord_quantize_decimals == 6);
  CHECK(c.fusion.priority == std::array<Source, 3>{Source::Monument, Source::Zensus, Source::OSM});
  CHECK(c.http.mode == net::CacheMode::Live);
  CHECK_NOTHROW(c.validate());
  const auto resolved = resolve(std::nullopt, env_of({}), {});
  CHECK(resolved.inference.tau == 0.65);
}

TEST_CASE("setting keys") {
  PipelineConfig c;
  c.set("folds.k", "4");
  c.set("folds.seed", "123");
  c.set("inference.tau", "0.7");
  c.set("inference.backend", "sidecar");
  c.set("inference.sidecar", "python3 serve.py --model m.pt");
  c.set("http.mode", "replay");
  c.set("fusion.priority", "osm>zensus>monument");
  c.set("fusion.decimals", "5");
  c.set("city_box", "50,6,51,7");
  c.set("endpoints.tile", "http://t/{z}/{x}/{y}");
  CHECK(c.folds.k == 4);
  CHECK(c.folds.seed == 123);
  CHECK(c.inference.tau == 0.7);
  CHECK(c.inference.sidecar_command == "python3 serve.py --model m.pt");
  CHECK(c.http.mode == net::CacheMode::Replay);
  CHECK(c.fusion.priority == std::array<Source, 3>{Source::OSM, Source::Zensus, Source::Monument});
  CHECK(c.fusion.coord_quantize_decimals == 5);
  CHECK(c.city_box.south == 50);
  CHECK(c.city_box.east == 7);
  CHECK(c.endpoints.tile == "http://t/{z}/{x}/{y}");
  CHECK_NOTHROW(c.validate());
  c.set("fusion.priority", "zensus,monument,osm");
  CHECK(c.fusion.priority[0] == Source::Zensus);

  CHECK(code_of([&] { c.set("folds.kk", "3"); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([&] { c.set("folds.k", "three"); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([&] { c.set("http.mode", "sometimes"); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([&] { c.set("city_box", "1,2,3"); }) == ErrorCode::InvalidArgument);
  for (const auto& key : known_keys()) CHECK((key.find('.') != std::string::npos || key == "city_box"));
}

TEST_CASE("validation") {
  auto bad = [](const char* key, const char* value) {
    PipelineConfig c;
    try {
      c.set(key, value);
    } catch (const Error& e) {
      return e.code();
    }
    return code_of([&] { c.validate(); });
  };
  CHECK(bad("inference.tau", "0") == ErrorCode::InvalidArgument);
  CHECK(bad("inference.tau", "1") == ErrorCode::InvalidArgument);
  CHECK(bad("folds.k", "0") == ErrorCode::InvalidArgument);
  CHECK(bad("inference.zoom", "23") == ErrorCode::InvalidArgument);
  CHECK(bad("inference.backend", "magic") == ErrorCode::InvalidArgument);
  CHECK(bad("fusion.decimals", "12") == ErrorCode::InvalidArgument);
  CHECK(bad("fusion.priority", "osm,osm,zensus") == ErrorCode::InvalidArgument);
  CHECK(bad("http.requests_per_second", "0") == ErrorCode::InvalidArgument);
}

TEST_CASE("key-value files") {
  const auto kv = parse_key_values("# comment\n\nfolds.k = 3\n  inference.tau=0.75  # trailing\n");
  CHECK(kv.size() == 2);
  CHECK(kv.at("folds.k") == "3");
  CHECK(kv.at("inference.tau") == "0.75");
  CHECK(code_of([] { parse_key_values("folds.k 3\n"); }) == ErrorCode::ParseError);
}

TEST_CASE("layering: defaults < file < environment < overrides") {
  testgen::TempDir dir("config");
  const auto file = dir.path() / "agecohort.conf";
  std::ofstream(file) << "folds.k = 3\nfolds.seed = 11\nendpoints.overpass = http://file/\nhttp.timeout_secs = 5\n";
  const auto env = env_of({{"OVERPASS_URL", "http://env/"}, {"HTTP_TIMEOUT_SECS", "9"}, {"CACHE_DIR", "/tmp/c"}});
  const auto c = resolve(file, env, {{"http.timeout_secs", "12"}, {"folds.seed", "99"}});
  CHECK(c.folds.k == 3);
  CHECK(c.folds.seed == 99);
  CHECK(c.endpoints.overpass == "http://env/");
  CHECK(c.http.timeout_secs == 12);
  CHECK(c.paths.cache == "/tmp/c");
  CHECK(c.inference.tau == 0.65);

  CHECK(env_var_for("endpoints.overpass") == std::optional<std::string>("OVERPASS_URL"));
  CHECK(env_var_for("endpoints.tile") == std::optional<std::string>("TILE_URL"));
  CHECK(env_var_for("endpoints.geocoder_fixture") == std::optional<std::string>("GEOCODER_FIXTURE"));
  CHECK(!env_var_for("folds.k").has_value());

  CHECK(code_of([&] { resolve(dir.path() / "missing.conf", env_of({}), {}); }) == ErrorCode::IoError);
  CHECK(code_of([&] { resolve(std::nullopt, env_of({}), {{"inference.tau", "2"}}); }) == ErrorCode::InvalidArgument);
}
