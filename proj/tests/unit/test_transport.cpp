#include <doctest.h>

#include <nlohmann/json.hpp>

#include "agecohort/io.hpp"
#include "agecohort/transport.hpp"
#include "support/expect.hpp"
#include "support/fake_transport.hpp"

using namespace agecohort;
using namespace agecohort::net;
using testgen::code_of;

TEST_CASE("request keys") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  const HttpRequest a{"POST", "https://x/api", "data=1", ""};
  HttpRequest b = a;
  CHECK(request_key(a) == request_key(b));
  b.body = "data=2";
  CHECK(request_key(a) != request_key(b));
  CHECK(request_key(a) == sha256_hex("POST\nhttps://x/api\ndata=1"));
  CHECK(url_encode("a b&c=ä/~") == "a%20b%26c%3D%C3%A4%2F~");
}

TEST_CASE("record then replay") {
  testgen::TempDir dir("cache");
  auto upstream = std::make_shared<testgen::FakeTransport>();
  upstream->on("GET", "https://x/tile", 200, "bytes");
  CachingTransport record(dir.path(), CacheMode::Record, upstream);
  const HttpRequest req{"GET", "https://x/tile", "", ""};
  CHECK(record.send(req).body == "bytes");
  CHECK(record.send(req).body == "bytes");
  CHECK(upstream->calls == 1);
  CHECK(std::filesystem::exists(record.path_for(req)));
  const auto stored = nlohmann::json::parse(io::read_file(record.path_for(req)));
  CHECK(stored["request"]["url"] == "https://x/tile");
  CHECK(stored["response"]["status"] == 200);

  auto offline = std::make_shared<testgen::FakeTransport>();
  CachingTransport replay(dir.path(), CacheMode::Replay, offline);
  CHECK(replay.send(req).body == "bytes");
  CHECK(offline->calls == 0);
  CHECK(code_of([&] { replay.send({"GET", "https://x/other", "", ""}); }) == ErrorCode::NetworkError);
  CHECK(offline->calls == 0);
}

TEST_CASE("binary bodies survive the cache") {
  testgen::TempDir dir("cachebin");
  auto upstream = std::make_shared<testgen::FakeTransport>();
  std::string png = "\x89PNG\r\n\x1a\n";
  for (int i = 0; i < 256; ++i) png += static_cast<char>(i);
  upstream->on("GET", "https://x/a.png", 200, png);
  for (std::size_t len = 0; len < 5; ++len) upstream->on("GET", "https://x/" + std::to_string(len), 200, png.substr(0, len));
  CachingTransport record(dir.path(), CacheMode::Record, upstream);
  const HttpRequest req{"GET", "https://x/a.png", "", ""};
  record.send(req);
  const auto stored = nlohmann::json::parse(io::read_file(record.path_for(req)));
  CHECK(stored["response"].contains("body_base64"));
  CachingTransport replay(dir.path(), CacheMode::Replay, nullptr);
  CHECK(replay.send(req).body == png);
  for (std::size_t len = 0; len < 5; ++len) {
    const HttpRequest r{"GET", "https://x/" + std::to_string(len), "", ""};
    record.send(r);
    CHECK(replay.send(r).body == png.substr(0, len));
  }
}

TEST_CASE("server errors are not cached") {
  testgen::TempDir dir("cache5xx");
  auto upstream = std::make_shared<testgen::FakeTransport>();
  upstream->on("GET", "https://x/busy", 503, "busy");
  CachingTransport record(dir.path(), CacheMode::Record, upstream);
  record.send({"GET", "https://x/busy", "", ""});
  record.send({"GET", "https://x/busy", "", ""});
  CHECK(upstream->calls == 2);
}

TEST_CASE("cache modes parse") {
  CHECK(parse_cache_mode("replay") == CacheMode::Replay);
  CHECK(parse_cache_mode("record") == CacheMode::Record);
  CHECK(parse_cache_mode("live") == CacheMode::Live);
  CHECK(code_of([] { parse_cache_mode("offline"); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("rate limiter spaces requests per host") {
  RateLimiter limiter(50.0, 1.0);
  const auto start = std::chrono::steady_clock::now();
  for (int i = 0; i < 4; ++i) limiter.acquire("a.example");
  limiter.acquire("b.example");
  const auto elapsed = std::chrono::steady_clock::now() - start;
  CHECK(elapsed >= std::chrono::milliseconds(55));
  CHECK(elapsed < std::chrono::milliseconds(1000));
}

TEST_CASE("atomic writes and appends") {
  testgen::TempDir dir("io");
  const auto f = dir.path() / "sub" / "x.txt";
  io::write_file_atomic(f, "one");
  io::write_file_atomic(f, "two");
  CHECK(io::read_file(f) == "two");
  io::append_file(f, "+3");
  CHECK(io::read_file(f) == "two+3");
  for (const auto& e : std::filesystem::directory_iterator(f.parent_path())) CHECK(e.path().filename() == "x.txt");
  CHECK(code_of([&] { io::read_file(dir.path() / "missing"); }) == ErrorCode::IoError);
}
