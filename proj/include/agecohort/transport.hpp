#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>

namespace agecohort::net {

struct HttpRequest {
  std::string method = "GET";
  std::string url;
  std::string body;
  std::string content_type;
};

struct HttpResponse {
  int status = 0;
  std::string body;
  std::map<std::string, std::string> headers;
};

// Lowercase hex SHA-256 of the request identity (method, url, body).
std::string request_key(const HttpRequest& request);
std::string sha256_hex(std::string_view data);
std::string url_encode(std::string_view text);

class HttpTransport {
 public:
  virtual ~HttpTransport() = default;
  // Throws NetworkError when no response could be obtained. HTTP error statuses are returned, not thrown.
  virtual HttpResponse send(const HttpRequest& request) = 0;
};

// Token bucket per host; shared by every live transport that should be polite to the same endpoint.
class RateLimiter {
 public:
  RateLimiter(double requests_per_second, double burst);
  void acquire(const std::string& host);

 private:
  struct Bucket {
    double tokens;
    std::chrono::steady_clock::time_point last;
  };
  double rate_;
  double burst_;
  std::mutex mutex_;
  std::map<std::string, Bucket> buckets_;
};

class LiveTransport : public HttpTransport {
 public:
  LiveTransport(std::chrono::seconds timeout, std::shared_ptr<RateLimiter> limiter);
  HttpResponse send(const HttpRequest& request) override;

 private:
  std::chrono::seconds timeout_;
  std::shared_ptr<RateLimiter> limiter_;
};

enum class CacheMode {
  Live,    // no cache
  Record,  // serve from cache, otherwise go live and store
  Replay,  // cache only; a miss is a NetworkError
};

CacheMode parse_cache_mode(std::string_view text);

// Disk cache of request/response pairs, one JSON file per request key.
class CachingTransport : public HttpTransport {
 public:
  CachingTransport(std::filesystem::path dir, CacheMode mode, std::shared_ptr<HttpTransport> upstream);
  HttpResponse send(const HttpRequest& request) override;

  std::filesystem::path path_for(const HttpRequest& request) const;
  static void store(const std::filesystem::path& file, const HttpRequest& request, const HttpResponse& response);

 private:
  std::filesystem::path dir_;
  CacheMode mode_;
  std::shared_ptr<HttpTransport> upstream_;
};

}  // namespace agecohort::net
