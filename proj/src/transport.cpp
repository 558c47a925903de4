#include "agecohort/transport.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <sstream>
#include <thread>

#include <fmt/format.h>
#include <httplib.h>
#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "agecohort/error.hpp"
#include "agecohort/io.hpp"

namespace agecohort::net {

std::string sha256_hex(std::string_view data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::IoError, "SHA-256 failed");
  }
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

std::string request_key(const HttpRequest& request) {
  return sha256_hex(request.method + "\n" + request.url + "\n" + request.body);
}

std::string url_encode(std::string_view text) {
  std::string out;
  for (unsigned char c : text) {
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
      out += static_cast<char>(c);
    } else {
      out += fmt::format("%{:02X}", c);
    }
  }
  return out;
}

RateLimiter::RateLimiter(double requests_per_second, double burst) : rate_(requests_per_second), burst_(burst) {}

void RateLimiter::acquire(const std::string& host) {
  if (rate_ <= 0.0) return;
  std::unique_lock lock(mutex_);
  auto now = std::chrono::steady_clock::now();
  auto [it, inserted] = buckets_.try_emplace(host, Bucket{burst_, now});
  Bucket& b = it->second;
  b.tokens = std::min(burst_, b.tokens + std::chrono::duration<double>(now - b.last).count() * rate_);
  b.last = now;
  if (b.tokens < 1.0) {
    const auto wait = std::chrono::duration<double>((1.0 - b.tokens) / rate_);
    // Holding the lock while sleeping serializes requests to every host; fine at our request volume.
    std::this_thread::sleep_for(wait);
    b.tokens = 1.0;
    b.last = std::chrono::steady_clock::now();
  }
  b.tokens -= 1.0;
}

LiveTransport::LiveTransport(std::chrono::seconds timeout, std::shared_ptr<RateLimiter> limiter)
    : timeout_(timeout), limiter_(std::move(limiter)) {}

HttpResponse LiveTransport::send(const HttpRequest& request) {
  // Split "scheme://host[:port]" from "/path?query".
  const auto scheme_end = request.url.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(ErrorCode::NetworkError, "not an absolute URL: " + request.url);
  }
  const auto path_start = request.url.find('/', scheme_end + 3);
  const std::string origin = request.url.substr(0, path_start);
  const std::string path = path_start == std::string::npos ? "/" : request.url.substr(path_start);
  if (limiter_) limiter_->acquire(origin);

  httplib::Client client(origin);
  client.set_connection_timeout(timeout_);
  client.set_read_timeout(timeout_);
  client.set_write_timeout(timeout_);
  client.set_follow_location(true);

  httplib::Result result = request.method == "POST"
                               ? client.Post(path, request.body,
                                             request.content_type.empty() ? "application/octet-stream"
                                                                          : request.content_type)
                               : client.Get(path);
  if (!result) {
    throw Error(ErrorCode::NetworkError, request.url + ": " + httplib::to_string(result.error()));
  }
  HttpResponse response{result->status, result->body, {}};
  for (const auto& [k, v] : result->headers) response.headers[k] = v;
  return response;
}

CacheMode parse_cache_mode(std::string_view text) {
  if (text == "live") return CacheMode::Live;
  if (text == "record") return CacheMode::Record;
  if (text == "replay") return CacheMode::Replay;
  throw Error(ErrorCode::InvalidArgument, "http mode must be live, record or replay: " + std::string(text));
}

CachingTransport::CachingTransport(std::filesystem::path dir, CacheMode mode, std::shared_ptr<HttpTransport> upstream)
    : dir_(std::move(dir)), mode_(mode), upstream_(std::move(upstream)) {}

std::filesystem::path CachingTransport::path_for(const HttpRequest& request) const {
  return dir_ / (request_key(request) + ".json");
}

namespace {

bool valid_utf8(const std::string& s) {
  try {
    (void)nlohmann::json(s).dump();
    return true;
  } catch (const nlohmann::json::type_error&) {
    return false;
  }
}

std::string base64_encode(const std::string& bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3) + 1, '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                reinterpret_cast<const unsigned char*>(bytes.data()), static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

std::string base64_decode(const std::string& text) {
  if (text.size() % 4 != 0) throw Error(ErrorCode::IoError, "bad base64 length in cache entry");
  std::string out(3 * text.size() / 4, '\0');
  const int n = EVP_DecodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                reinterpret_cast<const unsigned char*>(text.data()), static_cast<int>(text.size()));
  if (n < 0) throw Error(ErrorCode::IoError, "bad base64 in cache entry");
  std::size_t pad = 0;
  for (auto it = text.rbegin(); it != text.rend() && *it == '='; ++it) ++pad;
  out.resize(static_cast<std::size_t>(n) - pad);
  return out;
}

}  // namespace

void CachingTransport::store(const std::filesystem::path& file, const HttpRequest& request,
                             const HttpResponse& response) {
  nlohmann::ordered_json j;
  j["request"] = {{"method", request.method}, {"url", request.url}, {"body", request.body}};
  j["response"] = {{"status", response.status}};
  if (valid_utf8(response.body)) {
    j["response"]["body"] = response.body;
  } else {
    j["response"]["body_base64"] = base64_encode(response.body);
  }
  j["response"]["headers"] = response.headers;
  io::write_file_atomic(file, j.dump(2) + "\n");
}

HttpResponse CachingTransport::send(const HttpRequest& request) {
  if (mode_ == CacheMode::Live) {
    if (!upstream_) throw Error(ErrorCode::NetworkError, "no upstream transport configured");
    return upstream_->send(request);
  }
  const auto file = path_for(request);
  if (std::filesystem::exists(file)) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(io::read_file(file));
      const auto& req = j.at("request");
      if (req.at("method") != request.method || req.at("url") != request.url || req.at("body") != request.body) {
        throw Error(ErrorCode::IoError, "cache entry does not match request: " + file.string());
      }
      const auto& res = j.at("response");
      HttpResponse response{res.at("status").get<int>(),
                            res.contains("body_base64") ? base64_decode(res.at("body_base64").get<std::string>())
                                                        : res.at("body").get<std::string>(),
                            {}};
      if (res.contains("headers")) response.headers = res.at("headers").get<std::map<std::string, std::string>>();
      return response;
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::IoError, "corrupt cache entry " + file.string() + ": " + e.what());
    }
  }
  if (mode_ == CacheMode::Replay || !upstream_) {
    throw Error(ErrorCode::NetworkError, "no recorded response for " + request.method + " " + request.url + " (" +
                                             file.filename().string() + ")");
  }
  auto response = upstream_->send(request);
  if (response.status == 200) {
    std::filesystem::create_directories(dir_);
    store(file, request, response);
  }
  return response;
}

}  // namespace agecohort::net
