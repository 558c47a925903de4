#pragma once

#include <atomic>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <string>
#include <unistd.h>

#include "agecohort/error.hpp"
#include "agecohort/transport.hpp"

namespace testgen {

// Scripted transport: responses keyed by "METHOD url" (body ignored) or computed by a handler.
class FakeTransport : public agecohort::net::HttpTransport {
 public:
  using Handler = std::function<agecohort::net::HttpResponse(const agecohort::net::HttpRequest&)>;

  void on(const std::string& method, const std::string& url, int status, std::string body) {
    routes_[method + " " + url] = [status, body](const auto&) { return agecohort::net::HttpResponse{status, body, {}}; };
  }
  void on(const std::string& method, const std::string& url, Handler h) { routes_[method + " " + url] = std::move(h); }
  void fail(const std::string& method, const std::string& url) {
    routes_[method + " " + url] = [](const auto&) -> agecohort::net::HttpResponse {
      throw agecohort::Error(agecohort::ErrorCode::NetworkError, "scripted failure");
    };
  }

  agecohort::net::HttpResponse send(const agecohort::net::HttpRequest& request) override {
    ++calls;
    {
      std::lock_guard lock(mutex_);
      last_request = request;
    }
    const auto it = routes_.find(request.method + " " + request.url);
    if (it == routes_.end()) {
      if (fallback) return fallback(request);
      throw agecohort::Error(agecohort::ErrorCode::NetworkError, "no route for " + request.url);
    }
    return it->second(request);
  }

  std::atomic<int> calls{0};
  agecohort::net::HttpRequest last_request;
  Handler fallback;

 private:
  std::map<std::string, Handler> routes_;
  std::mutex mutex_;
};

// Fresh directory under the system temp dir, removed on scope exit.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() / ("agecohort-" + tag + "-" + std::to_string(::getpid()));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace testgen
