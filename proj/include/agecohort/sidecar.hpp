#pragma once

// Line-delimited JSON protocol spoken with an external classifier process over
// its stdin/stdout:
//
//   sidecar -> {"protocol": "buildingage/1", "classes": ["pre-1919", ..., "post-2000"]}   (once, at startup)
//   engine  -> {"id": 7, "image_path": "/tiles/19_1_2.img"}
//   sidecar -> {"id": 7, "probs": [0.1, 0.2, 0.3, 0.2, 0.2]}
//
// One request is in flight at a time.

#include <chrono>
#include <mutex>
#include <string>
#include <string_view>
#include <sys/types.h>
#include <vector>

#include "agecohort/inference.hpp"

namespace agecohort::inference {

inline constexpr std::string_view kSidecarProtocol = "buildingage/1";

std::string handshake_line();
std::string request_line(long long id, const std::string& image_path);
std::string response_line(long long id, const Probabilities& probs);

// Throws ProtocolError unless the line is the expected handshake.
void check_handshake(std::string_view line);
// Throws ProtocolError on malformed JSON or a mismatched id; InvalidProbabilityVector
// when "probs" does not hold numbers.
std::vector<double> parse_response(std::string_view line, long long expected_id);

class SidecarBackend : public ClassifierBackend {
 public:
  // Spawns argv[0] with the given arguments and validates the handshake.
  // Throws BackendUnavailable when the process cannot start or handshakes incorrectly.
  explicit SidecarBackend(std::vector<std::string> argv,
                          std::chrono::milliseconds timeout = std::chrono::seconds(30));
  ~SidecarBackend() override;
  SidecarBackend(const SidecarBackend&) = delete;
  SidecarBackend& operator=(const SidecarBackend&) = delete;

  std::vector<double> probabilities(const TileImage& tile) override;

 private:
  std::string read_line();
  void write_line(const std::string& line);
  void shutdown();

  pid_t pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::chrono::milliseconds timeout_;
  std::string buffer_;
  long long next_id_ = 1;
  std::mutex mutex_;
};

}  // namespace agecohort::inference
