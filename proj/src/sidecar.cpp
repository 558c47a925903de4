#include "agecohort/sidecar.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <thread>
#include <utility>

#include <nlohmann/json.hpp>

#include "agecohort/error.hpp"

extern char** environ;

namespace agecohort::inference {
namespace {

std::string classes_json() {
  std::string s = "[";
  for (int i = 0; i < kNumCohorts; ++i) {
    if (i > 0) s += ",";
    s += "\"" + std::string(to_string(cohort_from_index(i))) + "\"";
  }
  return s + "]";
}

nlohmann::json parse_line(std::string_view line) {
  try {
    return nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorCode::ProtocolError, "sidecar line is not JSON: " + std::string(line.substr(0, 200)));
  }
}

}  // namespace

std::string handshake_line() {
  return "{\"protocol\": \"" + std::string(kSidecarProtocol) + "\", \"classes\": " + classes_json() + "}";
}

std::string request_line(long long id, const std::string& image_path) {
  return "{\"id\": " + std::to_string(id) + ", \"image_path\": " + nlohmann::json(image_path).dump() + "}";
}

std::string response_line(long long id, const Probabilities& probs) {
  std::string s = "{\"id\": " + std::to_string(id) + ", \"probs\": [";
  for (int i = 0; i < kNumCohorts; ++i) {
    if (i > 0) s += ",";
    s += nlohmann::json(probs[i]).dump();
  }
  return s + "]}";
}

void check_handshake(std::string_view line) {
  const auto j = parse_line(line);
  if (!j.is_object() || j.value("protocol", "") != kSidecarProtocol || !j.contains("classes") ||
      !j["classes"].is_array() || j["classes"].size() != kNumCohorts) {
    throw Error(ErrorCode::ProtocolError, "bad sidecar handshake: " + std::string(line));
  }
  for (int i = 0; i < kNumCohorts; ++i) {
    if (!j["classes"][i].is_string() || j["classes"][i] != to_string(cohort_from_index(i))) {
      throw Error(ErrorCode::ProtocolError, "sidecar classes out of canonical order: " + std::string(line));
    }
  }
}

std::vector<double> parse_response(std::string_view line, long long expected_id) {
  const auto j = parse_line(line);
  if (!j.is_object() || !j.contains("id") || !j["id"].is_number_integer()) {
    throw Error(ErrorCode::ProtocolError, "sidecar response without integer id");
  }
  if (j["id"].get<long long>() != expected_id) {
    throw Error(ErrorCode::ProtocolError, "sidecar answered id " + j["id"].dump() + ", expected " +
                                              std::to_string(expected_id));
  }
  if (!j.contains("probs") || !j["probs"].is_array()) {
    throw Error(ErrorCode::InvalidProbabilityVector, "sidecar response without probs array");
  }
  std::vector<double> probs;
  for (const auto& v : j["probs"]) {
    if (!v.is_number()) throw Error(ErrorCode::InvalidProbabilityVector, "non-numeric probability");
    probs.push_back(v.get<double>());
  }
  return probs;
}

SidecarBackend::SidecarBackend(std::vector<std::string> argv, std::chrono::milliseconds timeout) : timeout_(timeout) {
  if (argv.empty()) throw Error(ErrorCode::BackendUnavailable, "empty sidecar command");
  int in_pipe[2];
  int out_pipe[2];
  if (::pipe2(in_pipe, O_CLOEXEC) != 0 || ::pipe2(out_pipe, O_CLOEXEC) != 0) {
    throw Error(ErrorCode::BackendUnavailable, std::string("pipe: ") + std::strerror(errno));
  }
  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_adddup2(&actions, in_pipe[0], STDIN_FILENO);
  posix_spawn_file_actions_adddup2(&actions, out_pipe[1], STDOUT_FILENO);

  std::vector<char*> cargv;
  for (auto& a : argv) cargv.push_back(a.data());
  cargv.push_back(nullptr);
  const int rc = ::posix_spawnp(&pid_, cargv[0], &actions, nullptr, cargv.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];
  if (rc != 0) {
    pid_ = -1;
    ::close(to_child_);
    ::close(from_child_);
    to_child_ = from_child_ = -1;
    throw Error(ErrorCode::BackendUnavailable, "cannot start " + argv[0] + ": " + std::strerror(rc));
  }
  ::signal(SIGPIPE, SIG_IGN);
  try {
    check_handshake(read_line());
  } catch (const Error& e) {
    shutdown();
    throw Error(ErrorCode::BackendUnavailable, std::string("sidecar handshake failed: ") + e.what());
  }
}

SidecarBackend::~SidecarBackend() { shutdown(); }

void SidecarBackend::shutdown() {
  if (to_child_ >= 0) ::close(to_child_);
  if (from_child_ >= 0) ::close(from_child_);
  to_child_ = from_child_ = -1;
  if (pid_ <= 0) return;
  const pid_t pid = std::exchange(pid_, -1);
  int status = 0;
  for (int i = 0; i < 50; ++i) {
    if (::waitpid(pid, &status, WNOHANG) == pid) return;
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
  }
  ::kill(pid, SIGKILL);
  ::waitpid(pid, &status, 0);
}

std::string SidecarBackend::read_line() {
  const auto deadline = std::chrono::steady_clock::now() + timeout_;
  while (true) {
    if (const auto nl = buffer_.find('\n'); nl != std::string::npos) {
      std::string line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      return line;
    }
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) throw Error(ErrorCode::BackendUnavailable, "sidecar timed out");
    pollfd pfd{from_child_, POLLIN, 0};
    const int ready = ::poll(&pfd, 1, static_cast<int>(left.count()));
    if (ready < 0 && errno == EINTR) continue;
    if (ready <= 0) throw Error(ErrorCode::BackendUnavailable, "sidecar timed out");
    char chunk[4096];
    const auto n = ::read(from_child_, chunk, sizeof chunk);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) throw Error(ErrorCode::BackendUnavailable, "sidecar closed its output");
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

void SidecarBackend::write_line(const std::string& line) {
  const std::string data = line + "\n";
  std::size_t done = 0;
  while (done < data.size()) {
    const auto n = ::write(to_child_, data.data() + done, data.size() - done);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) throw Error(ErrorCode::BackendUnavailable, "sidecar closed its input");
    done += static_cast<std::size_t>(n);
  }
}

std::vector<double> SidecarBackend::probabilities(const TileImage& tile) {
  std::lock_guard lock(mutex_);
  const long long id = next_id_++;
  write_line(request_line(id, tile.path.string()));
  return parse_response(read_line(), id);
}

}  // namespace agecohort::inference
