// Copyright 2026 The Sentiscope Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
// https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstdlib>
#include <cstring>

#include <nlohmann/json.hpp>

#include "absl/status/status.h"
#include "sentiscope/backends.h"
#include "strings.h"

extern char** environ;

namespace sentiscope {

// A child process with line-oriented pipes to its stdin and stdout.
class TransformerBackend::Process {
 public:
  static absl::StatusOr<std::unique_ptr<Process>> Spawn(
      const std::vector<std::string>& argv) {
    ::signal(SIGPIPE, SIG_IGN);
    int to_child[2];
    int from_child[2];
    if (::pipe(to_child) != 0) return Errno("pipe");
    if (::pipe(from_child) != 0) {
      ::close(to_child[0]);
      ::close(to_child[1]);
      return Errno("pipe");
    }
    posix_spawn_file_actions_t actions;
    posix_spawn_file_actions_init(&actions);
    posix_spawn_file_actions_adddup2(&actions, to_child[0], STDIN_FILENO);
    posix_spawn_file_actions_adddup2(&actions, from_child[1], STDOUT_FILENO);
    posix_spawn_file_actions_addclose(&actions, to_child[1]);
    posix_spawn_file_actions_addclose(&actions, from_child[0]);

    std::vector<char*> args;
    for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
    args.push_back(nullptr);
    pid_t pid = 0;
    const int rc = ::posix_spawnp(&pid, args[0], &actions, nullptr,
                                  args.data(), environ);
    posix_spawn_file_actions_destroy(&actions);
    ::close(to_child[0]);
    ::close(from_child[1]);
    if (rc != 0) {
      ::close(to_child[1]);
      ::close(from_child[0]);
      return absl::UnavailableError(
          StrCat("cannot start '", argv[0], "': ", std::strerror(rc)));
    }
    return std::unique_ptr<Process>(new Process(pid, to_child[1], from_child[0]));
  }

  ~Process() {
    ::close(stdin_fd_);
    ::close(stdout_fd_);
    int status = 0;
    // The worker exits on EOF; give it a moment before forcing it.
    for (int i = 0; i < 50; ++i) {
      if (::waitpid(pid_, &status, WNOHANG) == pid_) return;
      ::usleep(20000);
    }
    ::kill(pid_, SIGTERM);
    ::waitpid(pid_, &status, 0);
  }

  // Sends one JSON line and reads one JSON line back.
  absl::StatusOr<nlohmann::json> Call(const nlohmann::json& request) {
    std::lock_guard lock(mu_);
    const std::string line =
        request.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace) +
        "\n";
    size_t written = 0;
    while (written < line.size()) {
      const ssize_t n =
          ::write(stdin_fd_, line.data() + written, line.size() - written);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) return absl::UnavailableError("transformer worker closed its input");
      written += static_cast<size_t>(n);
    }
    std::string response;
    for (;;) {
      const size_t newline = buffer_.find('\n');
      if (newline != std::string::npos) {
        response = buffer_.substr(0, newline);
        buffer_.erase(0, newline + 1);
        break;
      }
      char chunk[4096];
      const ssize_t n = ::read(stdout_fd_, chunk, sizeof(chunk));
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) return absl::UnavailableError("transformer worker exited");
      buffer_.append(chunk, static_cast<size_t>(n));
    }
    auto parsed = nlohmann::json::parse(response, nullptr, false);
    if (parsed.is_discarded() || !parsed.is_object()) {
      return absl::InternalError(
          StrCat("transformer worker sent malformed reply: ", response));
    }
    if (parsed.contains("error")) {
      return absl::InternalError(StrCat(
          "transformer worker: ", parsed["error"].get<std::string>()));
    }
    return parsed;
  }

 private:
  Process(pid_t pid, int stdin_fd, int stdout_fd)
      : pid_(pid), stdin_fd_(stdin_fd), stdout_fd_(stdout_fd) {}

  static absl::Status Errno(const char* what) {
    return absl::InternalError(StrCat(what, ": ", std::strerror(errno)));
  }

  pid_t pid_;
  int stdin_fd_;
  int stdout_fd_;
  std::string buffer_;
  std::mutex mu_;
};

std::vector<std::string> TransformerBackend::DefaultWorkerCommand() {
  if (const char* env = std::getenv("SENTISCOPE_TRANSFORMER_WORKER");
      env != nullptr && *env != '\0') {
    const std::vector<std::string_view> parts = Split(env, ' ', true);
    return std::vector<std::string>(parts.begin(), parts.end());
  }
  return {"python3", SENTISCOPE_WORKER_SCRIPT};
}

absl::StatusOr<std::unique_ptr<TransformerBackend>> TransformerBackend::Start(
    Options options) {
  if (options.worker_command.empty()) {
    options.worker_command = DefaultWorkerCommand();
  }
  std::vector<std::string> argv = options.worker_command;
  argv.push_back("--model");
  argv.push_back(options.model_id);
  auto process = Process::Spawn(argv);
  if (!process.ok()) return process.status();
  auto info = (*process)->Call({{"op", "info"}});
  if (!info.ok()) {
    return absl::UnavailableError(StrCat(
        "transformer model '", options.model_id,
        "' is unavailable: ", info.status().message()));
  }
  if (info->value("num_labels", 0) != kNumStars) {
    return absl::FailedPreconditionError(StrCat(
        "model '", options.model_id, "' has ", info->value("num_labels", 0),
        " labels; a 5-star classifier is required"));
  }
  const int64_t max_tokens = info->value("max_tokens", kDefaultMaxTokens);
  return std::unique_ptr<TransformerBackend>(new TransformerBackend(
      std::move(options), *std::move(process), max_tokens));
}

TransformerBackend::TransformerBackend(Options options,
                                       std::unique_ptr<Process> process,
                                       int64_t max_tokens)
    : options_(std::move(options)),
      process_(std::move(process)),
      max_tokens_(max_tokens) {}

TransformerBackend::~TransformerBackend() = default;

absl::StatusOr<LabelDistribution> TransformerBackend::Classify(
    std::string_view text) const {
  auto reply = process_->Call({{"op", "classify"}, {"text", text}});
  if (!reply.ok()) return reply.status();
  const auto& probs = (*reply)["probs"];
  if (!probs.is_array() || probs.size() != kNumStars) {
    return absl::InternalError("transformer worker returned no 5-class probs");
  }
  std::array<double, kNumStars> p;
  for (int i = 0; i < kNumStars; ++i) p[i] = probs[i].get<double>();
  // Softmax output in float32 sums to 1 only approximately.
  double sum = 0.0;
  for (double v : p) sum += v;
  if (sum <= 0.0) return absl::InternalError("transformer probabilities sum to 0");
  for (double& v : p) v /= sum;
  return LabelDistribution::Create(p);
}

int64_t TransformerBackend::CountTokens(std::string_view text) const {
  if (text.empty()) return 0;
  auto reply = process_->Call({{"op", "count"}, {"text", text}});
  // A dead worker makes every chunk look oversized; Classify then reports
  // the underlying failure.
  if (!reply.ok()) return max_tokens_ + 1;
  return reply->value("tokens", int64_t{0});
}

absl::StatusOr<std::unique_ptr<ScoringBackend>> TransformerBackend::Clone() const {
  auto clone = Start(options_);
  if (!clone.ok()) return clone.status();
  return std::unique_ptr<ScoringBackend>(std::move(*clone));
}

}  // namespace sentiscope
