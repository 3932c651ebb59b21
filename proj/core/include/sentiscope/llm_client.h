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

#ifndef SENTISCOPE_LLM_CLIENT_H_
#define SENTISCOPE_LLM_CLIENT_H_

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <unordered_map>

#include "absl/status/status.h"
#include "absl/status/statusor.h"

namespace sentiscope {

// Produces a completion for one prompt. Implementations must be safe to
// call from several threads.
class LlmTransport {
 public:
  virtual ~LlmTransport() = default;
  virtual absl::StatusOr<std::string> Complete(std::string_view model,
                                               std::string_view prompt) = 0;
  // Number of Complete() calls that reached the backing service.
  virtual int64_t calls() const = 0;
};

struct RetryPolicy {
  int max_attempts = 4;
  std::chrono::milliseconds initial_backoff{500};
  std::chrono::milliseconds max_backoff{8000};
  double multiplier = 2.0;

  // Delay before attempt `attempt` (1-based; attempt 1 has no delay).
  std::chrono::milliseconds BackoffBefore(int attempt) const;
};

// True for failures worth retrying: Unavailable, ResourceExhausted,
// DeadlineExceeded.
bool IsRetryable(const absl::Status& status);

// OpenAI-style chat completion endpoint:
//   POST {base_url}/chat/completions
//   {"model": ..., "messages": [{"role": "user", "content": prompt}],
//    "temperature": 0}
// and reads choices[0].message.content. Connection errors, 429 and 5xx
// are retried with exponential backoff; 401/403 fail at once.
class HttpChatTransport final : public LlmTransport {
 public:
  struct Options {
    std::string base_url;  // e.g. https://api.openai.com/v1
    std::string auth_token;
    RetryPolicy retry;
    std::chrono::seconds timeout{60};
    // Injected for tests; defaults to std::this_thread::sleep_for.
    std::function<void(std::chrono::milliseconds)> sleep;
  };

  static absl::StatusOr<std::unique_ptr<HttpChatTransport>> Create(Options options);

  absl::StatusOr<std::string> Complete(std::string_view model,
                                       std::string_view prompt) override;
  int64_t calls() const override { return calls_.load(); }

 private:
  HttpChatTransport(Options options, std::string origin, std::string path);
  absl::StatusOr<std::string> Attempt(std::string_view model,
                                      std::string_view prompt);

  Options options_;
  std::string origin_;  // scheme://host[:port]
  std::string path_;    // .../chat/completions
  std::atomic<int64_t> calls_{0};
};

// Offline responses keyed like the cache. A missing key is a NotFound
// "fixture miss", never an empty completion.
class FixtureTransport final : public LlmTransport {
 public:
  using Responder =
      std::function<absl::StatusOr<std::string>(std::string_view model,
                                                std::string_view prompt)>;

  // Reads JSON lines with "response" and either "key_hash" or
  // "model" + "prompt".
  static absl::StatusOr<std::unique_ptr<FixtureTransport>> Load(
      const std::filesystem::path& path);
  explicit FixtureTransport(std::unordered_map<std::string, std::string> by_key);
  explicit FixtureTransport(Responder responder);

  absl::StatusOr<std::string> Complete(std::string_view model,
                                       std::string_view prompt) override;
  int64_t calls() const override { return calls_.load(); }

 private:
  std::unordered_map<std::string, std::string> by_key_;
  Responder responder_;
  std::atomic<int64_t> calls_{0};
};

// Append-only JSON-lines cache:
//   {"key_hash","model","prompt","response","timestamp"}
// Lookups may run concurrently; appends are serialized.
class ResponseCache {
 public:
  // SHA-256 hex of the JSON array [model, prompt].
  static std::string Key(std::string_view model, std::string_view prompt);

  // A missing file is an empty cache; it is created on first append.
  static absl::StatusOr<std::unique_ptr<ResponseCache>> Open(
      const std::filesystem::path& path);
  // Memory-only cache.
  ResponseCache() = default;

  std::optional<std::string> Lookup(const std::string& key) const;
  absl::Status Append(std::string_view model, std::string_view prompt,
                      std::string_view response);
  size_t size() const;

 private:
  explicit ResponseCache(std::filesystem::path path) : path_(std::move(path)) {}

  std::optional<std::filesystem::path> path_;
  mutable std::shared_mutex mu_;
  std::unordered_map<std::string, std::string> entries_;
};

struct Completion {
  std::string text;
  bool from_cache = false;
};

// Cache-first client: hits are served locally; live misses are appended to
// the cache. Fixture responses are not cached.
class LlmClient {
 public:
  LlmClient(std::string model, std::shared_ptr<LlmTransport> transport,
            std::shared_ptr<ResponseCache> cache, bool cache_misses = true);

  absl::StatusOr<Completion> Query(std::string_view prompt);

  const std::string& model() const { return model_; }
  int64_t network_calls() const { return transport_->calls(); }
  int64_t cache_hits() const { return cache_hits_.load(); }

 private:
  std::string model_;
  std::shared_ptr<LlmTransport> transport_;
  std::shared_ptr<ResponseCache> cache_;
  bool cache_misses_;
  std::atomic<int64_t> cache_hits_{0};
};

}  // namespace sentiscope

#endif  // SENTISCOPE_LLM_CLIENT_H_
