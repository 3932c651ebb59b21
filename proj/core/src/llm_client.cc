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

#include "sentiscope/llm_client.h"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <ctime>
#include <fstream>
#include <mutex>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "sentiscope/corpus_io.h"
#include "strings.h"

namespace sentiscope {
namespace {

using Json = nlohmann::json;

std::string Dump(const Json& json) {
  return json.dump(-1, ' ', false, Json::error_handler_t::replace);
}

std::string Sha256Hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  EVP_Digest(data.data(), data.size(), digest, &length, EVP_sha256(), nullptr);
  std::string hex;
  hex.reserve(length * 2);
  for (unsigned int i = 0; i < length; ++i) hex += fmt::sprintf("%02x", digest[i]);
  return hex;
}

std::string UtcTimestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

absl::Status StatusForHttp(int code, std::string_view body) {
  const std::string detail =
      StrCat("HTTP ", code, ": ", body.substr(0, std::min<size_t>(body.size(), 300)));
  if (code == 401) return absl::UnauthenticatedError(detail);
  if (code == 403) return absl::PermissionDeniedError(detail);
  if (code == 429) return absl::ResourceExhaustedError(detail);
  if (code >= 500) return absl::UnavailableError(detail);
  return absl::InvalidArgumentError(detail);
}

}  // namespace

std::chrono::milliseconds RetryPolicy::BackoffBefore(int attempt) const {
  if (attempt <= 1) return std::chrono::milliseconds(0);
  const double delay = static_cast<double>(initial_backoff.count()) *
                       std::pow(multiplier, attempt - 2);
  return std::chrono::milliseconds(static_cast<int64_t>(
      std::min(delay, static_cast<double>(max_backoff.count()))));
}

bool IsRetryable(const absl::Status& status) {
  return absl::IsUnavailable(status) || absl::IsResourceExhausted(status) ||
         absl::IsDeadlineExceeded(status);
}

absl::StatusOr<std::unique_ptr<HttpChatTransport>> HttpChatTransport::Create(
    Options options) {
  std::string_view url = options.base_url;
  while (!url.empty() && url.back() == '/') url.remove_suffix(1);
  const size_t scheme_end = url.find("://");
  if (scheme_end == std::string_view::npos ||
      (url.substr(0, scheme_end) != "http" && url.substr(0, scheme_end) != "https")) {
    return absl::InvalidArgumentError(
        StrCat("LLM endpoint '", options.base_url, "' must start with http(s)://"));
  }
  const size_t path_start = url.find('/', scheme_end + 3);
  std::string origin(url.substr(0, path_start));
  std::string path(path_start == std::string_view::npos ? "" : url.substr(path_start));
  if (!path.ends_with("/chat/completions")) path += "/chat/completions";
  if (!options.sleep) {
    options.sleep = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
  }
  return std::unique_ptr<HttpChatTransport>(
      new HttpChatTransport(std::move(options), std::move(origin), std::move(path)));
}

HttpChatTransport::HttpChatTransport(Options options, std::string origin,
                                     std::string path)
    : options_(std::move(options)), origin_(std::move(origin)), path_(std::move(path)) {}

absl::StatusOr<std::string> HttpChatTransport::Attempt(std::string_view model,
                                                       std::string_view prompt) {
  httplib::Client client(origin_);
  client.set_connection_timeout(options_.timeout);
  client.set_read_timeout(options_.timeout);
  client.set_write_timeout(options_.timeout);
  httplib::Headers headers;
  if (!options_.auth_token.empty()) {
    headers.emplace("Authorization", StrCat("Bearer ", options_.auth_token));
  }
  const Json request = {
      {"model", model},
      {"messages", Json::array({{{"role", "user"}, {"content", prompt}}})},
      {"temperature", 0},
  };
  calls_.fetch_add(1);
  auto response = client.Post(path_, headers, Dump(request), "application/json");
  if (!response) {
    return absl::UnavailableError(StrCat(
        "cannot reach ", origin_, ": ", httplib::to_string(response.error())));
  }
  if (response->status != 200) return StatusForHttp(response->status, response->body);
  const Json body = Json::parse(response->body, nullptr, false);
  if (body.is_discarded()) {
    return absl::InternalError("chat completion response is not JSON");
  }
  try {
    return body.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const Json::exception&) {
    return absl::InternalError(StrCat(
        "chat completion response has no choices[0].message.content: ",
        response->body.substr(0, 300)));
  }
}

absl::StatusOr<std::string> HttpChatTransport::Complete(std::string_view model,
                                                        std::string_view prompt) {
  absl::Status last;
  const int attempts = std::max(1, options_.retry.max_attempts);
  for (int attempt = 1; attempt <= attempts; ++attempt) {
    if (attempt > 1) options_.sleep(options_.retry.BackoffBefore(attempt));
    auto result = Attempt(model, prompt);
    if (result.ok()) return result;
    last = result.status();
    if (!IsRetryable(last)) return last;
  }
  return absl::Status(last.code(), StrCat("giving up after ", attempts,
                                                " attempts: ", last.message()));
}

absl::StatusOr<std::unique_ptr<FixtureTransport>> FixtureTransport::Load(
    const std::filesystem::path& path) {
  auto content = ReadFile(path);
  if (!content.ok()) return content.status();
  std::unordered_map<std::string, std::string> by_key;
  int line_number = 0;
  for (std::string_view line : Split(*content, '\n')) {
    ++line_number;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    const Json entry = Json::parse(line, nullptr, false);
    if (entry.is_discarded() || !entry.is_object() || !entry.contains("response")) {
      return absl::InvalidArgumentError(StrCat(
          path.string(), ":", line_number, ": expected a JSON object with \"response\""));
    }
    std::string key;
    if (entry.contains("key_hash")) {
      key = entry["key_hash"].get<std::string>();
    } else if (entry.contains("model") && entry.contains("prompt")) {
      key = ResponseCache::Key(entry["model"].get<std::string>(),
                               entry["prompt"].get<std::string>());
    } else {
      return absl::InvalidArgumentError(StrCat(
          path.string(), ":", line_number, ": needs key_hash or model+prompt"));
    }
    by_key[key] = entry["response"].get<std::string>();
  }
  return std::make_unique<FixtureTransport>(std::move(by_key));
}

FixtureTransport::FixtureTransport(std::unordered_map<std::string, std::string> by_key)
    : by_key_(std::move(by_key)) {}

FixtureTransport::FixtureTransport(Responder responder)
    : responder_(std::move(responder)) {}

absl::StatusOr<std::string> FixtureTransport::Complete(std::string_view model,
                                                       std::string_view prompt) {
  calls_.fetch_add(1);
  if (responder_) return responder_(model, prompt);
  const std::string key = ResponseCache::Key(model, prompt);
  if (auto it = by_key_.find(key); it != by_key_.end()) return it->second;
  return absl::NotFoundError(StrCat("fixture miss: no response for key ", key));
}

std::string ResponseCache::Key(std::string_view model, std::string_view prompt) {
  return Sha256Hex(Dump(Json::array({model, prompt})));
}

absl::StatusOr<std::unique_ptr<ResponseCache>> ResponseCache::Open(
    const std::filesystem::path& path) {
  std::unique_ptr<ResponseCache> cache(new ResponseCache(path));
  std::error_code ec;
  if (!std::filesystem::exists(path, ec)) return cache;
  auto content = ReadFile(path);
  if (!content.ok()) return content.status();
  int line_number = 0;
  for (std::string_view line : Split(*content, '\n')) {
    ++line_number;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    const Json entry = Json::parse(line, nullptr, false);
    if (entry.is_discarded() || !entry.contains("key_hash") ||
        !entry.contains("response")) {
      return absl::DataLossError(StrCat(path.string(), ":", line_number,
                                              ": corrupt cache entry"));
    }
    cache->entries_[entry["key_hash"].get<std::string>()] =
        entry["response"].get<std::string>();
  }
  return cache;
}

std::optional<std::string> ResponseCache::Lookup(const std::string& key) const {
  std::shared_lock lock(mu_);
  if (auto it = entries_.find(key); it != entries_.end()) return it->second;
  return std::nullopt;
}

absl::Status ResponseCache::Append(std::string_view model, std::string_view prompt,
                                   std::string_view response) {
  const std::string key = Key(model, prompt);
  std::unique_lock lock(mu_);
  if (path_) {
    const Json entry = {{"key_hash", key},
                        {"model", model},
                        {"prompt", prompt},
                        {"response", response},
                        {"timestamp", UtcTimestamp()}};
    std::error_code ec;
    if (path_->has_parent_path()) std::filesystem::create_directories(path_->parent_path(), ec);
    std::ofstream out(*path_, std::ios::binary | std::ios::app);
    out << Dump(entry) << '\n';
    out.close();
    if (!out) {
      return absl::PermissionDeniedError(
          StrCat("cannot append to cache ", path_->string()));
    }
  }
  entries_[key] = std::string(response);
  return absl::OkStatus();
}

size_t ResponseCache::size() const {
  std::shared_lock lock(mu_);
  return entries_.size();
}

LlmClient::LlmClient(std::string model, std::shared_ptr<LlmTransport> transport,
                     std::shared_ptr<ResponseCache> cache, bool cache_misses)
    : model_(std::move(model)),
      transport_(std::move(transport)),
      cache_(std::move(cache)),
      cache_misses_(cache_misses) {}

absl::StatusOr<Completion> LlmClient::Query(std::string_view prompt) {
  if (cache_) {
    if (auto hit = cache_->Lookup(ResponseCache::Key(model_, prompt))) {
      cache_hits_.fetch_add(1);
      return Completion{*std::move(hit), true};
    }
  }
  auto text = transport_->Complete(model_, prompt);
  if (!text.ok()) return text.status();
  if (cache_ && cache_misses_) {
    if (auto status = cache_->Append(model_, prompt, *text); !status.ok()) return status;
  }
  return Completion{*std::move(text), false};
}

}  // namespace sentiscope
