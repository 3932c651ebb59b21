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

#ifndef SENTISCOPE_LLM_VALIDATE_H_
#define SENTISCOPE_LLM_VALIDATE_H_

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "sentiscope/corpus_io.h"
#include "sentiscope/llm_client.h"
#include "sentiscope/sentiment.h"

namespace sentiscope {

inline constexpr std::string_view kAbstractPlaceholder = "{abstract}";

enum class PromptName { kSentiment1To5, kSubjectivityPhrases };

std::string_view PromptNameString(PromptName name);
absl::StatusOr<PromptName> ParsePromptName(std::string_view name);

class PromptTemplate {
 public:
  // Fails unless `text` contains "{abstract}" exactly once.
  static absl::StatusOr<PromptTemplate> Create(PromptName name, std::string text);
  static PromptTemplate Default(PromptName name);

  PromptName name() const { return name_; }
  const std::string& text() const { return text_; }

 private:
  PromptTemplate(PromptName name, std::string text)
      : name_(name), text_(std::move(text)) {}

  PromptName name_;
  std::string text_;
};

// Substitutes the abstract verbatim; braces inside it are not expanded.
absl::StatusOr<std::string> BuildPrompt(const PromptTemplate& prompt,
                                        std::string_view abstract);

// First standalone 1-5 after a rating cue (rate, rating, score, classify
// and their inflections), else the first one anywhere. Denominators
// ("/5", "out of 5"), scale ranges ("1 to 5", "1-5"), decimals, list
// markers and digits glued to words are never candidates.
absl::StatusOr<int> ParseStarRating(std::string_view response);

// Quoted spans plus the text of numbered or bulleted list items, in order,
// without duplicates.
std::vector<std::string> ParseSubjectivePhrases(std::string_view response);

struct LlmVerdict {
  int64_t record_id = 0;
  PromptName prompt_name = PromptName::kSentiment1To5;
  std::optional<int> stars;
  std::vector<std::string> subjective_phrases;
  std::string raw_response;
  bool from_cache = false;
};

struct AgreementStats {
  int64_t n = 0;
  double exact_match_rate = 0.0;
  double mean_absolute_star_error = 0.0;
  // confusion[model_label - 1][llm_stars - 1]
  std::array<std::array<int64_t, kNumStars>, kNumStars> confusion{};

  int64_t Trace() const;
};

struct VerdictFailure {
  int64_t record_id = 0;
  PromptName prompt_name = PromptName::kSentiment1To5;
  std::string reason;
  std::string raw_response;  // empty for query failures
};

struct CrossValidateOptions {
  int64_t sample_size = 0;
  uint64_t seed = 0;
  int parallelism = 1;  // concurrent queries
  bool subjectivity = false;
  PromptTemplate sentiment_prompt = PromptTemplate::Default(PromptName::kSentiment1To5);
  PromptTemplate subjectivity_prompt =
      PromptTemplate::Default(PromptName::kSubjectivityPhrases);
};

struct CrossValidation {
  AgreementStats stats;
  std::vector<int64_t> sampled_record_ids;  // ascending
  std::vector<LlmVerdict> verdicts;         // by record_id, sentiment first
  std::vector<VerdictFailure> parse_failures;
  std::vector<VerdictFailure> query_failures;
};

// `sample_size` distinct ids drawn by a seeded partial shuffle of the sorted
// ids, returned ascending.
absl::StatusOr<std::vector<int64_t>> SampleRecordIds(std::vector<int64_t> ids,
                                                     int64_t sample_size,
                                                     uint64_t seed);

// Compares LLM star ratings with each sampled result's label. Records whose
// response does not parse, or whose query fails, are left out of the
// statistics and reported. Authentication failures abort the run.
absl::StatusOr<CrossValidation> CrossValidate(
    std::span<const AbstractRecord> records,
    std::span<const SentimentResult> results, LlmClient& client,
    const CrossValidateOptions& options);

AgreementStats ComputeAgreement(std::span<const std::pair<int, int>> label_vs_stars);

// Deterministic summary: no timestamps and no cache provenance.
nlohmann::json AgreementJson(const CrossValidation& validation,
                             const CrossValidateOptions& options,
                             std::string_view model);
nlohmann::json VerdictToJson(const LlmVerdict& verdict);

}  // namespace sentiscope

#endif  // SENTISCOPE_LLM_VALIDATE_H_
