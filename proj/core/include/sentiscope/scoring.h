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

#ifndef SENTISCOPE_SCORING_H_
#define SENTISCOPE_SCORING_H_

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "sentiscope/corpus_io.h"
#include "sentiscope/sentiment.h"

namespace sentiscope {

// Two positions of every model input go to the sequence delimiters.
inline constexpr int64_t kReservedDelimiterTokens = 2;
inline constexpr int64_t kDefaultMaxTokens = 512;

// A 5-class sentiment classifier.
//
// Classify() must be deterministic for a fixed configuration. CountTokens()
// excludes delimiter tokens and returns 0 for "". When IsShareable() is
// false, parallel callers obtain one instance per worker through Clone().
class ScoringBackend {
 public:
  virtual ~ScoringBackend() = default;

  virtual absl::StatusOr<LabelDistribution> Classify(std::string_view text) const = 0;
  virtual int64_t CountTokens(std::string_view text) const = 0;
  virtual int64_t MaxTokens() const = 0;
  virtual std::string Name() const = 0;

  virtual bool IsShareable() const { return true; }
  virtual absl::StatusOr<std::unique_ptr<ScoringBackend>> Clone() const = 0;
};

struct ChunkingResult {
  std::vector<std::string> chunks;
  std::vector<int64_t> token_counts;  // parallel to `chunks`
  std::vector<std::string> warnings;
};

// Budget available to text in each chunk: min(max_tokens, budget) - 2.
int64_t EffectiveChunkBudget(const ScoringBackend& backend,
                             int64_t chunk_budget = kDefaultMaxTokens);

// Greedy word-boundary chunking: each chunk is the longest run of remaining
// words whose token count fits the effective budget. A single word that does
// not fit alone is cut to its longest fitting prefix and a warning recorded.
// Fails with InvalidArgument when `text` has no words.
absl::StatusOr<ChunkingResult> ChunkText(std::string_view text,
                                         const ScoringBackend& backend,
                                         int64_t chunk_budget = kDefaultMaxTokens);

// Token-count weighted mean of the chunk distributions.
absl::StatusOr<LabelDistribution> AggregateChunks(
    std::span<const ChunkScore> chunk_scores);

// Chunks, classifies and aggregates one text.
absl::StatusOr<SentimentResult> ScoreText(int64_t record_id,
                                          std::string_view text,
                                          const ScoringBackend& backend,
                                          int64_t chunk_budget = kDefaultMaxTokens);

absl::StatusOr<SentimentResult> ScoreRecord(const AbstractRecord& record,
                                            const ScoringBackend& backend,
                                            int64_t chunk_budget = kDefaultMaxTokens);

struct ScoringFailure {
  int64_t record_id = 0;
  std::string reason;
};

struct CorpusScores {
  std::vector<SentimentResult> results;  // ordered by record_id
  std::vector<ScoringFailure> failures;  // ordered by record_id
};

struct ScoreCorpusOptions {
  int parallelism = 1;
  int64_t chunk_budget = kDefaultMaxTokens;
};

// Per-record failures are collected; the call itself fails only when a
// worker backend cannot be created. Output does not depend on parallelism.
absl::StatusOr<CorpusScores> ScoreCorpus(std::span<const AbstractRecord> records,
                                         const ScoringBackend& backend,
                                         const ScoreCorpusOptions& options = {});

}  // namespace sentiscope

#endif  // SENTISCOPE_SCORING_H_
