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

#include "sentiscope/scoring.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <optional>
#include <thread>

#include "absl/status/status.h"
#include "sentiscope/text.h"
#include "strings.h"

namespace sentiscope {

absl::StatusOr<LabelDistribution> LabelDistribution::Create(
    const std::array<double, kNumStars>& probabilities) {
  double sum = 0.0;
  for (double p : probabilities) {
    if (!(p >= 0.0 && p <= 1.0)) {
      return absl::InvalidArgumentError(
          StrCat("probability ", p, " outside [0, 1]"));
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    return absl::InvalidArgumentError(
        StrCat("probabilities sum to ", sum, ", not 1"));
  }
  return LabelDistribution(probabilities);
}

LabelDistribution LabelDistribution::OneHot(int star) {
  std::array<double, kNumStars> p{};
  p[std::clamp(star, 1, kNumStars) - 1] = 1.0;
  return LabelDistribution(p);
}

LabelDistribution LabelDistribution::Uniform() {
  std::array<double, kNumStars> p;
  p.fill(1.0 / kNumStars);
  return LabelDistribution(p);
}

int LabelDistribution::ArgmaxStar() const {
  int best = 0;
  for (int i = 1; i < kNumStars; ++i) {
    if (p_[i] > p_[best]) best = i;
  }
  return best + 1;
}

double LabelDistribution::ExpectedStars() const {
  return 1.0 + 4.0 * NormalizedScore();
}

double LabelDistribution::NormalizedScore() const {
  // Each p * (star - 1) is exact in long double, so uniform and one-hot
  // inputs land exactly on 0.5, 0 and 1.
  long double weighted = 0.0L;
  for (int i = 0; i < kNumStars; ++i) {
    weighted += static_cast<long double>(p_[i]) * i;
  }
  const double score = static_cast<double>(weighted) / (kNumStars - 1);
  return std::clamp(score, 0.0, 1.0);
}

SentimentResult MakeResult(int64_t record_id,
                           const LabelDistribution& aggregated,
                           std::vector<ChunkScore> chunk_scores) {
  SentimentResult result;
  result.record_id = record_id;
  result.label = aggregated.ArgmaxStar();
  result.confidence = aggregated.probability(result.label);
  result.normalized_score = aggregated.NormalizedScore();
  result.chunk_scores = std::move(chunk_scores);
  return result;
}

int64_t EffectiveChunkBudget(const ScoringBackend& backend,
                             int64_t chunk_budget) {
  return std::min(backend.MaxTokens(), chunk_budget) - kReservedDelimiterTokens;
}

namespace {

// Longest prefix of `word` (in code points) whose token count fits.
std::optional<std::string> TruncateWord(const std::string& word,
                                        const ScoringBackend& backend,
                                        int64_t budget) {
  size_t lo = 0;
  size_t hi = CountCodePoints(word);
  while (lo < hi) {
    const size_t mid = lo + (hi - lo + 1) / 2;
    if (backend.CountTokens(Utf8Prefix(word, mid)) <= budget) {
      lo = mid;
    } else {
      hi = mid - 1;
    }
  }
  if (lo == 0) return std::nullopt;
  return std::string(Utf8Prefix(word, lo));
}

}  // namespace

absl::StatusOr<ChunkingResult> ChunkText(std::string_view text,
                                         const ScoringBackend& backend,
                                         int64_t chunk_budget) {
  const std::vector<std::string> words = SplitWords(text);
  if (words.empty()) {
    return absl::InvalidArgumentError("text has no words to score");
  }
  const int64_t budget = EffectiveChunkBudget(backend, chunk_budget);
  if (budget < 1) {
    return absl::InvalidArgumentError(
        StrCat("chunk budget ", chunk_budget, " leaves no room for text"));
  }
  auto fits = [&](size_t begin, size_t end) {
    return backend.CountTokens(JoinWords(words, begin, end)) <= budget;
  };

  ChunkingResult result;
  size_t begin = 0;
  while (begin < words.size()) {
    if (!fits(begin, begin + 1)) {
      auto cut = TruncateWord(words[begin], backend, budget);
      if (!cut) {
        return absl::InvalidArgumentError(StrCat(
            "word ", begin, " cannot be cut to fit ", budget, " tokens"));
      }
      result.warnings.push_back(StrCat(
          "word ", begin, " exceeds the ", budget,
          "-token budget and was truncated to ", CountCodePoints(*cut),
          " code points"));
      result.chunks.push_back(std::move(*cut));
      ++begin;
    } else {
      // Exponential then binary search for the largest fitting end.
      size_t good = begin + 1;
      size_t step = 1;
      size_t bad = words.size() + 1;
      while (good < words.size()) {
        const size_t probe = std::min(words.size(), good + step);
        if (fits(begin, probe)) {
          good = probe;
          step *= 2;
        } else {
          bad = probe;
          break;
        }
      }
      while (bad - good > 1) {
        const size_t mid = good + (bad - good) / 2;
        if (fits(begin, mid)) {
          good = mid;
        } else {
          bad = mid;
        }
      }
      result.chunks.push_back(JoinWords(words, begin, good));
      begin = good;
    }
    result.token_counts.push_back(
        std::max<int64_t>(1, backend.CountTokens(result.chunks.back())));
  }
  return result;
}

absl::StatusOr<LabelDistribution> AggregateChunks(
    std::span<const ChunkScore> chunk_scores) {
  if (chunk_scores.empty()) {
    return absl::InvalidArgumentError("no chunk scores to aggregate");
  }
  for (const auto& chunk : chunk_scores) {
    if (chunk.token_count < 1) {
      return absl::InvalidArgumentError(StrCat(
          "chunk ", chunk.chunk_index, " has token count ", chunk.token_count));
    }
  }
  if (chunk_scores.size() == 1) return chunk_scores.front().distribution;

  std::array<double, kNumStars> weighted{};
  double total_weight = 0.0;
  for (const auto& chunk : chunk_scores) {
    const auto weight = static_cast<double>(chunk.token_count);
    total_weight += weight;
    for (int i = 0; i < kNumStars; ++i) {
      weighted[i] += weight * chunk.distribution.probabilities()[i];
    }
  }
  for (double& p : weighted) p /= total_weight;
  return LabelDistribution::Create(weighted);
}

absl::StatusOr<SentimentResult> ScoreText(int64_t record_id,
                                          std::string_view text,
                                          const ScoringBackend& backend,
                                          int64_t chunk_budget) {
  auto chunking = ChunkText(text, backend, chunk_budget);
  if (!chunking.ok()) return chunking.status();

  std::vector<ChunkScore> scores;
  scores.reserve(chunking->chunks.size());
  for (size_t i = 0; i < chunking->chunks.size(); ++i) {
    auto distribution = backend.Classify(chunking->chunks[i]);
    if (!distribution.ok()) {
      return absl::Status(
          distribution.status().code(),
          StrCat("chunk ", i, ": ", distribution.status().message()));
    }
    scores.push_back(ChunkScore{static_cast<int>(i), chunking->token_counts[i],
                                *distribution});
  }
  auto aggregated = AggregateChunks(scores);
  if (!aggregated.ok()) return aggregated.status();
  SentimentResult result = MakeResult(record_id, *aggregated, std::move(scores));
  result.warnings = std::move(chunking->warnings);
  return result;
}

absl::StatusOr<SentimentResult> ScoreRecord(const AbstractRecord& record,
                                            const ScoringBackend& backend,
                                            int64_t chunk_budget) {
  return ScoreText(record.record_id, record.abstract, backend, chunk_budget);
}

absl::StatusOr<CorpusScores> ScoreCorpus(std::span<const AbstractRecord> records,
                                         const ScoringBackend& backend,
                                         const ScoreCorpusOptions& options) {
  const size_t workers = std::clamp<size_t>(
      static_cast<size_t>(std::max(1, options.parallelism)), 1,
      std::max<size_t>(1, records.size()));

  // Worker 0 always uses `backend`; others share it or get a clone.
  std::vector<std::unique_ptr<ScoringBackend>> clones;
  std::vector<const ScoringBackend*> worker_backends(workers, &backend);
  if (!backend.IsShareable()) {
    for (size_t w = 1; w < workers; ++w) {
      auto clone = backend.Clone();
      if (!clone.ok()) return clone.status();
      worker_backends[w] = clone->get();
      clones.push_back(std::move(*clone));
    }
  }

  std::vector<std::optional<absl::StatusOr<SentimentResult>>> slots(
      records.size());
  std::atomic<size_t> next{0};
  auto work = [&](size_t worker) {
    for (size_t i = next.fetch_add(1); i < records.size();
         i = next.fetch_add(1)) {
      slots[i] = ScoreRecord(records[i], *worker_backends[worker],
                             options.chunk_budget);
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::jthread> threads;
    for (size_t w = 0; w < workers; ++w) threads.emplace_back(work, w);
  }

  CorpusScores out;
  for (size_t i = 0; i < records.size(); ++i) {
    auto& slot = *slots[i];
    if (slot.ok()) {
      out.results.push_back(*std::move(slot));
    } else {
      out.failures.push_back(
          {records[i].record_id, std::string(slot.status().message())});
    }
  }
  std::stable_sort(out.results.begin(), out.results.end(),
                   [](const auto& a, const auto& b) { return a.record_id < b.record_id; });
  std::stable_sort(out.failures.begin(), out.failures.end(),
                   [](const auto& a, const auto& b) { return a.record_id < b.record_id; });
  return out;
}

}  // namespace sentiscope
