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

#ifndef SENTISCOPE_SENTIMENT_H_
#define SENTISCOPE_SENTIMENT_H_

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "absl/status/statusor.h"

namespace sentiscope {

inline constexpr int kNumStars = 5;

// Probability vector over the five star labels; index i holds star i + 1.
class LabelDistribution {
 public:
  // Entries must lie in [0, 1] and sum to 1 within 1e-9.
  static absl::StatusOr<LabelDistribution> Create(
      const std::array<double, kNumStars>& probabilities);
  static LabelDistribution OneHot(int star);
  static LabelDistribution Uniform();

  const std::array<double, kNumStars>& probabilities() const { return p_; }
  double probability(int star) const { return p_[star - 1]; }

  // Highest-probability star; ties go to the lower star.
  int ArgmaxStar() const;
  // Sum over stars of star * p(star).
  double ExpectedStars() const;
  // (E[stars] - 1) / 4, in [0, 1].
  double NormalizedScore() const;

  bool operator==(const LabelDistribution&) const = default;

 private:
  explicit LabelDistribution(const std::array<double, kNumStars>& p) : p_(p) {}
  std::array<double, kNumStars> p_;
};

struct ChunkScore {
  int chunk_index = 0;
  int64_t token_count = 0;
  LabelDistribution distribution = LabelDistribution::Uniform();
};

struct SentimentResult {
  int64_t record_id = 0;
  int label = 3;
  double confidence = 0.0;
  double normalized_score = 0.5;
  std::vector<ChunkScore> chunk_scores;
  // Chunking notes, e.g. a word truncated to fit the budget.
  std::vector<std::string> warnings;
};

// Fills label, confidence and normalized_score from `aggregated`.
SentimentResult MakeResult(int64_t record_id,
                           const LabelDistribution& aggregated,
                           std::vector<ChunkScore> chunk_scores);

}  // namespace sentiscope

#endif  // SENTISCOPE_SENTIMENT_H_
