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

// Word-level Shapley attributions for one text's sentiment prediction.
//
// Players are the whitespace words of the text. A coalition is scored by
// removing every word outside it and running the chunked scoring path on the
// remaining words; the empty coalition is scored as the uniform distribution
// (0.5 on the normalized score, 0.2 as a label probability).

#ifndef SENTISCOPE_EXPLAIN_H_
#define SENTISCOPE_EXPLAIN_H_

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "sentiscope/scoring.h"

namespace sentiscope {

// 2^12 = 4096 coalitions.
inline constexpr int kMaxExactWords = 12;
inline constexpr double kAdditivityTolerance = 1e-9;

enum class ExplainedQuantity { kNormalizedScore, kProbabilityOfLabel };
enum class AttributionMethod { kExactShapley, kSampledShapley };

std::string_view ExplainedQuantityName(ExplainedQuantity quantity);
absl::StatusOr<ExplainedQuantity> ParseExplainedQuantity(std::string_view name);
std::string_view AttributionMethodName(AttributionMethod method);

struct TokenAttribution {
  std::string token;
  double value = 0.0;
  // Standard error of the estimate; 0 for exact values.
  double std_error = 0.0;
};

struct AttributionReport {
  int64_t record_id = 0;
  ExplainedQuantity explained_quantity = ExplainedQuantity::kNormalizedScore;
  // Star whose probability is explained (the full text's predicted label).
  int explained_label = 0;
  double base_value = 0.0;
  double model_output = 0.0;
  std::vector<TokenAttribution> attributions;  // text order
  AttributionMethod method = AttributionMethod::kExactShapley;
  int64_t sample_count = 0;  // permutations evaluated; 0 for exact
  uint64_t seed = 0;

  // model_output - (base_value + sum of values).
  double AdditivityGap() const;
};

struct ExplainOptions {
  int64_t record_id = 0;
  ExplainedQuantity quantity = ExplainedQuantity::kNormalizedScore;
  int parallelism = 1;
  int64_t chunk_budget = kDefaultMaxTokens;
};

// Classical Shapley values by enumerating all 2^n coalitions; n <= 12.
absl::StatusOr<AttributionReport> AttributeExact(std::string_view text,
                                                 const ScoringBackend& backend,
                                                 const ExplainOptions& options = {});

struct SamplingOptions {
  int64_t samples = 1000;
  uint64_t seed = 0;
  // Walk every one of the n! orderings instead of sampling; `samples` is
  // ignored. Only sensible for short texts.
  bool enumerate_permutations = false;
};

// Permutation-sampling estimate; the permutation sequence depends only on
// the seed, so reports are identical for any parallelism.
absl::StatusOr<AttributionReport> AttributeSampled(
    std::string_view text, const ScoringBackend& backend,
    const ExplainOptions& options, const SamplingOptions& sampling);

// Self-contained HTML with one span per token: red background for positive
// values, blue for negative, opacity |value| / max |value|.
absl::StatusOr<std::string> AttributionHtml(const AttributionReport& report,
                                            std::string_view text);
absl::Status RenderAttributionHtml(const AttributionReport& report,
                                   std::string_view text,
                                   const std::filesystem::path& out_path);

nlohmann::json ReportToJson(const AttributionReport& report);
absl::StatusOr<AttributionReport> ReportFromJson(const nlohmann::json& json);

// Random draws shared by the samplers: uniform in [0, bound) by rejection on
// std::mt19937_64, so sequences match across standard libraries.
class PortableRng {
 public:
  explicit PortableRng(uint64_t seed);
  uint64_t UniformBelow(uint64_t bound);
  template <typename T>
  void Shuffle(std::vector<T>& items) {
    for (size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[UniformBelow(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace sentiscope

#endif  // SENTISCOPE_EXPLAIN_H_
