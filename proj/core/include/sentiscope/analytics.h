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

#ifndef SENTISCOPE_ANALYTICS_H_
#define SENTISCOPE_ANALYTICS_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "sentiscope/corpus_io.h"
#include "sentiscope/sentiment.h"

namespace sentiscope {

inline constexpr int kDefaultHistogramBins = 20;
inline constexpr int kDefaultTopJournals = 20;

// One scored abstract as seen by the aggregations.
struct ScoredAbstract {
  int64_t record_id = 0;
  std::string journal;
  int year = 0;
  double score = 0.0;
};

// Joins records with results by record_id; records without a result are
// skipped.
std::vector<ScoredAbstract> JoinScores(std::span<const AbstractRecord> records,
                                       std::span<const SentimentResult> results);

// Sum of `values` correctly rounded to double, independent of order.
double ExactSum(std::span<const double> values);

struct Histogram {
  std::vector<double> bin_edges;  // bins + 1 values, edges[0] = 0, back() = 1
  std::vector<int64_t> counts;

  int64_t total() const;
};

// Bin i holds edges[i] <= s < edges[i + 1]; s == 1 goes in the last bin.
// Scores outside [0, 1] are clamped.
Histogram BuildHistogram(std::span<const double> scores,
                         int bins = kDefaultHistogramBins);
Histogram BuildHistogram(std::span<const SentimentResult> results,
                         int bins = kDefaultHistogramBins);

struct YearEntry {
  int year = 0;
  std::optional<double> mean_score;  // absent iff count == 0
  int64_t count = 0;
};

struct YearlyTrend {
  std::vector<YearEntry> entries;  // every year in the range, ascending
};

absl::StatusOr<YearlyTrend> ComputeYearlyTrend(
    std::span<const ScoredAbstract> scored, int year_from, int year_to);

struct JournalEntry {
  std::string journal;
  int64_t count = 0;
  double mean_score = 0.0;
  double std_dev = 0.0;  // population
};

struct JournalStats {
  std::vector<JournalEntry> entries;  // count desc, then name asc
};

// All journals, ranked; `top_n` <= 0 keeps every journal.
JournalStats ComputeJournalStats(std::span<const ScoredAbstract> scored,
                                 int top_n = kDefaultTopJournals);

double CorpusMean(std::span<const ScoredAbstract> scored);

enum class ChartFormat { kSvg, kPng };

absl::StatusOr<ChartFormat> ParseChartFormat(std::string_view name);

// Writes histogram, trend and journal charts plus histogram.csv, trend.csv
// and journals.csv into `out_dir`. Returns the written paths, charts first.
absl::StatusOr<std::vector<std::filesystem::path>> RenderCharts(
    const Histogram& histogram, const YearlyTrend& trend,
    const JournalStats& stats, const std::filesystem::path& out_dir,
    ChartFormat format = ChartFormat::kSvg);

// CSV tables; numbers use the shortest round-trip representation.
std::string HistogramTableCsv(const Histogram& histogram);
std::string TrendTableCsv(const YearlyTrend& trend);
std::string JournalTableCsv(const JournalStats& stats);

}  // namespace sentiscope

#endif  // SENTISCOPE_ANALYTICS_H_
