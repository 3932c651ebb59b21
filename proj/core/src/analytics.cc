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

#include "sentiscope/analytics.h"
#include "strings.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

#include "absl/status/status.h"

namespace sentiscope {

std::vector<ScoredAbstract> JoinScores(std::span<const AbstractRecord> records,
                                       std::span<const SentimentResult> results) {
  std::unordered_map<int64_t, double> score_by_id;
  for (const auto& r : results) score_by_id[r.record_id] = r.normalized_score;
  std::vector<ScoredAbstract> joined;
  joined.reserve(results.size());
  for (const auto& record : records) {
    const auto it = score_by_id.find(record.record_id);
    if (it == score_by_id.end()) continue;
    joined.push_back({record.record_id, record.journal, record.year, it->second});
  }
  return joined;
}

// Shewchuk's non-overlapping partials, as in Python's math.fsum.
double ExactSum(std::span<const double> values) {
  std::vector<double> partials;
  for (double x : values) {
    size_t used = 0;
    for (double y : partials) {
      if (std::abs(x) < std::abs(y)) std::swap(x, y);
      const double hi = x + y;
      const double lo = y - (hi - x);
      if (lo != 0.0) partials[used++] = lo;
      x = hi;
    }
    partials.resize(used);
    partials.push_back(x);
  }
  if (partials.empty()) return 0.0;
  // Add partials from the top, then fix the half-way rounding case.
  size_t n = partials.size();
  double hi = partials[--n];
  double lo = 0.0;
  while (n > 0) {
    const double x = hi;
    const double y = partials[--n];
    hi = x + y;
    const double yr = hi - x;
    lo = y - yr;
    if (lo != 0.0) break;
  }
  if (n > 0 && ((lo < 0.0 && partials[n - 1] < 0.0) ||
                (lo > 0.0 && partials[n - 1] > 0.0))) {
    const double y = lo * 2.0;
    const double x = hi + y;
    const double yr = x - hi;
    if (y == yr) hi = x;
  }
  return hi;
}

int64_t Histogram::total() const {
  int64_t total = 0;
  for (int64_t c : counts) total += c;
  return total;
}

Histogram BuildHistogram(std::span<const double> scores, int bins) {
  bins = std::max(1, bins);
  Histogram h;
  h.bin_edges.resize(bins + 1);
  for (int i = 0; i <= bins; ++i) {
    h.bin_edges[i] = static_cast<double>(i) / bins;
  }
  h.counts.assign(bins, 0);
  for (double s : scores) {
    s = std::clamp(s, 0.0, 1.0);
    int bin = std::clamp(static_cast<int>(std::floor(s * bins)), 0, bins - 1);
    // s * bins can round across an edge; the edges are authoritative.
    while (bin > 0 && s < h.bin_edges[bin]) --bin;
    while (bin < bins - 1 && s >= h.bin_edges[bin + 1]) ++bin;
    ++h.counts[bin];
  }
  return h;
}

Histogram BuildHistogram(std::span<const SentimentResult> results, int bins) {
  std::vector<double> scores;
  scores.reserve(results.size());
  for (const auto& r : results) scores.push_back(r.normalized_score);
  return BuildHistogram(scores, bins);
}

absl::StatusOr<YearlyTrend> ComputeYearlyTrend(
    std::span<const ScoredAbstract> scored, int year_from, int year_to) {
  if (year_from > year_to) {
    return absl::InvalidArgumentError(StrCat(
        "year range [", year_from, ", ", year_to, "] is empty"));
  }
  std::map<int, std::vector<double>> by_year;
  for (const auto& s : scored) {
    if (s.year >= year_from && s.year <= year_to) by_year[s.year].push_back(s.score);
  }
  YearlyTrend trend;
  for (int year = year_from; year <= year_to; ++year) {
    YearEntry entry{year, std::nullopt, 0};
    if (auto it = by_year.find(year); it != by_year.end()) {
      entry.count = static_cast<int64_t>(it->second.size());
      entry.mean_score = ExactSum(it->second) / static_cast<double>(entry.count);
    }
    trend.entries.push_back(entry);
  }
  return trend;
}

JournalStats ComputeJournalStats(std::span<const ScoredAbstract> scored,
                                 int top_n) {
  std::map<std::string, std::vector<double>> by_journal;
  for (const auto& s : scored) by_journal[s.journal].push_back(s.score);

  JournalStats stats;
  for (const auto& [journal, scores] : by_journal) {
    JournalEntry entry;
    entry.journal = journal;
    entry.count = static_cast<int64_t>(scores.size());
    entry.mean_score = ExactSum(scores) / static_cast<double>(entry.count);
    std::vector<double> squared;
    squared.reserve(scores.size());
    for (double s : scores) {
      squared.push_back((s - entry.mean_score) * (s - entry.mean_score));
    }
    entry.std_dev = std::sqrt(ExactSum(squared) / static_cast<double>(entry.count));
    stats.entries.push_back(std::move(entry));
  }
  std::stable_sort(stats.entries.begin(), stats.entries.end(),
                   [](const JournalEntry& a, const JournalEntry& b) {
                     if (a.count != b.count) return a.count > b.count;
                     return a.journal < b.journal;
                   });
  if (top_n > 0 && stats.entries.size() > static_cast<size_t>(top_n)) {
    stats.entries.resize(top_n);
  }
  return stats;
}

double CorpusMean(std::span<const ScoredAbstract> scored) {
  if (scored.empty()) return 0.0;
  std::vector<double> scores;
  scores.reserve(scored.size());
  for (const auto& s : scored) scores.push_back(s.score);
  return ExactSum(scores) / static_cast<double>(scores.size());
}

}  // namespace sentiscope
