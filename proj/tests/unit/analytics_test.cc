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

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <gtest/gtest.h>

#include "sentiscope/csv.h"
#include "test_support.h"

namespace sentiscope {
namespace {

using Wide = boost::multiprecision::number<
    boost::multiprecision::cpp_bin_float<512, boost::multiprecision::digit_base_2>>;

using testing::ReadText;
using testing::TempDir;

double WideSum(const std::vector<double>& values) {
  Wide total = 0;
  for (double v : values) total += v;
  return total.convert_to<double>();
}

double WideMean(const std::vector<double>& values) {
  Wide total = 0;
  for (double v : values) total += v;
  return Wide(total / static_cast<double>(values.size())).convert_to<double>();
}

TEST(ExactSum, HandlesCancellation) {
  EXPECT_EQ(ExactSum(std::vector<double>{}), 0.0);
  EXPECT_EQ(ExactSum(std::vector<double>{1e16, 1.0, -1e16}), 1.0);
  EXPECT_EQ(ExactSum(std::vector<double>{0.1, 0.2, 0.3}), 0.6);
  std::vector<double> tenths(10, 0.1);
  EXPECT_EQ(ExactSum(tenths), 1.0);
}

TEST(ExactSumProperty, CorrectlyRoundedAndOrderFree) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> mantissa(-1.0, 1.0);
  std::uniform_int_distribution<int> exponent(-60, 60);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<double> values(1 + rng() % 40);
    for (double& v : values) v = std::ldexp(mantissa(rng), exponent(rng));
    const double expected = WideSum(values);
    EXPECT_EQ(ExactSum(values), expected);
    std::shuffle(values.begin(), values.end(), rng);
    EXPECT_EQ(ExactSum(values), expected);
  }
}

int OracleBin(const std::vector<double>& edges, double s) {
  s = std::clamp(s, 0.0, 1.0);
  const int bins = static_cast<int>(edges.size()) - 1;
  for (int i = 0; i < bins; ++i) {
    if (edges[i] <= s && s < edges[i + 1]) return i;
  }
  return bins - 1;
}

TEST(BuildHistogram, EdgesAndBoundaries) {
  const Histogram h = BuildHistogram(std::vector<double>{0.0, 0.05, 0.5, 0.999, 1.0, -0.2, 1.7}, 20);
  ASSERT_EQ(h.bin_edges.size(), 21u);
  EXPECT_EQ(h.bin_edges.front(), 0.0);
  EXPECT_EQ(h.bin_edges.back(), 1.0);
  EXPECT_EQ(h.counts[0], 2);   // 0.0 and clamped -0.2
  EXPECT_EQ(h.counts[1], 1);   // 0.05 sits on the lower edge of bin 1
  EXPECT_EQ(h.counts[10], 1);  // 0.5
  EXPECT_EQ(h.counts[19], 3);  // 0.999, 1.0 and clamped 1.7
  EXPECT_EQ(h.total(), 7);
}

TEST(BuildHistogramProperty, MatchesEdgeScan) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> unit(-0.1, 1.1);
  for (int trial = 0; trial < 200; ++trial) {
    const int bins = 1 + static_cast<int>(rng() % 40);
    std::vector<double> scores;
    for (int i = 0; i < 50; ++i) scores.push_back(unit(rng));
    // Exact edge values exercise the boundary rule.
    for (int i = 0; i <= bins; ++i) scores.push_back(static_cast<double>(i) / bins);
    const Histogram h = BuildHistogram(scores, bins);
    std::vector<int64_t> expected(bins, 0);
    for (double s : scores) ++expected[OracleBin(h.bin_edges, s)];
    EXPECT_EQ(h.counts, expected);
    EXPECT_EQ(h.total(), static_cast<int64_t>(scores.size()));
  }
}

std::vector<ScoredAbstract> RandomScored(std::mt19937_64& rng, int n) {
  const std::vector<std::string> journals = {"Alpha", "Beta", "Gamma", "Delta", "Eps"};
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<ScoredAbstract> scored;
  for (int i = 0; i < n; ++i) {
    scored.push_back({i, journals[rng() % journals.size()],
                      2000 + static_cast<int>(rng() % 10), unit(rng)});
  }
  return scored;
}

TEST(ComputeYearlyTrendProperty, MatchesGroupedScan) {
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 100; ++trial) {
    const auto scored = RandomScored(rng, 1 + static_cast<int>(rng() % 80));
    auto trend = ComputeYearlyTrend(scored, 2002, 2012);
    ASSERT_TRUE(trend.ok());
    ASSERT_EQ(trend->entries.size(), 11u);
    for (const auto& entry : trend->entries) {
      std::vector<double> in_year;
      for (const auto& s : scored) {
        if (s.year == entry.year) in_year.push_back(s.score);
      }
      EXPECT_EQ(entry.count, static_cast<int64_t>(in_year.size()));
      if (in_year.empty()) {
        EXPECT_FALSE(entry.mean_score.has_value()) << entry.year;
      } else {
        ASSERT_TRUE(entry.mean_score.has_value());
        EXPECT_NEAR(*entry.mean_score, WideMean(in_year), 1e-15);
      }
    }
  }
}

TEST(ComputeYearlyTrend, RejectsInvertedRange) {
  EXPECT_TRUE(absl::IsInvalidArgument(ComputeYearlyTrend({}, 2010, 2009).status()));
}

TEST(ComputeJournalStatsProperty, MatchesGroupedScan) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    const auto scored = RandomScored(rng, 1 + static_cast<int>(rng() % 80));
    const JournalStats stats = ComputeJournalStats(scored, 0);
    std::map<std::string, std::vector<double>> groups;
    for (const auto& s : scored) groups[s.journal].push_back(s.score);
    ASSERT_EQ(stats.entries.size(), groups.size());
    int64_t total = 0;
    for (size_t i = 0; i < stats.entries.size(); ++i) {
      const auto& e = stats.entries[i];
      const auto& scores = groups.at(e.journal);
      const double mean = WideMean(scores);
      Wide squared = 0;
      for (double s : scores) squared += (Wide(s) - mean) * (Wide(s) - mean);
      const double std_dev =
          Wide(sqrt(squared / static_cast<double>(scores.size()))).convert_to<double>();
      EXPECT_EQ(e.count, static_cast<int64_t>(scores.size()));
      EXPECT_NEAR(e.mean_score, mean, 1e-15);
      EXPECT_NEAR(e.std_dev, std_dev, 1e-12);
      total += e.count;
      if (i > 0) {
        const auto& prev = stats.entries[i - 1];
        EXPECT_TRUE(prev.count > e.count || (prev.count == e.count && prev.journal < e.journal));
      }
    }
    EXPECT_EQ(total, static_cast<int64_t>(scored.size()));
    const JournalStats top2 = ComputeJournalStats(scored, 2);
    ASSERT_EQ(top2.entries.size(), std::min<size_t>(2, groups.size()));
    EXPECT_EQ(top2.entries[0].journal, stats.entries[0].journal);
  }
}

TEST(ComputeJournalStats, HandRanked) {
  const std::vector<ScoredAbstract> scored = {
      {0, "B", 2000, 0.25}, {1, "A", 2000, 0.75}, {2, "B", 2001, 0.75},
      {3, "C", 2001, 1.0},  {4, "A", 2002, 0.25}, {5, "C", 2002, 0.5}};
  const JournalStats stats = ComputeJournalStats(scored);
  ASSERT_EQ(stats.entries.size(), 3u);
  EXPECT_EQ(stats.entries[0].journal, "A");
  EXPECT_EQ(stats.entries[1].journal, "B");
  EXPECT_EQ(stats.entries[2].journal, "C");
  EXPECT_DOUBLE_EQ(stats.entries[0].mean_score, 0.5);
  EXPECT_DOUBLE_EQ(stats.entries[0].std_dev, 0.25);
  EXPECT_DOUBLE_EQ(stats.entries[2].mean_score, 0.75);
  EXPECT_DOUBLE_EQ(CorpusMean(scored), 3.5 / 6);
}

TEST(JoinScores, SkipsUnscoredRecords) {
  std::vector<AbstractRecord> records = {{0, "J", "a", 2000, "x"}, {1, "K", "b", 2001, "y"}};
  SentimentResult result;
  result.record_id = 1;
  result.normalized_score = 0.25;
  const auto joined = JoinScores(records, std::vector{result});
  ASSERT_EQ(joined.size(), 1u);
  EXPECT_EQ(joined[0].journal, "K");
  EXPECT_EQ(joined[0].year, 2001);
  EXPECT_EQ(joined[0].score, 0.25);
}

TEST(Tables, UseShortestNumbers) {
  const Histogram h = BuildHistogram(std::vector<double>{0.1, 0.6}, 2);
  EXPECT_EQ(HistogramTableCsv(h), "bin_low,bin_high,count\n0,0.5,1\n0.5,1,1\n");
  YearlyTrend trend{{{2000, 0.25, 2}, {2001, std::nullopt, 0}}};
  EXPECT_EQ(TrendTableCsv(trend), "year,count,mean_score\n2000,2,0.25\n2001,0,\n");
  JournalStats stats{{{"J, Inc", 3, 0.5, 0.1}}};
  EXPECT_EQ(JournalTableCsv(stats), "journal,count,mean_score,std_dev\n\"J, Inc\",3,0.5,0.1\n");
}

TEST(ParseChartFormat, AcceptsSvgAndPng) {
  EXPECT_EQ(*ParseChartFormat("svg"), ChartFormat::kSvg);
  EXPECT_EQ(*ParseChartFormat("png"), ChartFormat::kPng);
  EXPECT_FALSE(ParseChartFormat("gif").ok());
}

class RenderChartsTest : public ::testing::Test {
 protected:
  void SetUp() override {
    std::mt19937_64 rng(37);
    scored_ = RandomScored(rng, 60);
    std::vector<double> scores;
    for (const auto& s : scored_) scores.push_back(s.score);
    histogram_ = BuildHistogram(scores, 20);
    trend_ = *ComputeYearlyTrend(scored_, 1998, 2011);
    stats_ = ComputeJournalStats(scored_, 20);
  }

  std::vector<ScoredAbstract> scored_;
  Histogram histogram_;
  YearlyTrend trend_;
  JournalStats stats_;
};

TEST_F(RenderChartsTest, WritesSvgChartsAndTables) {
  TempDir dir;
  auto written = RenderCharts(histogram_, trend_, stats_, dir / "charts", ChartFormat::kSvg);
  ASSERT_TRUE(written.ok()) << written.status();
  std::vector<std::string> names;
  for (const auto& path : *written) names.push_back(path.filename().string());
  EXPECT_EQ(names, (std::vector<std::string>{"histogram.svg", "trend.svg", "journals.svg",
                                             "histogram.csv", "trend.csv", "journals.csv"}));
  for (int i = 0; i < 3; ++i) {
    const std::string svg = ReadText((*written)[i]);
    EXPECT_NE(svg.find("<svg"), std::string::npos);
    EXPECT_NE(svg.find("</svg>"), std::string::npos);
  }
  EXPECT_NE(ReadText(dir / "charts/journals.svg").find(stats_.entries[0].journal),
            std::string::npos);
  EXPECT_EQ(ReadText(dir / "charts/trend.csv"), TrendTableCsv(trend_));
}

TEST_F(RenderChartsTest, PngIsDeterministic) {
  TempDir a;
  TempDir b;
  ASSERT_TRUE(RenderCharts(histogram_, trend_, stats_, a.path(), ChartFormat::kPng).ok());
  ASSERT_TRUE(RenderCharts(histogram_, trend_, stats_, b.path(), ChartFormat::kPng).ok());
  for (const char* name : {"histogram.png", "trend.png", "journals.png"}) {
    const std::string png = ReadText(a / name);
    ASSERT_GT(png.size(), 8u);
    EXPECT_EQ(png.substr(0, 8), std::string("\x89PNG\r\n\x1a\n", 8));
    EXPECT_EQ(png, ReadText(b / name)) << name;
  }
}

TEST_F(RenderChartsTest, HandlesEmptyInputs) {
  TempDir dir;
  auto trend = ComputeYearlyTrend({}, 2000, 2000);
  ASSERT_TRUE(trend.ok());
  EXPECT_TRUE(RenderCharts(BuildHistogram(std::vector<double>{}, 5), *trend, JournalStats{},
                           dir.path(), ChartFormat::kSvg)
                  .ok());
  EXPECT_TRUE(RenderCharts(BuildHistogram(std::vector<double>{}, 5), *trend, JournalStats{},
                           dir.path(), ChartFormat::kPng)
                  .ok());
}

TEST(ComputeJournalStats, FifteenJournalsAllReturnedInOrder) {
  std::vector<ScoredAbstract> scored;
  std::map<std::string, int64_t> counts;
  int64_t id = 0;
  for (int j = 0; j < 15; ++j) {
    const std::string journal = "Journal " + std::string(1, static_cast<char>('O' - j));
    const int n = 1 + (j * 7) % 5;
    for (int k = 0; k < n; ++k) scored.push_back({id++, journal, 2000, 0.1 * k});
    counts[journal] = n;
  }
  std::vector<std::pair<int64_t, std::string>> expected;
  for (const auto& [journal, count] : counts) expected.push_back({-count, journal});
  std::sort(expected.begin(), expected.end());
  const JournalStats stats = ComputeJournalStats(scored, 20);
  ASSERT_EQ(stats.entries.size(), 15u);
  for (size_t i = 0; i < expected.size(); ++i) {
    EXPECT_EQ(stats.entries[i].journal, expected[i].second);
    EXPECT_EQ(stats.entries[i].count, -expected[i].first);
  }
}

TEST(ComputeYearlyTrend, TwelveRecordsOverThreeYears) {
  const std::vector<ScoredAbstract> scored = {
      {0, "J", 2010, 0.1}, {1, "J", 2010, 0.2},  {2, "J", 2011, 0.9}, {3, "J", 2012, 0.5},
      {4, "J", 2010, 0.3}, {5, "J", 2012, 0.25}, {6, "J", 2011, 0.7}, {7, "J", 2012, 0.75},
      {8, "J", 2010, 0.4}, {9, "J", 2011, 0.8},  {10, "J", 2012, 1.0}, {11, "J", 2011, 0.6}};
  auto trend = ComputeYearlyTrend(scored, 2010, 2012);
  ASSERT_TRUE(trend.ok());
  ASSERT_EQ(trend->entries.size(), 3u);
  EXPECT_EQ(trend->entries[0].count, 4);
  EXPECT_EQ(*trend->entries[0].mean_score, WideMean({0.1, 0.2, 0.3, 0.4}));
  EXPECT_EQ(*trend->entries[1].mean_score, WideMean({0.9, 0.7, 0.8, 0.6}));
  EXPECT_EQ(*trend->entries[2].mean_score, 0.625);
}

TEST(Tables, ReparseToInMemoryValues) {
  std::mt19937_64 rng(53);
  const auto scored = RandomScored(rng, 200);
  std::vector<double> scores;
  for (const auto& s : scored) scores.push_back(s.score);
  const Histogram histogram = BuildHistogram(scores, 20);
  const YearlyTrend trend = *ComputeYearlyTrend(scored, 1999, 2010);
  const JournalStats stats = ComputeJournalStats(scored, 0);

  auto rows = ParseCsv(HistogramTableCsv(histogram));
  ASSERT_TRUE(rows.ok());
  ASSERT_EQ(rows->size(), 21u);
  for (size_t i = 1; i < rows->size(); ++i) {
    EXPECT_EQ(std::stod((*rows)[i][0]), histogram.bin_edges[i - 1]);
    EXPECT_EQ(std::stod((*rows)[i][1]), histogram.bin_edges[i]);
    EXPECT_EQ(std::stoll((*rows)[i][2]), histogram.counts[i - 1]);
  }
  rows = ParseCsv(TrendTableCsv(trend));
  ASSERT_TRUE(rows.ok());
  for (size_t i = 1; i < rows->size(); ++i) {
    const auto& entry = trend.entries[i - 1];
    EXPECT_EQ(std::stoi((*rows)[i][0]), entry.year);
    EXPECT_EQ(std::stoll((*rows)[i][1]), entry.count);
    if (entry.mean_score) {
      EXPECT_EQ(std::stod((*rows)[i][2]), *entry.mean_score);
    } else {
      EXPECT_EQ((*rows)[i][2], "");
    }
  }
  rows = ParseCsv(JournalTableCsv(stats));
  ASSERT_TRUE(rows.ok());
  for (size_t i = 1; i < rows->size(); ++i) {
    const auto& entry = stats.entries[i - 1];
    EXPECT_EQ((*rows)[i][0], entry.journal);
    EXPECT_EQ(std::stod((*rows)[i][2]), entry.mean_score);
    EXPECT_EQ(std::stod((*rows)[i][3]), entry.std_dev);
  }
}

}  // namespace
}  // namespace sentiscope
