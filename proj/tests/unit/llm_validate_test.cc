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


#include "sentiscope/llm_validate.h"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "test_support.h"

namespace sentiscope {
namespace {

struct Corpus {
  std::vector<AbstractRecord> records;
  std::vector<SentimentResult> results;
};

Corpus MakeCorpus(const std::vector<int>& labels) {
  Corpus corpus;
  for (size_t i = 0; i < labels.size(); ++i) {
    const auto id = static_cast<int64_t>(i);
    corpus.records.push_back({id, "J", "T", 2000, "Abstract number " + std::to_string(i) + "."});
    SentimentResult result;
    result.record_id = id;
    result.label = labels[i];
    corpus.results.push_back(result);
  }
  return corpus;
}

int64_t RecordIdInPrompt(std::string_view prompt) {
  const size_t at = prompt.find("Abstract number ");
  return std::strtoll(std::string(prompt.substr(at + 16)).c_str(), nullptr, 10);
}

// Replies "Rating: <stars[id]>" for the record named in the prompt.
std::shared_ptr<FixtureTransport> RatingTransport(std::map<int64_t, std::string> replies) {
  return std::make_shared<FixtureTransport>(
      [replies = std::move(replies)](std::string_view,
                                     std::string_view prompt) -> absl::StatusOr<std::string> {
        auto it = replies.find(RecordIdInPrompt(prompt));
        if (it == replies.end()) return absl::NotFoundError("fixture miss");
        return it->second;
      });
}

std::map<int64_t, std::string> Ratings(const std::vector<int>& stars) {
  std::map<int64_t, std::string> replies;
  for (size_t i = 0; i < stars.size(); ++i) {
    replies[static_cast<int64_t>(i)] = "Rating: " + std::to_string(stars[i]);
  }
  return replies;
}

CrossValidateOptions Options(int64_t sample_size, uint64_t seed = 0, int parallelism = 1) {
  CrossValidateOptions options;
  options.sample_size = sample_size;
  options.seed = seed;
  options.parallelism = parallelism;
  return options;
}

TEST(PromptTemplate, RequiresSinglePlaceholder) {
  EXPECT_TRUE(PromptTemplate::Create(PromptName::kSentiment1To5, "Rate: {abstract}").ok());
  EXPECT_FALSE(PromptTemplate::Create(PromptName::kSentiment1To5, "Rate this").ok());
  EXPECT_FALSE(
      PromptTemplate::Create(PromptName::kSentiment1To5, "{abstract} and {abstract}").ok());
  for (auto name : {PromptName::kSentiment1To5, PromptName::kSubjectivityPhrases}) {
    const auto& text = PromptTemplate::Default(name).text();
    EXPECT_EQ(text.find(kAbstractPlaceholder), text.rfind(kAbstractPlaceholder));
    EXPECT_NE(text.find(kAbstractPlaceholder), std::string::npos);
    EXPECT_EQ(*ParsePromptName(PromptNameString(name)), name);
  }
  EXPECT_FALSE(ParsePromptName("haiku").ok());
}

TEST(BuildPrompt, DefaultsHoldAbstractOnce) {
  const std::string abstract = "We study {x} and find \"strong\" gains.";
  for (auto name : {PromptName::kSentiment1To5, PromptName::kSubjectivityPhrases}) {
    auto prompt = BuildPrompt(PromptTemplate::Default(name), abstract);
    ASSERT_TRUE(prompt.ok());
    const size_t first = prompt->find(abstract);
    ASSERT_NE(first, std::string::npos);
    EXPECT_EQ(prompt->find(abstract, first + 1), std::string::npos);
  }
}

TEST(BuildPrompt, SubstitutesVerbatim) {
  auto tmpl = PromptTemplate::Create(PromptName::kSentiment1To5, "<{abstract}>");
  ASSERT_TRUE(tmpl.ok());
  EXPECT_EQ(*BuildPrompt(*tmpl, "uses {abstract} literally"), "<uses {abstract} literally>");
  EXPECT_FALSE(BuildPrompt(*tmpl, "").ok());
}

TEST(ComputeAgreement, HandTalliedMatrix) {
  // (model label, llm stars)
  const std::vector<std::pair<int, int>> pairs = {{5, 5}, {5, 4}, {4, 4}, {3, 3}, {3, 5},
                                                  {2, 1}, {1, 1}, {1, 3}, {4, 4}, {2, 2}};
  const AgreementStats stats = ComputeAgreement(pairs);
  EXPECT_EQ(stats.n, 10);
  EXPECT_DOUBLE_EQ(stats.exact_match_rate, 0.6);
  EXPECT_DOUBLE_EQ(stats.mean_absolute_star_error, 0.6);
  const std::array<std::array<int64_t, 5>, 5> expected = {{
      {1, 0, 1, 0, 0},
      {1, 1, 0, 0, 0},
      {0, 0, 1, 0, 1},
      {0, 0, 0, 2, 0},
      {0, 0, 0, 1, 1},
  }};
  EXPECT_EQ(stats.confusion, expected);
  EXPECT_EQ(stats.Trace(), 6);
}

TEST(ComputeAgreementProperty, TraceMatchesRate) {
  std::mt19937 rng(43);
  std::uniform_int_distribution<int> star(1, 5);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<std::pair<int, int>> pairs(1 + rng() % 50);
    int64_t matches = 0;
    int64_t abs_error = 0;
    for (auto& [label, stars] : pairs) {
      label = star(rng);
      stars = star(rng);
      matches += label == stars;
      abs_error += std::abs(label - stars);
    }
    const AgreementStats stats = ComputeAgreement(pairs);
    const auto n = static_cast<double>(pairs.size());
    EXPECT_EQ(stats.n, static_cast<int64_t>(pairs.size()));
    EXPECT_EQ(stats.Trace(), matches);
    EXPECT_DOUBLE_EQ(stats.exact_match_rate, static_cast<double>(stats.Trace()) / n);
    EXPECT_DOUBLE_EQ(stats.mean_absolute_star_error, static_cast<double>(abs_error) / n);
    int64_t total = 0;
    for (const auto& row : stats.confusion) {
      for (int64_t cell : row) total += cell;
    }
    EXPECT_EQ(total, stats.n);
    EXPECT_GE(stats.exact_match_rate, 0.0);
    EXPECT_LE(stats.exact_match_rate, 1.0);
    EXPECT_LE(stats.mean_absolute_star_error, 4.0);
  }
  EXPECT_EQ(ComputeAgreement({}).n, 0);
}

TEST(SampleRecordIds, DistinctSortedAndNested) {
  std::vector<int64_t> ids(40);
  for (size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<int64_t>(i * 3);
  std::vector<int64_t> previous;
  for (int64_t size = 1; size <= 40; ++size) {
    auto sample = SampleRecordIds(ids, size, 8);
    ASSERT_TRUE(sample.ok());
    ASSERT_EQ(sample->size(), static_cast<size_t>(size));
    EXPECT_TRUE(std::is_sorted(sample->begin(), sample->end()));
    EXPECT_EQ(std::set<int64_t>(sample->begin(), sample->end()).size(), sample->size());
    for (int64_t id : *sample) EXPECT_EQ(id % 3, 0);
    EXPECT_TRUE(std::includes(sample->begin(), sample->end(), previous.begin(), previous.end()));
    previous = *sample;
  }
  std::vector<int64_t> shuffled = ids;
  std::reverse(shuffled.begin(), shuffled.end());
  EXPECT_EQ(*SampleRecordIds(shuffled, 7, 8), *SampleRecordIds(ids, 7, 8));
  EXPECT_NE(*SampleRecordIds(ids, 7, 8), *SampleRecordIds(ids, 7, 9));
  EXPECT_FALSE(SampleRecordIds(ids, 41, 8).ok());
  EXPECT_FALSE(SampleRecordIds(ids, 0, 8).ok());
}

TEST(CrossValidate, EchoingModelAgreesPerfectly) {
  const std::vector<int> labels = {1, 2, 3, 4, 5, 5, 4, 3, 2, 1, 3, 3};
  const Corpus corpus = MakeCorpus(labels);
  LlmClient client("m", RatingTransport(Ratings(labels)), nullptr, false);
  auto validation = CrossValidate(corpus.records, corpus.results, client, Options(12));
  ASSERT_TRUE(validation.ok()) << validation.status();
  EXPECT_EQ(validation->stats.n, 12);
  EXPECT_DOUBLE_EQ(validation->stats.exact_match_rate, 1.0);
  EXPECT_DOUBLE_EQ(validation->stats.mean_absolute_star_error, 0.0);
}

TEST(CrossValidate, OppositeModelIsMaximallyWrong) {
  const Corpus corpus = MakeCorpus(std::vector<int>(10, 1));
  LlmClient client("m", RatingTransport(Ratings(std::vector<int>(10, 5))), nullptr, false);
  auto validation = CrossValidate(corpus.records, corpus.results, client, Options(10));
  ASSERT_TRUE(validation.ok());
  EXPECT_DOUBLE_EQ(validation->stats.exact_match_rate, 0.0);
  EXPECT_DOUBLE_EQ(validation->stats.mean_absolute_star_error, 4.0);
  EXPECT_EQ(validation->stats.confusion[0][4], 10);
}

TEST(CrossValidate, HandTalliedCorpus) {
  const Corpus corpus = MakeCorpus({5, 5, 4, 3, 3, 2, 1, 1, 4, 2});
  LlmClient client("m", RatingTransport(Ratings({5, 4, 4, 3, 5, 1, 1, 3, 4, 2})), nullptr,
                   false);
  auto validation = CrossValidate(corpus.records, corpus.results, client, Options(10));
  ASSERT_TRUE(validation.ok());
  EXPECT_EQ(validation->stats.Trace(), 6);
  EXPECT_DOUBLE_EQ(validation->stats.exact_match_rate, 0.6);
  EXPECT_DOUBLE_EQ(validation->stats.mean_absolute_star_error, 0.6);
  EXPECT_EQ(validation->stats.confusion[2][4], 1);
  EXPECT_EQ(validation->stats.confusion[0][2], 1);
  ASSERT_EQ(validation->verdicts.size(), 10u);
  EXPECT_EQ(validation->verdicts[7].stars, 3);
  EXPECT_EQ(validation->verdicts[7].raw_response, "Rating: 3");
}

TEST(CrossValidate, ReportsAndExcludesFailures) {
  const Corpus corpus = MakeCorpus({3, 3, 3, 3, 3, 3});
  auto replies = Ratings({3, 3, 3, 3, 3, 3});
  replies[1] = "I cannot rate this.";
  replies.erase(4);
  LlmClient client("m", RatingTransport(replies), nullptr, false);
  auto validation = CrossValidate(corpus.records, corpus.results, client, Options(6));
  ASSERT_TRUE(validation.ok());
  EXPECT_EQ(validation->stats.n, 4);
  ASSERT_EQ(validation->parse_failures.size(), 1u);
  EXPECT_EQ(validation->parse_failures[0].record_id, 1);
  EXPECT_EQ(validation->parse_failures[0].raw_response, "I cannot rate this.");
  ASSERT_EQ(validation->query_failures.size(), 1u);
  EXPECT_EQ(validation->query_failures[0].record_id, 4);
  EXPECT_EQ(validation->stats.n + static_cast<int64_t>(validation->parse_failures.size() +
                                                       validation->query_failures.size()),
            6);
}

TEST(CrossValidate, NothingParsedIsFailedPrecondition) {
  const Corpus corpus = MakeCorpus({3, 3});
  LlmClient client("m", RatingTransport({{0, "no"}, {1, "no"}}), nullptr, false);
  EXPECT_TRUE(absl::IsFailedPrecondition(
      CrossValidate(corpus.records, corpus.results, client, Options(2)).status()));
}

TEST(CrossValidate, AuthFailureAborts) {
  const Corpus corpus = MakeCorpus({3, 3, 3});
  auto transport = std::make_shared<FixtureTransport>(
      [](std::string_view, std::string_view) -> absl::StatusOr<std::string> {
        return absl::UnauthenticatedError("bad token");
      });
  LlmClient client("m", transport, nullptr, false);
  EXPECT_TRUE(absl::IsUnauthenticated(
      CrossValidate(corpus.records, corpus.results, client, Options(3)).status()));
}

TEST(CrossValidate, SubjectivityAddsPhraseVerdicts) {
  const Corpus corpus = MakeCorpus({4, 2});
  auto transport = std::make_shared<FixtureTransport>(
      [](std::string_view, std::string_view prompt) -> absl::StatusOr<std::string> {
        if (prompt.find("subjectiv") != std::string_view::npos) {
          return "\"strikingly novel\"\n- bold claim";
        }
        return "Rating: 4";
      });
  LlmClient client("m", transport, nullptr, false);
  CrossValidateOptions options = Options(2);
  options.subjectivity = true;
  auto validation = CrossValidate(corpus.records, corpus.results, client, options);
  ASSERT_TRUE(validation.ok()) << validation.status();
  ASSERT_EQ(validation->verdicts.size(), 4u);
  EXPECT_EQ(validation->verdicts[0].prompt_name, PromptName::kSentiment1To5);
  EXPECT_EQ(validation->verdicts[1].prompt_name, PromptName::kSubjectivityPhrases);
  EXPECT_EQ(validation->verdicts[1].subjective_phrases,
            (std::vector<std::string>{"strikingly novel", "bold claim"}));
  EXPECT_EQ(validation->stats.n, 2);
}

TEST(CrossValidate, IndependentOfParallelism) {
  std::vector<int> labels;
  std::vector<int> stars;
  std::mt19937 rng(47);
  for (int i = 0; i < 60; ++i) {
    labels.push_back(1 + static_cast<int>(rng() % 5));
    stars.push_back(1 + static_cast<int>(rng() % 5));
  }
  const Corpus corpus = MakeCorpus(labels);
  const auto options = Options(25, 77);
  LlmClient serial_client("m", RatingTransport(Ratings(stars)), nullptr, false);
  auto serial = CrossValidate(corpus.records, corpus.results, serial_client, options);
  CrossValidateOptions parallel_options = options;
  parallel_options.parallelism = 6;
  LlmClient parallel_client("m", RatingTransport(Ratings(stars)), nullptr, false);
  auto parallel =
      CrossValidate(corpus.records, corpus.results, parallel_client, parallel_options);
  ASSERT_TRUE(serial.ok() && parallel.ok());
  EXPECT_EQ(AgreementJson(*serial, options, "m"), AgreementJson(*parallel, options, "m"));
  EXPECT_EQ(serial->sampled_record_ids, *SampleRecordIds(
                                            [&] {
                                              std::vector<int64_t> ids;
                                              for (const auto& r : corpus.results) {
                                                ids.push_back(r.record_id);
                                              }
                                              return ids;
                                            }(),
                                            25, 77));
}

TEST(AgreementJson, CarriesStatsAndPrompts) {
  const Corpus corpus = MakeCorpus({5, 1});
  LlmClient client("m", RatingTransport(Ratings({5, 2})), nullptr, false);
  const auto options = Options(2, 3);
  auto validation = CrossValidate(corpus.records, corpus.results, client, options);
  ASSERT_TRUE(validation.ok());
  const nlohmann::json json = AgreementJson(*validation, options, "m");
  EXPECT_EQ(json["n"], 2);
  EXPECT_EQ(json["exact_match_rate"], 0.5);
  EXPECT_EQ(json["mean_absolute_star_error"], 0.5);
  EXPECT_EQ(json["confusion"][0][1], 1);
  EXPECT_EQ(json["sample_size"], 2);
  EXPECT_EQ(json["seed"], 3);
  EXPECT_EQ(json["sampled_record_ids"], nlohmann::json::array({0, 1}));
  EXPECT_EQ(json["model"], "m");
  EXPECT_EQ(json["prompt_templates"]["sentiment_1_to_5"],
            PromptTemplate::Default(PromptName::kSentiment1To5).text());
  EXPECT_FALSE(json.dump().find("timestamp") != std::string::npos);

  const nlohmann::json verdict = VerdictToJson(validation->verdicts[1]);
  EXPECT_EQ(verdict["record_id"], 1);
  EXPECT_EQ(verdict["stars"], 2);
  EXPECT_FALSE(verdict.contains("from_cache"));
}

}  // namespace
}  // namespace sentiscope
