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


// Acceptance suite: one PASS/FAIL/SKIP line per criterion. Exits nonzero
// when any of criteria 1-10 fails. Criterion 11 needs the real transformer
// model and reports SKIP when it cannot be loaded.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <fmt/core.h>
#include <nlohmann/json.hpp>

#include "commands.h"
#include "oracles.h"
#include "sentiscope/analytics.h"
#include "sentiscope/backends.h"
#include "sentiscope/corpus_io.h"
#include "sentiscope/csv.h"
#include "sentiscope/explain.h"
#include "sentiscope/llm_validate.h"
#include "sentiscope/scoring.h"
#include "sentiscope/text.h"
#include "test_support.h"

namespace sentiscope {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using testing::DataPath;
using testing::ReadText;
using testing::RunProcess;
using testing::TempDir;
using testing::WriteText;

constexpr double kAggregationTolerance = 1e-12;
constexpr double kShapleyTolerance = 1e-9;
constexpr double kCorpusMeanTolerance = 1e-9;
constexpr char kTransformerModel[] = "nlptown/bert-base-multilingual-uncased-sentiment";

enum class Verdict { kPass, kFail, kSkip };

struct Outcome {
  Verdict verdict = Verdict::kPass;
  std::string detail;
};

Outcome Pass(std::string detail) { return {Verdict::kPass, std::move(detail)}; }
Outcome Fail(std::string detail) { return {Verdict::kFail, std::move(detail)}; }
Outcome Skip(std::string detail) { return {Verdict::kSkip, std::move(detail)}; }

struct Criterion {
  int number;
  std::string name;
  std::optional<double> time_limit_s;
  std::function<Outcome()> run;
};

// Scratch directory with a CLI config on the lexicon backend and corpus_25.
class Workspace {
 public:
  explicit Workspace(const std::string& extra_config = "") { Configure(extra_config); }

  void Configure(const std::string& extra_config) {
    WriteText(dir_ / "config.yaml",
              "input_csv: " + DataPath("corpus_25.csv").string() + "\n" +
                  "backend: lexicon:" + DataPath("lexicon.tsv").string() + "\n" +
                  "output_dir: out\n" + extra_config);
  }

  testing::ProcessResult Run(std::vector<std::string> args,
                             const std::vector<std::string>& env = {}) const {
    args.insert(args.begin(),
                {SENTISCOPE_CLI_PATH, "--config", (dir_ / "config.yaml").string()});
    return RunProcess(args, env);
  }

  // Empty string on success, else a description of the failure.
  std::string RunOk(const std::vector<std::string>& args,
                    const std::vector<std::string>& env = {}, json* summary = nullptr) const {
    const auto result = Run(args, env);
    if (result.exit_code != 0) {
      return fmt::format("'{}' exited {}: {}", args.front(), result.exit_code, result.err);
    }
    if (summary != nullptr) *summary = json::parse(result.out);
    return "";
  }

  fs::path Out(const std::string& name) const { return dir_ / "out" / name; }
  fs::path operator/(const std::string& name) const { return dir_ / name; }

 private:
  TempDir dir_;
};

std::string JoinWords(const std::vector<std::string>& words) {
  std::string text;
  for (const auto& w : words) {
    if (!text.empty()) text += ' ';
    text += w;
  }
  return text;
}

// Lexicon words with case and punctuation variants, plus neutral fillers.
const std::vector<std::string> kVocabulary = {
    "robust", "Novel,", "limited", "poor.", "weak", "effective", "the", "of",
    "method", "results", "PROMISING", "fails", "data", "(significant)", "study"};

Outcome CheckAggregation() {
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<int> n_chunks(1, 6);
  std::uniform_int_distribution<int64_t> tokens(1, 510);
  std::uniform_real_distribution<double> mass(0.0, 1.0);
  double worst = 0.0;
  for (int fixture = 0; fixture < 50; ++fixture) {
    std::vector<ChunkScore> chunks;
    const int n = n_chunks(rng);
    for (int c = 0; c < n; ++c) {
      std::array<double, kNumStars> p{};
      double total = 0;
      for (double& v : p) total += (v = mass(rng));
      for (double& v : p) v /= total;
      auto distribution = LabelDistribution::Create(p);
      if (!distribution.ok()) return Fail(distribution.status().ToString());
      chunks.push_back({c, tokens(rng), *distribution});
    }
    auto aggregated = AggregateChunks(chunks);
    if (!aggregated.ok()) return Fail(aggregated.status().ToString());
    const auto expected = testing::WeightedMeanOracle(chunks);
    for (int s = 0; s < kNumStars; ++s) {
      worst = std::max(worst, std::abs(aggregated->probabilities()[s] - expected[s]));
    }
  }
  const std::string detail = fmt::format("50 fixtures, max |diff| {:.3g}", worst);
  return worst <= kAggregationTolerance ? Pass(detail) : Fail(detail);
}

Outcome CheckScoreBoundaries() {
  const double low = LabelDistribution::OneHot(1).NormalizedScore();
  const double high = LabelDistribution::OneHot(5).NormalizedScore();
  const double mid = LabelDistribution::Uniform().NormalizedScore();
  const std::string detail = fmt::format("star1 {} star5 {} uniform {}", low, high, mid);
  return low == 0.0 && high == 1.0 && mid == 0.5 ? Pass(detail) : Fail(detail);
}

Outcome CheckChunking() {
  const auto backend = testing::TestLexiconBackend();
  const auto& vocab = kVocabulary;
  const std::vector<std::string> gaps = {" ", "  ", "\t", "\n", " \n "};
  std::mt19937_64 rng(103);
  std::uniform_int_distribution<int> n_words(1, 2000);
  const auto word_tokens = [&](const std::string& w) { return backend->CountTokens(w); };
  const int64_t budget = EffectiveChunkBudget(*backend, 512);
  int64_t total_chunks = 0;
  for (int fixture = 0; fixture < 100; ++fixture) {
    const int n = fixture == 0 ? 1 : fixture == 1 ? 2000 : n_words(rng);
    std::vector<std::string> words;
    std::string text;
    for (int i = 0; i < n; ++i) {
      words.push_back(vocab[rng() % vocab.size()]);
      if (i > 0) text += gaps[rng() % gaps.size()];
      text += words.back();
    }
    auto chunking = ChunkText(text, *backend, 512);
    if (!chunking.ok()) return Fail(chunking.status().ToString());
    std::vector<std::string> rebuilt;
    for (size_t c = 0; c < chunking->chunks.size(); ++c) {
      if (chunking->token_counts[c] > 510 ||
          backend->CountTokens(chunking->chunks[c]) != chunking->token_counts[c]) {
        return Fail(fmt::format("fixture {} chunk {} has {} tokens", fixture, c,
                                chunking->token_counts[c]));
      }
      for (auto& w : SplitWords(chunking->chunks[c])) rebuilt.push_back(std::string(w));
    }
    if (rebuilt != words) return Fail(fmt::format("fixture {} does not reconstruct", fixture));
    const auto oracle = testing::GreedyChunkOracle(words, budget, word_tokens);
    std::vector<std::string> oracle_chunks;
    for (const auto& chunk : oracle) oracle_chunks.push_back(JoinWords(chunk));
    if (oracle_chunks != chunking->chunks) {
      return Fail(fmt::format("fixture {} boundaries differ from greedy fill", fixture));
    }
    total_chunks += static_cast<int64_t>(chunking->chunks.size());
  }
  return Pass(fmt::format("100 texts, {} chunks, budget {}", total_chunks, budget));
}

Outcome CheckExactShapley() {
  const auto backend = testing::TestLexiconBackend();
  const auto& vocab = kVocabulary;
  std::mt19937_64 rng(107);
  double worst_value = 0.0;
  double worst_gap = 0.0;
  for (int fixture = 0; fixture < 20; ++fixture) {
    const int n = 1 + fixture % 10;
    std::vector<std::string> words;
    for (int i = 0; i < n; ++i) words.push_back(vocab[rng() % vocab.size()]);
    const std::string text = JoinWords(words);
    for (const auto quantity :
         {ExplainedQuantity::kNormalizedScore, ExplainedQuantity::kProbabilityOfLabel}) {
      auto report = AttributeExact(text, *backend, {.quantity = quantity});
      if (!report.ok()) return Fail(report.status().ToString());
      const auto expected = testing::BruteForceShapley(text, *backend, quantity, 512);
      if (report->attributions.size() != expected.size()) {
        return Fail(fmt::format("fixture {} has {} attributions, expected {}", fixture,
                                report->attributions.size(), expected.size()));
      }
      double sum = report->base_value;
      for (size_t i = 0; i < expected.size(); ++i) {
        if (report->attributions[i].token != words[i]) {
          return Fail(fmt::format("fixture {} token {} out of order", fixture, i));
        }
        worst_value = std::max(worst_value, std::abs(report->attributions[i].value - expected[i]));
        sum += report->attributions[i].value;
      }
      worst_gap = std::max(worst_gap, std::abs(sum - report->model_output));
    }
  }
  const std::string detail = fmt::format(
      "20 fixtures x 2 quantities, max |value diff| {:.3g}, max |efficiency gap| {:.3g}",
      worst_value, worst_gap);
  return worst_value <= kShapleyTolerance && worst_gap <= kShapleyTolerance ? Pass(detail)
                                                                            : Fail(detail);
}

Outcome CheckSampledConvergence() {
  const auto backend = testing::TestLexiconBackend();
  const std::string text = "robust results but limited novel method remains weak";
  auto exact = AttributeExact(text, *backend);
  if (!exact.ok()) return Fail(exact.status().ToString());
  std::vector<double> errors;
  for (const int64_t samples : {10, 100, 1000, 10000}) {
    auto sampled = AttributeSampled(text, *backend, {}, {.samples = samples, .seed = 7});
    if (!sampled.ok()) return Fail(sampled.status().ToString());
    double error = 0;
    for (size_t i = 0; i < exact->attributions.size(); ++i) {
      error += std::abs(sampled->attributions[i].value - exact->attributions[i].value);
    }
    errors.push_back(error / static_cast<double>(exact->attributions.size()));
  }
  const bool monotone = std::is_sorted(errors.rbegin(), errors.rend());
  const std::string detail = fmt::format("MAE at 10/100/1000/10000 samples: {:.4g} {:.4g} {:.4g} {:.4g}",
                                         errors[0], errors[1], errors[2], errors[3]);
  return monotone ? Pass(detail) : Fail(detail);
}

Outcome CheckAnalytics() {
  const std::vector<std::string> journals = {"Alpha", "Beta", "Gamma", "Delta",
                                             "Epsilon", "Zeta", "Eta", "Theta"};
  std::mt19937_64 rng(109);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<AbstractRecord> records;
  std::vector<SentimentResult> results;
  for (int i = 0; i < 200; ++i) {
    // Every tenth score sits on a bin edge.
    const double score = i % 10 == 0 ? static_cast<double>(i % 21) / 20 : unit(rng);
    records.push_back({i, journals[rng() % journals.size()], "t",
                       2000 + static_cast<int>(rng() % 12), "text"});
    SentimentResult result;
    result.record_id = i;
    result.normalized_score = score;
    results.push_back(result);
  }
  const auto scored = JoinScores(records, results);
  if (scored.size() != 200) return Fail(fmt::format("joined {} of 200", scored.size()));

  std::vector<double> scores;
  for (const auto& s : scored) scores.push_back(s.score);
  const Histogram histogram = BuildHistogram(scores, 20);
  std::vector<int64_t> expected_counts(20, 0);
  for (double s : scores) {
    int bin = 19;
    for (int i = 0; i < 20; ++i) {
      if (static_cast<double>(i) / 20 <= s && s < static_cast<double>(i + 1) / 20) bin = i;
    }
    ++expected_counts[bin];
  }
  if (histogram.counts != expected_counts) return Fail("histogram counts differ from edge scan");
  if (histogram.total() != 200) return Fail("histogram counts do not sum to 200");

  std::map<int, std::vector<double>> by_year;
  std::map<std::string, std::vector<double>> by_journal;
  for (const auto& s : scored) {
    by_year[s.year].push_back(s.score);
    by_journal[s.journal].push_back(s.score);
  }
  auto trend = ComputeYearlyTrend(scored, 2000, 2011);
  if (!trend.ok()) return Fail(trend.status().ToString());
  for (const auto& entry : trend->entries) {
    const auto& group = by_year[entry.year];
    if (entry.count != static_cast<int64_t>(group.size()) || !entry.mean_score ||
        *entry.mean_score != testing::ExactMeanOracle(group)) {
      return Fail(fmt::format("year {} differs from grouped scan", entry.year));
    }
  }

  std::vector<std::pair<int64_t, std::string>> ranking;
  for (const auto& [journal, group] : by_journal) {
    ranking.emplace_back(-static_cast<int64_t>(group.size()), journal);
  }
  std::sort(ranking.begin(), ranking.end());
  const JournalStats stats = ComputeJournalStats(scored, 0);
  if (stats.entries.size() != ranking.size()) return Fail("journal count differs");
  double weighted = 0;
  for (size_t i = 0; i < ranking.size(); ++i) {
    const auto& entry = stats.entries[i];
    const auto& group = by_journal[ranking[i].second];
    if (entry.journal != ranking[i].second || entry.count != -ranking[i].first ||
        entry.mean_score != testing::ExactMeanOracle(group)) {
      return Fail(fmt::format("journal rank {} differs from grouped scan", i));
    }
    weighted += static_cast<double>(entry.count) * entry.mean_score;
  }
  const double gap = std::abs(CorpusMean(scored) - weighted / 200);
  const std::string detail = fmt::format(
      "{} years, {} journals, corpus mean gap {:.3g}", trend->entries.size(),
      stats.entries.size(), gap);
  return gap <= kCorpusMeanTolerance ? Pass(detail) : Fail(detail);
}

Outcome CheckDedupe() {
  auto corpus = LoadCorpus(DataPath("duplicates.csv"));
  if (!corpus.ok()) return Fail(corpus.status().ToString());
  auto table = ParseCsv(ReadText(DataPath("duplicates.csv")));
  if (!table.ok()) return Fail(table.status().ToString());
  std::vector<int64_t> expected_kept;
  std::set<std::string> groups;
  for (size_t i = 1; i < table->size(); ++i) {
    if (groups.insert((*table)[i][4]).second) expected_kept.push_back(static_cast<int64_t>(i - 1));
  }
  const DedupeResult once = Dedupe(corpus->records);
  std::vector<int64_t> kept;
  for (const auto& r : once.kept) kept.push_back(r.record_id);
  if (kept != expected_kept) return Fail("kept records differ from first member of each group");
  const DedupeResult twice = Dedupe(once.kept);
  if (twice.kept != once.kept || !twice.dropped.empty()) return Fail("dedupe is not idempotent");
  return Pass(fmt::format("{} records, {} groups, {} dropped", corpus->records.size(),
                          groups.size(), once.dropped.size()));
}

Outcome CheckDeterminism() {
  Workspace ws;
  for (const auto& args : std::vector<std::vector<std::string>>{{"ingest"},
                                                                {"--jobs", "1", "score"}}) {
    if (auto error = ws.RunOk(args); !error.empty()) return Fail(error);
  }
  const std::string serial = ReadText(ws.Out(cli::kScoredCsv));
  if (auto error = ws.RunOk({"--jobs", "4", "score"}); !error.empty()) return Fail(error);
  if (ReadText(ws.Out(cli::kScoredCsv)) != serial) return Fail("scored.csv differs across --jobs");

  const std::vector<std::string> explain = {"--seed", "7", "explain", "--record-id", "1",
                                            "--samples", "500"};
  if (auto error = ws.RunOk(explain); !error.empty()) return Fail(error);
  const std::string first = ReadText(ws.Out("explain/record_1.json"));
  if (auto error = ws.RunOk(explain); !error.empty()) return Fail(error);
  if (ReadText(ws.Out("explain/record_1.json")) != first) {
    return Fail("explain JSON differs between runs");
  }
  return Pass("scored.csv identical at --jobs 1/4; explain JSON identical");
}

Outcome CheckLlmParsing() {
  int correct = 0;
  const auto cases = testing::ReadJsonLines(DataPath("rating_responses.jsonl"));
  for (const auto& c : cases) {
    auto stars = ParseStarRating(c["response"].get<std::string>());
    correct += stars.ok() && *stars == c["stars"].get<int>();
  }
  if (cases.size() != 12 || correct != 12) {
    return Fail(fmt::format("parsed {}/{} responses", correct, cases.size()));
  }

  testing::FakeChatServer server(
      [](const std::string&) { return std::make_pair(200, std::string("Rating: 4")); });
  Workspace ws("llm:\n  endpoint: " + server.base_url() +
               "\n  cache_path: cache.jsonl\n  token_env: SENTISCOPE_ACCEPTANCE_TOKEN\n");
  const std::vector<std::string> env = {"SENTISCOPE_ACCEPTANCE_TOKEN=acceptance"};
  for (const auto& args : std::vector<std::vector<std::string>>{{"ingest"}, {"score"}}) {
    if (auto error = ws.RunOk(args); !error.empty()) return Fail(error);
  }
  if (auto error = ws.RunOk({"validate"}, env); !error.empty()) return Fail(error);
  const int64_t cold_calls = server.requests();
  const std::string cold = ReadText(ws.Out("validation/agreement.json"));
  json warm_summary;
  if (auto error = ws.RunOk({"validate"}, env, &warm_summary); !error.empty()) return Fail(error);
  const int64_t warm_calls = server.requests() - cold_calls;
  if (warm_calls != 0 || warm_summary["network_calls"] != 0) {
    return Fail(fmt::format("warm validate made {} network calls", warm_calls));
  }
  if (ReadText(ws.Out("validation/agreement.json")) != cold) {
    return Fail("warm agreement.json differs");
  }
  return Pass(fmt::format("12/12 parsed; cold run {} calls, warm run 0 calls, JSON identical",
                          cold_calls));
}

Outcome CheckEndToEnd() {
  Workspace ws("llm:\n  mode: fixture\n  fixture_path: fixture.jsonl\n  sample_size: 10\n");
  std::vector<std::string> stages;
  for (const auto& args : std::vector<std::vector<std::string>>{
           {"ingest"}, {"score"}, {"analyze"}, {"explain", "--record-id", "0"}}) {
    if (auto error = ws.RunOk(args); !error.empty()) return Fail(error);
    stages.push_back(args.front());
  }
  // Fixture responses rate every sampled abstract by its model label.
  auto rows = ParseCsv(ReadText(ws.Out(cli::kScoredCsv)));
  if (!rows.ok()) return Fail(rows.status().ToString());
  const auto tmpl = PromptTemplate::Default(PromptName::kSentiment1To5);
  std::string lines;
  for (size_t i = 1; i < rows->size(); ++i) {
    auto prompt = BuildPrompt(tmpl, (*rows)[i][3]);
    if (!prompt.ok()) return Fail(prompt.status().ToString());
    lines += json({{"model", "gpt-3.5-turbo"},
                   {"prompt", *prompt},
                   {"response", "Sentiment: " + (*rows)[i][5] + "/5"}})
                 .dump() +
             "\n";
  }
  WriteText(ws / "fixture.jsonl", lines);
  json summary;
  if (auto error = ws.RunOk({"validate"}, {}, &summary); !error.empty()) return Fail(error);
  stages.push_back("validate");
  return Pass(fmt::format("{} stages exited 0; validate n={} exact_match_rate={}",
                          stages.size(), summary["n"].dump(),
                          summary["exact_match_rate"].dump()));
}

Outcome CheckTransformer() {
  auto backend = CreateBackend(std::string("transformer:") + kTransformerModel);
  if (!backend.ok()) {
    return Skip("transformer model unavailable: " + std::string(backend.status().message()));
  }
  auto corpus = LoadCorpus(DataPath("corpus_25.csv"));
  if (!corpus.ok()) return Fail(corpus.status().ToString());
  for (const auto& record : corpus->records) {
    auto result = ScoreRecord(record, **backend);
    if (!result.ok()) return Fail(result.status().ToString());
    if (result->label != 2) continue;
    auto aggregated = AggregateChunks(result->chunk_scores);
    if (!aggregated.ok()) return Fail(aggregated.status().ToString());
    const int argmax = aggregated->ArgmaxStar();
    if (!(result->confidence > 0 && result->confidence < 1) ||
        !(result->normalized_score > 0 && result->normalized_score < 1) || argmax != 2) {
      return Fail(fmt::format("record {}: confidence {} score {} argmax {}", record.record_id,
                              result->confidence, result->normalized_score, argmax));
    }
    std::string long_text = record.abstract;
    while ((*backend)->CountTokens(long_text) < 1500) long_text += " " + record.abstract;
    auto long_result = ScoreText(record.record_id, long_text, **backend);
    if (!long_result.ok()) return Fail(long_result.status().ToString());
    if (long_result->label != 2) {
      return Fail(fmt::format("record {}: duplicated text labelled {}", record.record_id,
                              long_result->label));
    }
    return Pass(fmt::format("record {}: confidence {:.3f} score {:.3f}; {} chunks keep label 2",
                            record.record_id, result->confidence, result->normalized_score,
                            long_result->chunk_scores.size()));
  }
  return Skip("no corpus abstract is labelled 2 by the model");
}

int RunAll() {
  const std::vector<Criterion> criteria = {
      {1, "chunk aggregation oracle", 1.0, CheckAggregation},
      {2, "score mapping boundaries", std::nullopt, CheckScoreBoundaries},
      {3, "chunking", 2.0, CheckChunking},
      {4, "exact Shapley", 10.0, CheckExactShapley},
      {5, "sampled Shapley convergence", 30.0, CheckSampledConvergence},
      {6, "analytics oracles", 1.0, CheckAnalytics},
      {7, "dedupe", std::nullopt, CheckDedupe},
      {8, "determinism", std::nullopt, CheckDeterminism},
      {9, "LLM parsing and cache", std::nullopt, CheckLlmParsing},
      {10, "end-to-end", 10.0, CheckEndToEnd},
      {11, "transformer integration (optional)", std::nullopt, CheckTransformer},
  };
  int failures = 0;
  for (const auto& criterion : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome = criterion.run();
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (outcome.verdict == Verdict::kPass && criterion.time_limit_s &&
        seconds >= *criterion.time_limit_s) {
      outcome = Fail(fmt::format("{}; exceeded {} s limit", outcome.detail,
                                 *criterion.time_limit_s));
    }
    const char* verdict = outcome.verdict == Verdict::kPass   ? "PASS"
                          : outcome.verdict == Verdict::kFail ? "FAIL"
                                                              : "SKIP";
    fmt::print("criterion {} [{}]: {} ({:.3f} s) {}\n", criterion.number, criterion.name, verdict,
               seconds, outcome.detail);
    std::fflush(stdout);
    if (outcome.verdict == Verdict::kFail && criterion.number <= 10) ++failures;
  }
  fmt::print("{} of 10 required criteria failed\n", failures);
  return failures == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}

}  // namespace
}  // namespace sentiscope

int main() { return sentiscope::RunAll(); }
