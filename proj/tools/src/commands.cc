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

#include "commands.h"

#include <algorithm>
#include <cstdlib>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "sentiscope/analytics.h"
#include "sentiscope/backends.h"
#include "sentiscope/corpus_io.h"
#include "sentiscope/explain.h"
#include "sentiscope/llm_client.h"
#include "sentiscope/llm_validate.h"
#include "sentiscope/scoring.h"
#include "sentiscope/text.h"

namespace sentiscope::cli {
namespace {

namespace fs = std::filesystem;
using Json = nlohmann::json;

int Fail(int code, const absl::Status& status) {
  spdlog::error("{}", std::string(status.message()));
  return code;
}

int Fail(int code, std::string_view message) {
  spdlog::error("{}", message);
  return code;
}

// Config-shaped problems are usage errors; everything else is a runtime one.
int ExitCodeFor(const absl::Status& status) {
  return absl::IsInvalidArgument(status) ? kExitUsage : kExitRuntime;
}

void PrintSummary(std::ostream& out, const Json& summary) {
  out << summary.dump(2) << "\n";
  out.flush();
}

absl::Status WriteJson(const fs::path& path, const Json& json) {
  return WriteFile(path, json.dump(2) + "\n");
}

absl::StatusOr<LoadedCorpus> LoadCleaned(const PipelineConfig& config) {
  const fs::path path = config.output_dir / kCleanedCsv;
  auto corpus = LoadCorpus(path, config.columns);
  if (absl::IsNotFound(corpus.status())) {
    return absl::NotFoundError(
        fmt::format("{} not found; run `sentiscope ingest` first", path.string()));
  }
  return corpus;
}

// Scored rows that carry a score, as analytics and validation inputs.
struct ScoredInputs {
  std::vector<AbstractRecord> records;
  std::vector<SentimentResult> results;
  int64_t unscored = 0;
};

absl::StatusOr<ScoredInputs> LoadScored(const PipelineConfig& config) {
  const fs::path path = config.output_dir / kScoredCsv;
  auto corpus = LoadScoredCorpus(path, config.columns);
  if (absl::IsNotFound(corpus.status())) {
    return absl::NotFoundError(
        fmt::format("{} not found; run `sentiscope score` first", path.string()));
  }
  if (!corpus.ok()) return absl::DataLossError(std::string(corpus.status().message()));
  ScoredInputs inputs;
  for (auto& row : corpus->rows) {
    if (!row.score || !row.label) {
      ++inputs.unscored;
      continue;
    }
    SentimentResult result;
    result.record_id = row.record.record_id;
    result.label = *row.label;
    result.normalized_score = *row.score;
    inputs.results.push_back(std::move(result));
    inputs.records.push_back(std::move(row.record));
  }
  return inputs;
}

}  // namespace

int RunIngest(const PipelineConfig& config, std::ostream& out) {
  if (config.input_csv.empty()) {
    return Fail(kExitUsage, "no input CSV; set input_csv in the config or pass --input");
  }
  auto corpus = LoadCorpus(config.input_csv, config.columns);
  if (!corpus.ok()) return Fail(kExitRuntime, corpus.status());

  std::vector<AbstractRecord> normalized;
  normalized.reserve(corpus->records.size());
  for (const auto& record : corpus->records) normalized.push_back(NormalizeRecord(record));
  const DedupeResult deduped = Dedupe(normalized);

  if (auto s = WriteCorpus(deduped.kept, config.output_dir / kCleanedCsv, config.columns);
      !s.ok()) {
    return Fail(kExitRuntime, s);
  }
  Json errors = Json::array();
  for (const auto& error : corpus->errors) {
    errors.push_back({{"row", error.row_number},
                      {"reason", RowErrorReasonName(error.reason)},
                      {"detail", error.detail}});
  }
  if (auto s = WriteJson(config.output_dir / kRowErrorsJson, errors); !s.ok()) {
    return Fail(kExitRuntime, s);
  }
  for (const auto& error : corpus->errors) {
    spdlog::warn("row {}: {} ({})", error.row_number, RowErrorReasonName(error.reason),
                 error.detail);
  }
  spdlog::info("ingested {} of {} rows into {}", deduped.kept.size(), corpus->data_rows,
               (config.output_dir / kCleanedCsv).string());
  PrintSummary(out, {{"rows_in", corpus->data_rows},
                     {"accepted", corpus->records.size()},
                     {"deduped", deduped.dropped.size()},
                     {"errors", corpus->errors.size()},
                     {"written", deduped.kept.size()}});
  return kExitOk;
}

int RunScore(const PipelineConfig& config, const ScoreFlags& flags, std::ostream& out) {
  auto backend = CreateBackend(config.backend);
  if (!backend.ok()) return Fail(ExitCodeFor(backend.status()), backend.status());
  auto corpus = LoadCleaned(config);
  if (!corpus.ok()) return Fail(kExitRuntime, corpus.status());

  ScoreCorpusOptions options;
  options.parallelism = config.jobs;
  options.chunk_budget = config.chunk_budget;
  auto scores = ScoreCorpus(corpus->records, **backend, options);
  if (!scores.ok()) return Fail(ExitCodeFor(scores.status()), scores.status());

  const fs::path path = config.output_dir / kScoredCsv;
  if (auto s = WriteScoredCorpus(corpus->records, scores->results, path, config.columns);
      !s.ok()) {
    return Fail(kExitRuntime, s);
  }
  int64_t warnings = 0;
  for (const auto& result : scores->results) {
    for (const auto& warning : result.warnings) {
      spdlog::warn("record {}: {}", result.record_id, warning);
      ++warnings;
    }
  }
  Json failures = Json::array();
  for (const auto& failure : scores->failures) {
    spdlog::error("record {} not scored: {}", failure.record_id, failure.reason);
    failures.push_back({{"record_id", failure.record_id}, {"reason", failure.reason}});
  }
  PrintSummary(out, {{"records", corpus->records.size()},
                     {"scored", scores->results.size()},
                     {"failed", scores->failures.size()},
                     {"warnings", warnings},
                     {"failures", std::move(failures)},
                     {"backend", (*backend)->Name()},
                     {"output", path.string()}});
  if (flags.strict && !scores->failures.empty()) {
    return Fail(kExitRuntime, "--strict: some records could not be scored");
  }
  return kExitOk;
}

int RunAnalyze(const PipelineConfig& config, std::ostream& out) {
  auto format = ParseChartFormat(config.chart_format);
  if (!format.ok()) return Fail(kExitUsage, format.status());
  auto inputs = LoadScored(config);
  if (!inputs.ok()) return Fail(kExitRuntime, inputs.status());

  const std::vector<ScoredAbstract> scored = JoinScores(inputs->records, inputs->results);
  std::vector<double> scores;
  scores.reserve(scored.size());
  for (const auto& s : scored) scores.push_back(s.score);
  const Histogram histogram = BuildHistogram(scores, config.histogram_bins);
  // Without a configured range the trend spans the scored years.
  absl::StatusOr<YearlyTrend> trend = YearlyTrend{};
  if (config.trend_range) {
    trend = ComputeYearlyTrend(scored, config.trend_range->first, config.trend_range->second);
  } else if (!scored.empty()) {
    const auto [lo, hi] = std::minmax_element(
        scored.begin(), scored.end(),
        [](const ScoredAbstract& a, const ScoredAbstract& b) { return a.year < b.year; });
    trend = ComputeYearlyTrend(scored, lo->year, hi->year);
  }
  if (!trend.ok()) return Fail(kExitUsage, trend.status());
  const JournalStats journals = ComputeJournalStats(scored, config.top_n_journals);

  auto files = RenderCharts(histogram, *trend, journals, config.output_dir / kAnalysisDir,
                            *format);
  if (!files.ok()) return Fail(kExitRuntime, files.status());
  Json paths = Json::array();
  for (const auto& file : *files) paths.push_back(file.string());
  PrintSummary(out, {{"records", scored.size()},
                     {"unscored", inputs->unscored},
                     {"corpus_mean", scored.empty() ? Json(nullptr) : Json(CorpusMean(scored))},
                     {"files", std::move(paths)}});
  return kExitOk;
}

int RunExplain(const PipelineConfig& config, const ExplainFlags& flags, std::ostream& out) {
  if (!flags.record_id) return Fail(kExitUsage, "--record-id is required");
  if (flags.exact && flags.samples) {
    return Fail(kExitUsage, "--exact and --samples are mutually exclusive");
  }
  if (flags.samples && *flags.samples < 1) return Fail(kExitUsage, "--samples must be positive");
  auto quantity = ParseExplainedQuantity(flags.quantity);
  if (!quantity.ok()) return Fail(kExitUsage, quantity.status());
  auto backend = CreateBackend(config.backend);
  if (!backend.ok()) return Fail(ExitCodeFor(backend.status()), backend.status());
  auto corpus = LoadCleaned(config);
  if (!corpus.ok()) return Fail(kExitRuntime, corpus.status());

  const AbstractRecord* record = nullptr;
  for (const auto& r : corpus->records) {
    if (r.record_id == *flags.record_id) record = &r;
  }
  if (record == nullptr) {
    return Fail(kExitUsage, fmt::format("unknown record id {}; cleaned corpus has ids 0..{}",
                                        *flags.record_id,
                                        static_cast<int64_t>(corpus->records.size()) - 1));
  }

  ExplainOptions options;
  options.record_id = record->record_id;
  options.quantity = *quantity;
  options.parallelism = config.jobs;
  options.chunk_budget = config.chunk_budget;
  const bool exact =
      flags.exact ||
      (!flags.samples && static_cast<int>(SplitWords(record->abstract).size()) <= kMaxExactWords);
  absl::StatusOr<AttributionReport> report =
      exact ? AttributeExact(record->abstract, **backend, options)
            : AttributeSampled(record->abstract, **backend, options,
                               {.samples = flags.samples.value_or(1000),
                                .seed = config.seed,
                                .enumerate_permutations = false});
  if (!report.ok()) return Fail(ExitCodeFor(report.status()), report.status());

  const fs::path dir = config.output_dir / kExplainDir;
  const std::string stem = fmt::format("record_{}", record->record_id);
  const Json json = ReportToJson(*report);
  if (auto s = WriteJson(dir / (stem + ".json"), json); !s.ok()) return Fail(kExitRuntime, s);
  if (auto s = RenderAttributionHtml(*report, record->abstract, dir / (stem + ".html"));
      !s.ok()) {
    return Fail(kExitRuntime, s);
  }
  PrintSummary(out, {{"record_id", record->record_id},
                     {"method", AttributionMethodName(report->method)},
                     {"explained_quantity", ExplainedQuantityName(report->explained_quantity)},
                     {"tokens", report->attributions.size()},
                     {"additivity_gap", report->AdditivityGap()},
                     {"json", (dir / (stem + ".json")).string()},
                     {"html", (dir / (stem + ".html")).string()}});
  return kExitOk;
}

int RunValidate(const PipelineConfig& config, const ValidateFlags& flags,
                std::ostream& out) {
  const LlmConfig& llm = config.llm;
  CrossValidateOptions options;
  options.sample_size = flags.sample_size.value_or(llm.sample_size);
  options.seed = config.seed;
  options.parallelism = config.jobs;
  options.subjectivity = flags.phrases;
  if (llm.sentiment_prompt) {
    auto prompt = PromptTemplate::Create(PromptName::kSentiment1To5, *llm.sentiment_prompt);
    if (!prompt.ok()) return Fail(kExitUsage, prompt.status());
    options.sentiment_prompt = *std::move(prompt);
  }
  if (llm.subjectivity_prompt) {
    auto prompt =
        PromptTemplate::Create(PromptName::kSubjectivityPhrases, *llm.subjectivity_prompt);
    if (!prompt.ok()) return Fail(kExitUsage, prompt.status());
    options.subjectivity_prompt = *std::move(prompt);
  }

  std::shared_ptr<LlmTransport> transport;
  std::shared_ptr<ResponseCache> cache;
  if (llm.mode == LlmMode::kLive) {
    const char* token = std::getenv(llm.token_env.c_str());
    if (token == nullptr || *token == '\0') {
      return Fail(kExitUsage, fmt::format("live LLM mode needs an API token in ${}",
                                          llm.token_env));
    }
    HttpChatTransport::Options http_options;
    http_options.base_url = llm.endpoint;
    http_options.auth_token = token;
    auto http = HttpChatTransport::Create(std::move(http_options));
    if (!http.ok()) return Fail(kExitUsage, http.status());
    transport = *std::move(http);
    auto opened = ResponseCache::Open(llm.cache_path);
    if (!opened.ok()) return Fail(kExitRuntime, opened.status());
    cache = *std::move(opened);
  } else {
    if (llm.fixture_path.empty()) {
      return Fail(kExitUsage, "fixture LLM mode needs llm.fixture_path");
    }
    auto fixture = FixtureTransport::Load(llm.fixture_path);
    if (!fixture.ok()) return Fail(ExitCodeFor(fixture.status()), fixture.status());
    transport = *std::move(fixture);
  }

  auto inputs = LoadScored(config);
  if (!inputs.ok()) return Fail(kExitRuntime, inputs.status());
  LlmClient client(llm.model, transport, cache);
  auto validation = CrossValidate(inputs->records, inputs->results, client, options);
  if (!validation.ok()) return Fail(ExitCodeFor(validation.status()), validation.status());

  const fs::path dir = config.output_dir / kValidationDir;
  if (auto s = WriteJson(dir / "agreement.json", AgreementJson(*validation, options, llm.model));
      !s.ok()) {
    return Fail(kExitRuntime, s);
  }
  std::string verdicts;
  for (const auto& verdict : validation->verdicts) {
    verdicts += VerdictToJson(verdict).dump(-1, ' ', false, Json::error_handler_t::replace);
    verdicts += "\n";
  }
  if (auto s = WriteFile(dir / "verdicts.jsonl", verdicts); !s.ok()) {
    return Fail(kExitRuntime, s);
  }
  for (const auto& failure : validation->parse_failures) {
    spdlog::warn("record {}: unparseable LLM response", failure.record_id);
  }
  for (const auto& failure : validation->query_failures) {
    spdlog::warn("record {}: LLM query failed: {}", failure.record_id, failure.reason);
  }
  const AgreementStats& stats = validation->stats;
  PrintSummary(out, {{"n", stats.n},
                     {"exact_match_rate", stats.exact_match_rate},
                     {"mean_absolute_star_error", stats.mean_absolute_star_error},
                     {"parse_failures", validation->parse_failures.size()},
                     {"query_failures", validation->query_failures.size()},
                     {"mode", LlmModeName(llm.mode)},
                     {"network_calls", llm.mode == LlmMode::kLive ? client.network_calls() : 0},
                     {"cache_hits", client.cache_hits()},
                     {"agreement", (dir / "agreement.json").string()}});
  return kExitOk;
}

}  // namespace sentiscope::cli
