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
#include <thread>

#include "sentiscope/explain.h"
#include "strings.h"

namespace sentiscope {
namespace {

using Json = nlohmann::json;

constexpr std::string_view kDefaultSentimentText =
    "Classify the sentiment of the following scientific abstract on a scale "
    "from 1 to 5, where 1 is very negative, 3 is neutral and 5 is very "
    "positive. Reply with the rating and a short justification.\n\n"
    "Abstract:\n{abstract}";

constexpr std::string_view kDefaultSubjectivityText =
    "List the words and phrases in the following scientific abstract that "
    "carry noticeably more subjectivity than the surrounding text. Put each "
    "one in double quotes on its own line.\n\n"
    "Abstract:\n{abstract}";

size_t CountOccurrences(std::string_view text, std::string_view needle) {
  size_t count = 0;
  for (size_t pos = text.find(needle); pos != std::string_view::npos;
       pos = text.find(needle, pos + needle.size())) {
    ++count;
  }
  return count;
}

struct Task {
  int64_t record_id;
  PromptName prompt_name;
  std::string prompt;
};

struct Outcome {
  absl::StatusOr<Completion> completion = absl::UnknownError("not run");
};

}  // namespace

std::string_view PromptNameString(PromptName name) {
  switch (name) {
    case PromptName::kSentiment1To5:
      return "sentiment_1_to_5";
    case PromptName::kSubjectivityPhrases:
      return "subjectivity_phrases";
  }
  return "unknown";
}

absl::StatusOr<PromptName> ParsePromptName(std::string_view name) {
  if (name == "sentiment_1_to_5") return PromptName::kSentiment1To5;
  if (name == "subjectivity_phrases") return PromptName::kSubjectivityPhrases;
  return absl::InvalidArgumentError(StrCat("unknown prompt name '", name, "'"));
}

absl::StatusOr<PromptTemplate> PromptTemplate::Create(PromptName name,
                                                      std::string text) {
  const size_t count = CountOccurrences(text, kAbstractPlaceholder);
  if (count != 1) {
    return absl::InvalidArgumentError(StrCat(
        PromptNameString(name), " template must contain ", kAbstractPlaceholder,
        " exactly once, found ", count));
  }
  return PromptTemplate(name, std::move(text));
}

PromptTemplate PromptTemplate::Default(PromptName name) {
  return PromptTemplate(name, std::string(name == PromptName::kSentiment1To5
                                              ? kDefaultSentimentText
                                              : kDefaultSubjectivityText));
}

absl::StatusOr<std::string> BuildPrompt(const PromptTemplate& prompt,
                                        std::string_view abstract) {
  if (abstract.empty()) return absl::InvalidArgumentError("abstract is empty");
  const std::string& text = prompt.text();
  const size_t pos = text.find(kAbstractPlaceholder);
  if (pos == std::string::npos) {
    return absl::InvalidArgumentError("template has no {abstract} placeholder");
  }
  return StrCat(std::string_view(text).substr(0, pos), abstract,
                      std::string_view(text).substr(pos + kAbstractPlaceholder.size()));
}

int64_t AgreementStats::Trace() const {
  int64_t trace = 0;
  for (int i = 0; i < kNumStars; ++i) trace += confusion[i][i];
  return trace;
}

AgreementStats ComputeAgreement(std::span<const std::pair<int, int>> label_vs_stars) {
  AgreementStats stats;
  int64_t abs_error = 0;
  for (const auto& [label, stars] : label_vs_stars) {
    ++stats.confusion[label - 1][stars - 1];
    abs_error += std::abs(label - stars);
  }
  stats.n = static_cast<int64_t>(label_vs_stars.size());
  if (stats.n > 0) {
    stats.exact_match_rate =
        static_cast<double>(stats.Trace()) / static_cast<double>(stats.n);
    stats.mean_absolute_star_error =
        static_cast<double>(abs_error) / static_cast<double>(stats.n);
  }
  return stats;
}

absl::StatusOr<std::vector<int64_t>> SampleRecordIds(std::vector<int64_t> ids,
                                                     int64_t sample_size,
                                                     uint64_t seed) {
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  if (sample_size <= 0) {
    return absl::InvalidArgumentError("sample size must be positive");
  }
  if (sample_size > static_cast<int64_t>(ids.size())) {
    return absl::InvalidArgumentError(StrCat(
        "sample size ", sample_size, " exceeds the ", ids.size(), " scored records"));
  }
  PortableRng rng(seed);
  const size_t k = static_cast<size_t>(sample_size);
  for (size_t i = 0; i < k; ++i) {
    const size_t j = i + static_cast<size_t>(rng.UniformBelow(ids.size() - i));
    std::swap(ids[i], ids[j]);
  }
  ids.resize(k);
  std::sort(ids.begin(), ids.end());
  return ids;
}

absl::StatusOr<CrossValidation> CrossValidate(
    std::span<const AbstractRecord> records,
    std::span<const SentimentResult> results, LlmClient& client,
    const CrossValidateOptions& options) {
  std::map<int64_t, const AbstractRecord*> record_by_id;
  for (const auto& record : records) record_by_id[record.record_id] = &record;
  std::map<int64_t, const SentimentResult*> result_by_id;
  std::vector<int64_t> ids;
  for (const auto& result : results) {
    if (!record_by_id.contains(result.record_id)) continue;
    if (result_by_id.emplace(result.record_id, &result).second) {
      ids.push_back(result.record_id);
    }
  }

  CrossValidation out;
  auto sampled = SampleRecordIds(std::move(ids), options.sample_size, options.seed);
  if (!sampled.ok()) return sampled.status();
  out.sampled_record_ids = *std::move(sampled);

  std::vector<Task> tasks;
  for (int64_t id : out.sampled_record_ids) {
    const std::string& abstract = record_by_id.at(id)->abstract;
    auto prompt = BuildPrompt(options.sentiment_prompt, abstract);
    if (!prompt.ok()) return prompt.status();
    tasks.push_back({id, PromptName::kSentiment1To5, *std::move(prompt)});
    if (options.subjectivity) {
      auto phrases_prompt = BuildPrompt(options.subjectivity_prompt, abstract);
      if (!phrases_prompt.ok()) return phrases_prompt.status();
      tasks.push_back({id, PromptName::kSubjectivityPhrases, *std::move(phrases_prompt)});
    }
  }

  std::vector<Outcome> outcomes(tasks.size());
  std::atomic<size_t> next{0};
  std::atomic<bool> abort{false};
  auto worker = [&] {
    for (size_t i = next.fetch_add(1); i < tasks.size() && !abort.load();
         i = next.fetch_add(1)) {
      outcomes[i].completion = client.Query(tasks[i].prompt);
      const absl::Status& status = outcomes[i].completion.status();
      if (absl::IsUnauthenticated(status) || absl::IsPermissionDenied(status)) {
        abort.store(true);
      }
    }
  };
  const int threads =
      std::clamp<int>(options.parallelism, 1, std::max<int>(1, static_cast<int>(tasks.size())));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  std::vector<std::pair<int, int>> pairs;
  for (size_t i = 0; i < tasks.size(); ++i) {
    const Task& task = tasks[i];
    const auto& completion = outcomes[i].completion;
    if (!completion.ok()) {
      const absl::Status& status = completion.status();
      if (absl::IsUnauthenticated(status) || absl::IsPermissionDenied(status)) {
        return status;
      }
      out.query_failures.push_back(
          {task.record_id, task.prompt_name, std::string(status.message()), ""});
      continue;
    }
    LlmVerdict verdict;
    verdict.record_id = task.record_id;
    verdict.prompt_name = task.prompt_name;
    verdict.raw_response = completion->text;
    verdict.from_cache = completion->from_cache;
    if (task.prompt_name == PromptName::kSentiment1To5) {
      auto stars = ParseStarRating(completion->text);
      if (!stars.ok()) {
        out.parse_failures.push_back({task.record_id, task.prompt_name,
                                      std::string(stars.status().message()),
                                      completion->text});
      } else {
        verdict.stars = *stars;
        pairs.emplace_back(result_by_id.at(task.record_id)->label, *stars);
      }
    } else {
      verdict.subjective_phrases = ParseSubjectivePhrases(completion->text);
    }
    out.verdicts.push_back(std::move(verdict));
  }

  out.stats = ComputeAgreement(pairs);
  if (out.stats.n == 0) {
    return absl::FailedPreconditionError(StrCat(
        "no usable sentiment verdicts: ", out.parse_failures.size(),
        " parse failures, ", out.query_failures.size(), " query failures"));
  }
  return out;
}

Json AgreementJson(const CrossValidation& validation,
                   const CrossValidateOptions& options, std::string_view model) {
  auto failures = [](const std::vector<VerdictFailure>& list, bool with_response) {
    Json array = Json::array();
    for (const auto& f : list) {
      Json entry = {{"record_id", f.record_id},
                    {"prompt_name", PromptNameString(f.prompt_name)},
                    {"reason", f.reason}};
      if (with_response) entry["raw_response"] = f.raw_response;
      array.push_back(std::move(entry));
    }
    return array;
  };
  const AgreementStats& stats = validation.stats;
  Json confusion = Json::array();
  for (const auto& row : stats.confusion) confusion.push_back(row);
  Json templates = {{PromptNameString(PromptName::kSentiment1To5),
                     options.sentiment_prompt.text()}};
  if (options.subjectivity) {
    templates[std::string(PromptNameString(PromptName::kSubjectivityPhrases))] =
        options.subjectivity_prompt.text();
  }
  return Json{{"n", stats.n},
              {"exact_match_rate", stats.exact_match_rate},
              {"mean_absolute_star_error", stats.mean_absolute_star_error},
              {"confusion", std::move(confusion)},
              {"confusion_axes", {{"rows", "model_label"}, {"columns", "llm_stars"}}},
              {"sample_size", options.sample_size},
              {"seed", options.seed},
              {"sampled_record_ids", validation.sampled_record_ids},
              {"parse_failures", failures(validation.parse_failures, true)},
              {"query_failures", failures(validation.query_failures, false)},
              {"model", model},
              {"prompt_templates", std::move(templates)}};
}

Json VerdictToJson(const LlmVerdict& verdict) {
  Json json = {{"record_id", verdict.record_id},
               {"prompt_name", PromptNameString(verdict.prompt_name)}};
  json["stars"] = verdict.stars ? Json(*verdict.stars) : Json(nullptr);
  json["subjective_phrases"] = verdict.subjective_phrases;
  json["raw_response"] = verdict.raw_response;
  return json;
}

}  // namespace sentiscope
