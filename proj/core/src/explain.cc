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

#include "sentiscope/explain.h"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <functional>
#include <numeric>
#include <optional>
#include <thread>
#include <unordered_map>

#include "absl/status/status.h"
#include "sentiscope/corpus_io.h"
#include "sentiscope/text.h"
#include "strings.h"

namespace sentiscope {
namespace {

// Scores coalitions of words. A coalition is a presence flag per word.
class CoalitionGame {
 public:
  CoalitionGame(std::vector<std::string> words, const ScoringBackend& backend,
                ExplainedQuantity quantity, int label, int64_t chunk_budget)
      : words_(std::move(words)),
        backend_(backend),
        quantity_(quantity),
        label_(label),
        chunk_budget_(chunk_budget) {}

  size_t players() const { return words_.size(); }

  absl::StatusOr<double> Value(const std::vector<char>& present) const {
    std::string text;
    for (size_t i = 0; i < words_.size(); ++i) {
      if (!present[i]) continue;
      if (!text.empty()) text.push_back(' ');
      text += words_[i];
    }
    if (text.empty()) return Quantity(LabelDistribution::Uniform());
    auto result = ScoreText(0, text, backend_, chunk_budget_);
    if (!result.ok()) return result.status();
    auto distribution = AggregateChunks(result->chunk_scores);
    if (!distribution.ok()) return distribution.status();
    return Quantity(*distribution);
  }

  double Quantity(const LabelDistribution& d) const {
    return quantity_ == ExplainedQuantity::kNormalizedScore
               ? d.NormalizedScore()
               : d.probability(label_);
  }

 private:
  std::vector<std::string> words_;
  const ScoringBackend& backend_;
  ExplainedQuantity quantity_;
  int label_;
  int64_t chunk_budget_;
};

// Runs fn(worker, index) for index in [0, count) over `parallelism` workers,
// each with its own backend (cloned when the backend is not shareable).
// Returns the first failure by index.
absl::Status ParallelFor(
    size_t count, int parallelism, const ScoringBackend& backend,
    const std::function<absl::Status(const ScoringBackend&, size_t)>& fn) {
  const size_t workers =
      std::clamp<size_t>(static_cast<size_t>(std::max(1, parallelism)), 1,
                         std::max<size_t>(1, count));
  std::vector<std::unique_ptr<ScoringBackend>> clones;
  std::vector<const ScoringBackend*> backends(workers, &backend);
  if (!backend.IsShareable()) {
    for (size_t w = 1; w < workers; ++w) {
      auto clone = backend.Clone();
      if (!clone.ok()) return clone.status();
      backends[w] = clone->get();
      clones.push_back(std::move(*clone));
    }
  }
  std::vector<absl::Status> failures(count);
  std::atomic<size_t> next{0};
  auto work = [&](size_t worker) {
    for (size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
      failures[i] = fn(*backends[worker], i);
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::jthread> threads;
    for (size_t w = 0; w < workers; ++w) threads.emplace_back(work, w);
  }
  for (auto& status : failures) {
    if (!status.ok()) return status;
  }
  return absl::OkStatus();
}

struct Prepared {
  std::vector<std::string> words;
  int label = 0;
};

absl::StatusOr<Prepared> Prepare(std::string_view text,
                                 const ScoringBackend& backend,
                                 const ExplainOptions& options) {
  Prepared p;
  p.words = SplitWords(text);
  if (p.words.empty()) {
    return absl::InvalidArgumentError("text has no words to explain");
  }
  auto full = ScoreText(options.record_id, text, backend, options.chunk_budget);
  if (!full.ok()) return full.status();
  p.label = full->label;
  return p;
}

AttributionReport NewReport(const Prepared& p, const ExplainOptions& options,
                            AttributionMethod method) {
  AttributionReport report;
  report.record_id = options.record_id;
  report.explained_quantity = options.quantity;
  report.explained_label = p.label;
  report.method = method;
  for (const auto& word : p.words) report.attributions.push_back({word, 0.0, 0.0});
  return report;
}

}  // namespace

std::string_view ExplainedQuantityName(ExplainedQuantity quantity) {
  return quantity == ExplainedQuantity::kNormalizedScore ? "normalized_score"
                                                         : "probability_of_label";
}

absl::StatusOr<ExplainedQuantity> ParseExplainedQuantity(std::string_view name) {
  if (name == "normalized_score") return ExplainedQuantity::kNormalizedScore;
  if (name == "probability_of_label") return ExplainedQuantity::kProbabilityOfLabel;
  return absl::InvalidArgumentError(StrCat(
      "explained quantity '", name,
      "' must be normalized_score or probability_of_label"));
}

std::string_view AttributionMethodName(AttributionMethod method) {
  return method == AttributionMethod::kExactShapley ? "exact_shapley"
                                                    : "sampled_shapley";
}

double AttributionReport::AdditivityGap() const {
  double total = base_value;
  for (const auto& a : attributions) total += a.value;
  return model_output - total;
}

PortableRng::PortableRng(uint64_t seed) : engine_(seed) {}

uint64_t PortableRng::UniformBelow(uint64_t bound) {
  if (bound <= 1) return 0;
  // Reject the low values that would bias the modulo.
  const uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    const uint64_t r = engine_();
    if (r >= threshold) return r % bound;
  }
}

absl::StatusOr<AttributionReport> AttributeExact(std::string_view text,
                                                 const ScoringBackend& backend,
                                                 const ExplainOptions& options) {
  auto prepared = Prepare(text, backend, options);
  if (!prepared.ok()) return prepared.status();
  const size_t n = prepared->words.size();
  if (n > static_cast<size_t>(kMaxExactWords)) {
    return absl::InvalidArgumentError(StrCat(
        "exact attribution supports at most ", kMaxExactWords, " words; text has ",
        n, " (use sampled attribution)"));
  }

  // v[mask]: bit i set means word i is present.
  const size_t coalitions = size_t{1} << n;
  std::vector<double> v(coalitions);
  auto status = ParallelFor(
      coalitions, options.parallelism, backend,
      [&](const ScoringBackend& worker_backend, size_t mask) -> absl::Status {
        CoalitionGame game(prepared->words, worker_backend, options.quantity,
                           prepared->label, options.chunk_budget);
        std::vector<char> present(n);
        for (size_t i = 0; i < n; ++i) present[i] = (mask >> i) & 1;
        auto value = game.Value(present);
        if (!value.ok()) return value.status();
        v[mask] = *value;
        return absl::OkStatus();
      });
  if (!status.ok()) return status;

  // weight[s] = s! (n - s - 1)! / n!
  std::vector<double> factorial(n + 1, 1.0);
  for (size_t k = 1; k <= n; ++k) factorial[k] = factorial[k - 1] * k;
  std::vector<double> weight(n);
  for (size_t s = 0; s < n; ++s) {
    weight[s] = factorial[s] * factorial[n - s - 1] / factorial[n];
  }

  AttributionReport report =
      NewReport(*prepared, options, AttributionMethod::kExactShapley);
  for (size_t i = 0; i < n; ++i) {
    const size_t bit = size_t{1} << i;
    double phi = 0.0;
    for (size_t mask = 0; mask < coalitions; ++mask) {
      if (mask & bit) continue;
      phi += weight[std::popcount(mask)] * (v[mask | bit] - v[mask]);
    }
    report.attributions[i].value = phi;
  }
  report.base_value = v[0];
  report.model_output = v[coalitions - 1];
  return report;
}

absl::StatusOr<AttributionReport> AttributeSampled(
    std::string_view text, const ScoringBackend& backend,
    const ExplainOptions& options, const SamplingOptions& sampling) {
  auto prepared = Prepare(text, backend, options);
  if (!prepared.ok()) return prepared.status();
  const size_t n = prepared->words.size();

  // Fix the whole permutation sequence up front.
  std::vector<std::vector<int>> permutations;
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  if (sampling.enumerate_permutations) {
    if (n > 10) {
      return absl::InvalidArgumentError(
          "permutation enumeration is limited to 10 words");
    }
    do {
      permutations.push_back(order);
    } while (std::next_permutation(order.begin(), order.end()));
  } else {
    if (sampling.samples < 1) {
      return absl::InvalidArgumentError("samples must be at least 1");
    }
    PortableRng rng(sampling.seed);
    permutations.reserve(sampling.samples);
    for (int64_t s = 0; s < sampling.samples; ++s) {
      std::vector<int> p = order;
      rng.Shuffle(p);
      permutations.push_back(std::move(p));
    }
  }

  CoalitionGame base_game(prepared->words, backend, options.quantity,
                          prepared->label, options.chunk_budget);
  auto empty_value = base_game.Value(std::vector<char>(n, 0));
  if (!empty_value.ok()) return empty_value.status();
  auto full_value = base_game.Value(std::vector<char>(n, 1));
  if (!full_value.ok()) return full_value.status();

  // marginals[k * n + i]: contribution of word i in permutation k.
  std::vector<double> marginals(permutations.size() * n);
  auto status = ParallelFor(
      permutations.size(), options.parallelism, backend,
      [&](const ScoringBackend& worker_backend, size_t k) -> absl::Status {
        CoalitionGame game(prepared->words, worker_backend, options.quantity,
                           prepared->label, options.chunk_budget);
        std::vector<char> present(n, 0);
        double previous = *empty_value;
        for (size_t step = 0; step < n; ++step) {
          const int player = permutations[k][step];
          present[player] = 1;
          double current = *full_value;
          if (step + 1 < n) {
            auto value = game.Value(present);
            if (!value.ok()) return value.status();
            current = *value;
          }
          marginals[k * n + player] = current - previous;
          previous = current;
        }
        return absl::OkStatus();
      });
  if (!status.ok()) return status;

  AttributionReport report =
      NewReport(*prepared, options, AttributionMethod::kSampledShapley);
  const auto m = static_cast<double>(permutations.size());
  for (size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (size_t k = 0; k < permutations.size(); ++k) sum += marginals[k * n + i];
    const double mean = sum / m;
    double squares = 0.0;
    for (size_t k = 0; k < permutations.size(); ++k) {
      const double d = marginals[k * n + i] - mean;
      squares += d * d;
    }
    report.attributions[i].value = mean;
    report.attributions[i].std_error =
        permutations.size() > 1 ? std::sqrt(squares / (m - 1) / m) : 0.0;
  }
  report.base_value = *empty_value;
  report.model_output = *full_value;
  report.sample_count = static_cast<int64_t>(permutations.size());
  report.seed = sampling.enumerate_permutations ? 0 : sampling.seed;
  return report;
}

namespace {

std::string HtmlEscape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&#39;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

}  // namespace

absl::StatusOr<std::string> AttributionHtml(const AttributionReport& report,
                                            std::string_view text) {
  const auto words = SplitWords(text);
  if (words.size() != report.attributions.size()) {
    return absl::InvalidArgumentError(StrCat(
        "text has ", words.size(), " words but the report explains ",
        report.attributions.size()));
  }
  for (size_t i = 0; i < words.size(); ++i) {
    if (words[i] != report.attributions[i].token) {
      return absl::InvalidArgumentError(
          StrCat("word ", i, " of the text does not match the report"));
    }
  }
  double max_abs = 0.0;
  for (const auto& a : report.attributions) max_abs = std::max(max_abs, std::abs(a.value));

  std::string html = StrCat(
      "<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n"
      "<title>Sentiment attribution for record ", report.record_id, "</title>\n",
      "<style>\n"
      "body { font-family: sans-serif; max-width: 60em; margin: 2em auto; }\n"
      ".caption { color: #444; margin-bottom: 1em; }\n"
      ".caption td { padding-right: 1.5em; }\n"
      ".text { line-height: 2; font-size: 1.1em; }\n"
      ".tok { padding: 0.1em 0.15em; border-radius: 3px; }\n"
      "</style>\n</head>\n<body>\n");
  StrAppend(
      &html, "<table class=\"caption\">\n",
      "<tr><td>explained quantity</td><td>",
      ExplainedQuantityName(report.explained_quantity),
      report.explained_quantity == ExplainedQuantity::kProbabilityOfLabel
          ? StrCat(" (star ", report.explained_label, ")")
          : std::string(),
      "</td></tr>\n",
      fmt::sprintf("<tr><td>base value</td><td>%.6f</td></tr>\n", report.base_value),
      fmt::sprintf("<tr><td>model output</td><td>%.6f</td></tr>\n",
                      report.model_output),
      "<tr><td>method</td><td>", AttributionMethodName(report.method),
      report.method == AttributionMethod::kSampledShapley
          ? StrCat(" (", report.sample_count, " permutations)")
          : std::string(),
      "</td></tr>\n",
      "<tr><td>legend</td><td><span style=\"background-color: rgba(255, 0, 0, 0.6)\">"
      "raises</span> / <span style=\"background-color: rgba(0, 0, 255, 0.6)\">lowers"
      "</span> the explained quantity</td></tr>\n</table>\n<div class=\"text\">\n");
  for (size_t i = 0; i < report.attributions.size(); ++i) {
    const auto& a = report.attributions[i];
    const double opacity = max_abs > 0.0 ? std::abs(a.value) / max_abs : 0.0;
    std::string style;
    if (opacity > 0.0) {
      style = fmt::sprintf(" style=\"background-color: rgba(%s, %.3f)\"",
                              a.value > 0.0 ? "255, 0, 0" : "0, 0, 255", opacity);
    }
    StrAppend(&html, i > 0 ? " " : "",
                    fmt::sprintf("<span class=\"tok\" title=\"%+.6f\"%s>", a.value,
                                    style),
                    HtmlEscape(a.token), "</span>");
  }
  html += "\n</div>\n</body>\n</html>\n";
  return html;
}

absl::Status RenderAttributionHtml(const AttributionReport& report,
                                   std::string_view text,
                                   const std::filesystem::path& out_path) {
  auto html = AttributionHtml(report, text);
  if (!html.ok()) return html.status();
  return WriteFile(out_path, *html);
}

nlohmann::json ReportToJson(const AttributionReport& report) {
  nlohmann::json tokens = nlohmann::json::array();
  for (const auto& a : report.attributions) {
    tokens.push_back({{"token", a.token}, {"value", a.value}, {"std_error", a.std_error}});
  }
  const double gap = report.AdditivityGap();
  return {
      {"record_id", report.record_id},
      {"explained_quantity", ExplainedQuantityName(report.explained_quantity)},
      {"explained_label", report.explained_label},
      {"method", AttributionMethodName(report.method)},
      {"sample_count", report.sample_count},
      {"seed", report.seed},
      {"base_value", report.base_value},
      {"model_output", report.model_output},
      {"additivity_gap", gap},
      {"additivity_holds", std::abs(gap) <= kAdditivityTolerance},
      {"attributions", tokens},
  };
}

absl::StatusOr<AttributionReport> ReportFromJson(const nlohmann::json& json) {
  try {
    AttributionReport report;
    report.record_id = json.at("record_id").get<int64_t>();
    auto quantity = ParseExplainedQuantity(json.at("explained_quantity").get<std::string>());
    if (!quantity.ok()) return quantity.status();
    report.explained_quantity = *quantity;
    report.explained_label = json.at("explained_label").get<int>();
    const auto method = json.at("method").get<std::string>();
    if (method == "exact_shapley") {
      report.method = AttributionMethod::kExactShapley;
    } else if (method == "sampled_shapley") {
      report.method = AttributionMethod::kSampledShapley;
    } else {
      return absl::InvalidArgumentError(StrCat("unknown method '", method, "'"));
    }
    report.sample_count = json.at("sample_count").get<int64_t>();
    report.seed = json.at("seed").get<uint64_t>();
    report.base_value = json.at("base_value").get<double>();
    report.model_output = json.at("model_output").get<double>();
    for (const auto& t : json.at("attributions")) {
      report.attributions.push_back({t.at("token").get<std::string>(),
                                     t.at("value").get<double>(),
                                     t.value("std_error", 0.0)});
    }
    return report;
  } catch (const nlohmann::json::exception& e) {
    return absl::InvalidArgumentError(StrCat("malformed report: ", e.what()));
  }
}

}  // namespace sentiscope
