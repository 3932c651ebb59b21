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

#ifndef SENTISCOPE_BACKENDS_H_
#define SENTISCOPE_BACKENDS_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "sentiscope/scoring.h"

namespace sentiscope {

// Case-folded word -> polarity (+1 or -1).
using Lexicon = std::map<std::string, int, std::less<>>;

// Parses "word<TAB>+1|-1" lines. Blank lines and lines starting with '#' are
// ignored; a repeated word keeps its last polarity.
absl::StatusOr<Lexicon> ParseLexicon(std::string_view content);
absl::StatusOr<Lexicon> LoadLexicon(const std::filesystem::path& path);

// Lexicon lookup form of a whitespace word: surrounding punctuation trimmed,
// then case-folded. May be empty.
std::string LexiconToken(std::string_view word);

// polarity r = (P - N) / max(1, P + N); star = round_half_away(3 + 2r),
// returned as a one-hot distribution.
LabelDistribution LexiconClassify(std::string_view text, const Lexicon& lexicon);

// Deterministic word-polarity backend; tokens are whitespace words.
class LexiconBackend final : public ScoringBackend {
 public:
  explicit LexiconBackend(Lexicon lexicon,
                          int64_t max_tokens = kDefaultMaxTokens);

  absl::StatusOr<LabelDistribution> Classify(std::string_view text) const override;
  int64_t CountTokens(std::string_view text) const override;
  int64_t MaxTokens() const override { return max_tokens_; }
  std::string Name() const override { return "lexicon"; }
  absl::StatusOr<std::unique_ptr<ScoringBackend>> Clone() const override;

  const Lexicon& lexicon() const { return *lexicon_; }

 private:
  std::shared_ptr<const Lexicon> lexicon_;
  int64_t max_tokens_;
};

// Bridge to a transformer sequence classifier hosted by a Python worker
// process (Hugging Face transformers). The worker speaks JSON lines on
// stdin/stdout:
//   {"op":"info"}                -> {"max_tokens":512,"num_labels":5}
//   {"op":"count","text":"..."}  -> {"tokens":N}
//   {"op":"classify","text":"..."} -> {"probs":[p1,...,p5]}
//   any failure                  -> {"error":"..."}
// Requests on one instance are serialized; Clone() starts another worker.
class TransformerBackend final : public ScoringBackend {
 public:
  struct Options {
    std::string model_id;
    // Command used to start the worker; the model id is appended as
    // "--model <id>". Defaults to python3 running the bundled worker script,
    // overridable with SENTISCOPE_TRANSFORMER_WORKER.
    std::vector<std::string> worker_command;
  };

  static absl::StatusOr<std::unique_ptr<TransformerBackend>> Start(Options options);
  ~TransformerBackend() override;

  absl::StatusOr<LabelDistribution> Classify(std::string_view text) const override;
  int64_t CountTokens(std::string_view text) const override;
  int64_t MaxTokens() const override { return max_tokens_; }
  std::string Name() const override { return "transformer:" + options_.model_id; }
  bool IsShareable() const override { return false; }
  absl::StatusOr<std::unique_ptr<ScoringBackend>> Clone() const override;

  // Default worker command (without the --model argument).
  static std::vector<std::string> DefaultWorkerCommand();

 private:
  class Process;
  TransformerBackend(Options options, std::unique_ptr<Process> process,
                     int64_t max_tokens);

  Options options_;
  std::unique_ptr<Process> process_;
  int64_t max_tokens_;
};

// "lexicon:<path>" or "transformer:<model-id>". Unknown kinds fail with
// InvalidArgument.
absl::StatusOr<std::unique_ptr<ScoringBackend>> CreateBackend(
    std::string_view spec);

}  // namespace sentiscope

#endif  // SENTISCOPE_BACKENDS_H_
