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

#include <unicode/uchar.h>
#include <unicode/utf8.h>

#include <algorithm>

#include "absl/status/status.h"
#include "sentiscope/backends.h"
#include "sentiscope/text.h"
#include "strings.h"

namespace sentiscope {

absl::StatusOr<Lexicon> ParseLexicon(std::string_view content) {
  Lexicon lexicon;
  int line_number = 0;
  for (std::string_view line : Split(content, '\n')) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (StripAscii(line).empty() || line.front() == '#') continue;
    const size_t tab = line.find('\t');
    if (tab == std::string_view::npos) {
      return absl::InvalidArgumentError(
          StrCat("lexicon line ", line_number, ": expected word<TAB>+1|-1"));
    }
    const std::string word = LexiconToken(line.substr(0, tab));
    const std::string_view polarity =
        StripAscii(line.substr(tab + 1));
    if (word.empty()) {
      return absl::InvalidArgumentError(
          StrCat("lexicon line ", line_number, ": empty word"));
    }
    if (polarity == "+1") {
      lexicon[word] = +1;
    } else if (polarity == "-1") {
      lexicon[word] = -1;
    } else {
      return absl::InvalidArgumentError(StrCat(
          "lexicon line ", line_number, ": polarity must be +1 or -1, got '",
          polarity, "'"));
    }
  }
  if (lexicon.empty()) {
    return absl::InvalidArgumentError("lexicon has no entries");
  }
  return lexicon;
}

absl::StatusOr<Lexicon> LoadLexicon(const std::filesystem::path& path) {
  auto content = ReadFile(path);
  if (!content.ok()) return content.status();
  auto lexicon = ParseLexicon(*content);
  if (!lexicon.ok()) {
    return absl::InvalidArgumentError(
        StrCat(path.string(), ": ", lexicon.status().message()));
  }
  return lexicon;
}

std::string LexiconToken(std::string_view word) {
  const auto* s = reinterpret_cast<const uint8_t*>(word.data());
  const auto length = static_cast<int32_t>(word.size());
  int32_t begin = 0;
  while (begin < length) {
    int32_t next = begin;
    UChar32 c;
    U8_NEXT(s, next, length, c);
    if (c >= 0 && u_isalnum(c)) break;
    begin = next;
  }
  int32_t end = length;
  while (end > begin) {
    int32_t prev = end;
    UChar32 c;
    U8_PREV(s, 0, prev, c);
    if (c >= 0 && u_isalnum(c)) break;
    end = prev;
  }
  return CaseFold(word.substr(begin, end - begin));
}

LabelDistribution LexiconClassify(std::string_view text, const Lexicon& lexicon) {
  int64_t positive = 0;
  int64_t negative = 0;
  for (const auto& word : SplitWords(text)) {
    const auto it = lexicon.find(LexiconToken(word));
    if (it == lexicon.end()) continue;
    (it->second > 0 ? positive : negative) += 1;
  }
  // 3 + 2r with r = d / t, rounded half away from zero in integers; the
  // numerator 3t + 2d is always >= t > 0.
  const int64_t t = std::max<int64_t>(1, positive + negative);
  const int64_t numerator = 3 * t + 2 * (positive - negative);
  const int64_t star = (2 * numerator + t) / (2 * t);
  return LabelDistribution::OneHot(static_cast<int>(std::clamp<int64_t>(star, 1, 5)));
}

LexiconBackend::LexiconBackend(Lexicon lexicon, int64_t max_tokens)
    : lexicon_(std::make_shared<const Lexicon>(std::move(lexicon))),
      max_tokens_(max_tokens) {}

absl::StatusOr<LabelDistribution> LexiconBackend::Classify(
    std::string_view text) const {
  return LexiconClassify(text, *lexicon_);
}

int64_t LexiconBackend::CountTokens(std::string_view text) const {
  return static_cast<int64_t>(SplitWords(text).size());
}

absl::StatusOr<std::unique_ptr<ScoringBackend>> LexiconBackend::Clone() const {
  return std::unique_ptr<ScoringBackend>(new LexiconBackend(*this));
}

absl::StatusOr<std::unique_ptr<ScoringBackend>> CreateBackend(
    std::string_view spec) {
  const size_t colon = spec.find(':');
  const std::string_view kind = spec.substr(0, colon);
  const std::string_view argument =
      colon == std::string_view::npos ? "" : spec.substr(colon + 1);
  if (argument.empty() || (kind != "lexicon" && kind != "transformer")) {
    return absl::InvalidArgumentError(StrCat(
        "backend spec '", spec,
        "' must be 'lexicon:<lexicon-file>' or 'transformer:<model-id>'"));
  }
  if (kind == "lexicon") {
    auto lexicon = LoadLexicon(std::string(argument));
    if (!lexicon.ok()) {
      return absl::InvalidArgumentError(lexicon.status().message());
    }
    return std::unique_ptr<ScoringBackend>(
        std::make_unique<LexiconBackend>(*std::move(lexicon)));
  }
  auto backend = TransformerBackend::Start({std::string(argument), {}});
  if (!backend.ok()) return backend.status();
  return std::unique_ptr<ScoringBackend>(std::move(*backend));
}

}  // namespace sentiscope
