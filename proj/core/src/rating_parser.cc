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

#include <algorithm>
#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "sentiscope/llm_validate.h"
#include "strings.h"

namespace sentiscope {
namespace {

constexpr std::array<std::string_view, 12> kCues = {
    "rate",  "rated",  "rates",   "rating",   "score",      "scored",
    "scores", "scoring", "classify", "classified", "classifies", "classification"};

constexpr std::string_view kEnDash = "\xE2\x80\x93";
constexpr std::string_view kBullet = "\xE2\x80\xA2";
constexpr std::string_view kLeftDouble = "\xE2\x80\x9C";
constexpr std::string_view kRightDouble = "\xE2\x80\x9D";
constexpr std::string_view kLeftSingle = "\xE2\x80\x98";
constexpr std::string_view kRightSingle = "\xE2\x80\x99";

bool IsDigit(char c) { return c >= '0' && c <= '9'; }
bool IsAlpha(char c) { return IsAsciiAlpha(c); }
bool IsAlnum(char c) { return IsAsciiAlnum(c); }
bool IsSpace(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; }

size_t SkipSpaces(std::string_view s, size_t i) {
  while (i < s.size() && IsSpace(s[i])) ++i;
  return i;
}

// Index one past the last non-space character before `i`.
size_t SkipSpacesBack(std::string_view s, size_t i) {
  while (i > 0 && IsSpace(s[i - 1])) --i;
  return i;
}

bool WordAt(std::string_view lower, size_t i, std::string_view word) {
  return lower.substr(i, word.size()) == word &&
         (i + word.size() == lower.size() || !IsAlnum(lower[i + word.size()]));
}

bool WordEndsAt(std::string_view lower, size_t end, std::string_view word) {
  return end >= word.size() && lower.substr(end - word.size(), word.size()) == word &&
         (end == word.size() || !IsAlnum(lower[end - word.size() - 1]));
}

// Length of a range connector ("-", en dash, "to", "and") at `i`, or 0.
size_t RangeConnectorAt(std::string_view lower, size_t i) {
  if (i < lower.size() && lower[i] == '-') return 1;
  if (lower.substr(i, kEnDash.size()) == kEnDash) return kEnDash.size();
  if (WordAt(lower, i, "to")) return 2;
  if (WordAt(lower, i, "and")) return 3;
  return 0;
}

// Length of a range connector ending at `end`, or 0.
size_t RangeConnectorEndsAt(std::string_view lower, size_t end) {
  if (end >= 1 && lower[end - 1] == '-') return 1;
  if (end >= kEnDash.size() && lower.substr(end - kEnDash.size(), kEnDash.size()) == kEnDash) {
    return kEnDash.size();
  }
  if (WordEndsAt(lower, end, "to")) return 2;
  if (WordEndsAt(lower, end, "and")) return 3;
  return 0;
}

// Single digit 1-5 at `i` that stands alone as a rating.
bool IsCandidate(std::string_view lower, size_t i) {
  const char c = lower[i];
  if (c < '1' || c > '5') return false;
  const char prev = i > 0 ? lower[i - 1] : '\n';
  const char next = i + 1 < lower.size() ? lower[i + 1] : '\n';
  if (IsAlnum(prev) || IsAlnum(next)) return false;
  // Decimals and version-like numbers.
  if ((prev == '.' || prev == ',') && i >= 2 && IsDigit(lower[i - 2])) return false;
  if ((next == '.' || next == ',') && i + 2 < lower.size() && IsDigit(lower[i + 2])) {
    return false;
  }
  if (next == '%') return false;
  // Hyphenated compounds such as "5-point" or "covid-1".
  if (prev == '-' && i >= 2 && IsAlnum(lower[i - 2])) return false;
  if (next == '-' && i + 2 < lower.size() && IsAlpha(lower[i + 2])) return false;
  // Denominators: "/5", "/ 5", "out of 5".
  const size_t before = SkipSpacesBack(lower, i);
  if (before > 0 && lower[before - 1] == '/') return false;
  if (WordEndsAt(lower, before, "of") &&
      WordEndsAt(lower, SkipSpacesBack(lower, before - 2), "out")) {
    return false;
  }
  // Scale ranges: "1 to 5", "1-5", "between 1 and 5".
  const size_t after = SkipSpaces(lower, i + 1);
  if (const size_t len = RangeConnectorAt(lower, after);
      len > 0 && SkipSpaces(lower, after + len) < lower.size() &&
      IsDigit(lower[SkipSpaces(lower, after + len)])) {
    return false;
  }
  if (const size_t len = RangeConnectorEndsAt(lower, before); len > 0) {
    const size_t digit_end = SkipSpacesBack(lower, before - len);
    if (digit_end > 0 && IsDigit(lower[digit_end - 1])) return false;
  }
  // Numbered list markers: "1. " or "2) " at the start of a line.
  if (next == '.' || next == ')') {
    size_t line_start = i;
    while (line_start > 0 && (lower[line_start - 1] == ' ' || lower[line_start - 1] == '\t')) {
      --line_start;
    }
    if (line_start == 0 || lower[line_start - 1] == '\n') return false;
  }
  return true;
}

}  // namespace

absl::StatusOr<int> ParseStarRating(std::string_view response) {
  const std::string lower = AsciiLower(response);
  std::optional<size_t> cue_end;
  for (size_t i = 0; i < lower.size() && !cue_end; ++i) {
    if (i > 0 && IsAlnum(lower[i - 1])) continue;
    for (std::string_view cue : kCues) {
      if (WordAt(lower, i, cue)) {
        cue_end = i + cue.size();
        break;
      }
    }
  }
  auto first_candidate = [&](size_t from) -> std::optional<int> {
    for (size_t i = from; i < lower.size(); ++i) {
      if (IsCandidate(lower, i)) return lower[i] - '0';
    }
    return std::nullopt;
  };
  std::optional<int> stars;
  if (cue_end) stars = first_candidate(*cue_end);
  if (!stars) stars = first_candidate(0);
  if (!stars) {
    return absl::InvalidArgumentError(
        StrCat("no star rating in response: ", response));
  }
  return *stars;
}

namespace {

std::string_view TrimPhrase(std::string_view text) {
  constexpr std::string_view kStrip = " \t\r*_`";
  constexpr std::string_view kTrailing = " \t\r*_`.,;:";
  const size_t start = text.find_first_not_of(kStrip);
  if (start == std::string_view::npos) return {};
  text.remove_prefix(start);
  const size_t end = text.find_last_not_of(kTrailing);
  return end == std::string_view::npos ? std::string_view() : text.substr(0, end + 1);
}

// Finds `close` after `from` that is not followed by a letter or digit.
size_t FindClosing(std::string_view line, size_t from, std::string_view close) {
  for (size_t j = line.find(close, from); j != std::string_view::npos;
       j = line.find(close, j + 1)) {
    const size_t after = j + close.size();
    if (after >= line.size() || !IsAlnum(line[after])) return j;
  }
  return std::string_view::npos;
}

std::vector<std::string_view> QuotedSpans(std::string_view line) {
  std::vector<std::string_view> spans;
  size_t i = 0;
  while (i < line.size()) {
    std::string_view close;
    size_t open_len = 1;
    if (line[i] == '"') {
      close = "\"";
    } else if (line.substr(i, kLeftDouble.size()) == kLeftDouble) {
      close = kRightDouble;
      open_len = kLeftDouble.size();
    } else if (line.substr(i, kLeftSingle.size()) == kLeftSingle) {
      close = kRightSingle;
      open_len = kLeftSingle.size();
    } else if (line[i] == '\'' && (i == 0 || !IsAlnum(line[i - 1]))) {
      close = "'";
    } else {
      ++i;
      continue;
    }
    const size_t start = i + open_len;
    const size_t j = close == "\"" ? line.find(close, start) : FindClosing(line, start, close);
    if (j == std::string_view::npos) {
      i = start;
      continue;
    }
    spans.push_back(line.substr(start, j - start));
    i = j + close.size();
  }
  return spans;
}

// Text after a list marker ("1.", "2)", "-", "*", bullet), if the line is
// a list item.
std::optional<std::string_view> ListItemText(std::string_view line) {
  const size_t start = line.find_first_not_of(" \t");
  if (start == std::string_view::npos) return std::nullopt;
  line.remove_prefix(start);
  size_t marker = 0;
  if (IsDigit(line[0])) {
    while (marker < line.size() && IsDigit(line[marker])) ++marker;
    if (marker >= line.size() || (line[marker] != '.' && line[marker] != ')')) {
      return std::nullopt;
    }
    ++marker;
  } else if (line[0] == '-' || line[0] == '*') {
    marker = 1;
  } else if (line.substr(0, kBullet.size()) == kBullet) {
    marker = kBullet.size();
  } else {
    return std::nullopt;
  }
  if (marker >= line.size() || (line[marker] != ' ' && line[marker] != '\t')) {
    return std::nullopt;
  }
  return line.substr(marker + 1);
}

std::string_view CutExplanation(std::string_view item) {
  size_t cut = item.size();
  for (std::string_view sep : {std::string_view(" - "), std::string_view(" \xE2\x80\x93 "),
                               std::string_view(" \xE2\x80\x94 "), std::string_view(": ")}) {
    cut = std::min(cut, item.find(sep));
  }
  return item.substr(0, cut);
}

}  // namespace

std::vector<std::string> ParseSubjectivePhrases(std::string_view response) {
  std::vector<std::string> phrases;
  std::unordered_set<std::string> seen;
  auto add = [&](std::string_view raw) {
    const std::string_view phrase = TrimPhrase(raw);
    if (phrase.empty()) return;
    if (seen.emplace(phrase).second) phrases.emplace_back(phrase);
  };
  for (std::string_view line : Split(response, '\n')) {
    const std::vector<std::string_view> quoted = QuotedSpans(line);
    if (!quoted.empty()) {
      for (std::string_view span : quoted) add(span);
    } else if (auto item = ListItemText(line)) {
      add(CutExplanation(*item));
    }
  }
  return phrases;
}

}  // namespace sentiscope
