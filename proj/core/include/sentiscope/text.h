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

#ifndef SENTISCOPE_TEXT_H_
#define SENTISCOPE_TEXT_H_

#include <string>
#include <string_view>
#include <vector>

namespace sentiscope {

// True if `text` is well-formed UTF-8 (no overlongs, no surrogates).
bool IsValidUtf8(std::string_view text);

// Unicode cleanup applied to every text field at ingest:
//   1. NFKC normalization,
//   2. White_Space code points become a single space,
//   3. remaining control (Cc) and format (Cf) code points are removed,
//   4. runs of spaces collapse, and the result is trimmed.
// Case is preserved. Invalid UTF-8 sequences are replaced with U+FFFD.
std::string NormalizeText(std::string_view raw);

// Full Unicode case folding (ICU), e.g. "Straße" -> "strasse".
std::string CaseFold(std::string_view text);

// Splits on ASCII and Unicode whitespace; never yields empty words.
std::vector<std::string> SplitWords(std::string_view text);

// Joins with single spaces.
std::string JoinWords(const std::vector<std::string>& words);
std::string JoinWords(const std::vector<std::string>& words, size_t begin,
                      size_t end);

// Returns the longest prefix of `text` that ends on a code point boundary
// and holds at most `max_code_points` code points.
std::string_view Utf8Prefix(std::string_view text, size_t max_code_points);
size_t CountCodePoints(std::string_view text);

}  // namespace sentiscope

#endif  // SENTISCOPE_TEXT_H_
