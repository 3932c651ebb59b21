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

#ifndef SENTISCOPE_CORPUS_IO_H_
#define SENTISCOPE_CORPUS_IO_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "sentiscope/sentiment.h"

namespace sentiscope {

inline constexpr int kMinYear = 1900;
inline constexpr int kMaxYear = 2100;

struct AbstractRecord {
  int64_t record_id = 0;
  std::string journal;
  std::string title;
  int year = 0;
  std::string abstract;

  bool operator==(const AbstractRecord&) const = default;
};

enum class RowErrorReason { kMissingField, kBadYear, kEmptyAbstract, kEncodingError };

std::string_view RowErrorReasonName(RowErrorReason reason);

struct RowError {
  int64_t row_number = 0;  // 1-based, header excluded
  RowErrorReason reason = RowErrorReason::kMissingField;
  std::string detail;
};

// Logical column -> CSV header name.
struct ColumnMap {
  std::string journal = "journal";
  std::string title = "title";
  std::string year = "year";
  std::string abstract = "abstract";

  bool operator==(const ColumnMap&) const = default;
};

struct LoadedCorpus {
  std::vector<AbstractRecord> records;
  std::vector<RowError> errors;
  int64_t data_rows = 0;
};

// Every data row becomes one record (ids 0.. in file order) or one RowError.
// Fails only on I/O problems, a missing header/column, a header that is not
// UTF-8, or a CSV syntax error.
absl::StatusOr<LoadedCorpus> LoadCorpus(const std::filesystem::path& path,
                                        const ColumnMap& columns = {});
absl::StatusOr<LoadedCorpus> ParseCorpus(std::string_view content,
                                         const ColumnMap& columns = {});

// Applies NormalizeText to journal, title and abstract.
AbstractRecord NormalizeRecord(AbstractRecord record);

// Case-folded normalized abstract.
std::string DedupeKey(std::string_view abstract);

struct DedupeResult {
  std::vector<AbstractRecord> kept;
  std::vector<AbstractRecord> dropped;
};

// Keeps the first record of each DedupeKey group, preserving input order.
DedupeResult Dedupe(std::span<const AbstractRecord> records);

// Writes the mapped columns and, when `results` is given, sentiment_score
// (6 decimals) and sentiment_label. Records without a matching result get
// empty sentiment cells.
absl::Status WriteCorpus(std::span<const AbstractRecord> records,
                         const std::filesystem::path& path,
                         const ColumnMap& columns = {});
absl::Status WriteScoredCorpus(std::span<const AbstractRecord> records,
                               std::span<const SentimentResult> results,
                               const std::filesystem::path& path,
                               const ColumnMap& columns = {});
std::string FormatScore(double score);

struct ScoredRow {
  AbstractRecord record;
  std::optional<double> score;
  std::optional<int> label;
};

struct ScoredCorpus {
  std::vector<ScoredRow> rows;
  std::vector<RowError> errors;
};

absl::StatusOr<ScoredCorpus> LoadScoredCorpus(const std::filesystem::path& path,
                                              const ColumnMap& columns = {});

absl::StatusOr<std::string> ReadFile(const std::filesystem::path& path);
absl::Status WriteFile(const std::filesystem::path& path,
                       std::string_view content);

}  // namespace sentiscope

#endif  // SENTISCOPE_CORPUS_IO_H_
