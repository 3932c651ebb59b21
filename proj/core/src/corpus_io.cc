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

#include "sentiscope/corpus_io.h"

#include <charconv>
#include <fstream>
#include <iterator>
#include <sstream>
#include <unordered_map>
#include <unordered_set>
#include <variant>

#include "sentiscope/csv.h"
#include "sentiscope/text.h"
#include "strings.h"

namespace sentiscope {
namespace {

constexpr std::string_view kUtf8Bom = "\xEF\xBB\xBF";
constexpr std::string_view kScoreColumn = "sentiment_score";
constexpr std::string_view kLabelColumn = "sentiment_label";

struct ColumnIndex {
  size_t journal, title, year, abstract;
  std::optional<size_t> score, label;
};

absl::StatusOr<ColumnIndex> ResolveColumns(const CsvRow& header,
                                           const ColumnMap& columns) {
  auto find = [&](const std::string& name) -> std::optional<size_t> {
    for (size_t i = 0; i < header.size(); ++i) {
      if (StripAscii(header[i]) == name) return i;
    }
    return std::nullopt;
  };
  ColumnIndex index{};
  const std::pair<const std::string*, size_t*> required[] = {
      {&columns.journal, &index.journal},
      {&columns.title, &index.title},
      {&columns.year, &index.year},
      {&columns.abstract, &index.abstract},
  };
  for (const auto& [name, slot] : required) {
    const auto found = find(*name);
    if (!found) {
      return absl::InvalidArgumentError(
          StrCat("CSV header has no column named '", *name, "'"));
    }
    *slot = *found;
  }
  index.score = find(std::string(kScoreColumn));
  index.label = find(std::string(kLabelColumn));
  return index;
}

std::optional<int> ParseYear(std::string_view text) {
  text = StripAscii(text);
  int year = 0;
  const auto [ptr, ec] =
      std::from_chars(text.data(), text.data() + text.size(), year);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    return std::nullopt;
  }
  return year;
}

// Converts one data row into a record, or explains why it cannot.
std::variant<AbstractRecord, RowError> ConvertRow(const CsvRow& row,
                                                  const ColumnIndex& index,
                                                  int64_t row_number) {
  auto error = [&](RowErrorReason reason, std::string detail) {
    return RowError{row_number, reason, std::move(detail)};
  };
  const std::pair<const char*, size_t> fields[] = {
      {"journal", index.journal},
      {"title", index.title},
      {"year", index.year},
      {"abstract", index.abstract},
  };
  for (const auto& [name, column] : fields) {
    if (column >= row.size()) {
      return error(RowErrorReason::kMissingField,
                   StrCat("row has no '", name, "' cell"));
    }
    if (!IsValidUtf8(row[column])) {
      return error(RowErrorReason::kEncodingError,
                   StrCat("'", name, "' is not valid UTF-8"));
    }
  }
  for (const auto& [name, column] : {fields[0], fields[1], fields[2]}) {
    if (NormalizeText(row[column]).empty()) {
      return error(RowErrorReason::kMissingField,
                   StrCat("'", name, "' is empty"));
    }
  }
  const auto year = ParseYear(row[index.year]);
  if (!year || *year < kMinYear || *year > kMaxYear) {
    return error(RowErrorReason::kBadYear,
                 StrCat("year '", row[index.year], "' is not an integer in [",
                              kMinYear, ", ", kMaxYear, "]"));
  }
  if (NormalizeText(row[index.abstract]).empty()) {
    return error(RowErrorReason::kEmptyAbstract,
                 "abstract has no visible characters");
  }
  AbstractRecord record;
  record.journal = row[index.journal];
  record.title = row[index.title];
  record.year = *year;
  record.abstract = row[index.abstract];
  return record;
}

struct ParsedTable {
  ColumnIndex index;
  std::vector<CsvRow> rows;  // header removed
};

absl::StatusOr<ParsedTable> ParseTable(std::string_view content,
                                       const ColumnMap& columns) {
  if (content.substr(0, kUtf8Bom.size()) == kUtf8Bom) {
    content.remove_prefix(kUtf8Bom.size());
  }
  auto rows = ParseCsv(content);
  if (!rows.ok()) return rows.status();
  if (rows->empty()) {
    return absl::InvalidArgumentError("CSV has no header row");
  }
  const CsvRow& header = rows->front();
  for (const auto& name : header) {
    if (!IsValidUtf8(name)) {
      return absl::InvalidArgumentError(
          "CSV header is not valid UTF-8; re-encode the file as UTF-8");
    }
  }
  auto index = ResolveColumns(header, columns);
  if (!index.ok()) return index.status();
  ParsedTable table{*index, {}};
  table.rows.assign(std::make_move_iterator(rows->begin() + 1),
                    std::make_move_iterator(rows->end()));
  return table;
}

}  // namespace

std::string_view RowErrorReasonName(RowErrorReason reason) {
  switch (reason) {
    case RowErrorReason::kMissingField:
      return "missing_field";
    case RowErrorReason::kBadYear:
      return "bad_year";
    case RowErrorReason::kEmptyAbstract:
      return "empty_abstract";
    case RowErrorReason::kEncodingError:
      return "encoding_error";
  }
  return "unknown";
}

absl::StatusOr<std::string> ReadFile(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    return absl::NotFoundError(StrCat("no such file: ", path.string()));
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    return absl::PermissionDeniedError(
        StrCat("cannot open for reading: ", path.string()));
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return std::move(buffer).str();
}

absl::Status WriteFile(const std::filesystem::path& path,
                       std::string_view content) {
  std::error_code ec;
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    return absl::PermissionDeniedError(
        StrCat("cannot open for writing: ", path.string()));
  }
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.close();
  if (!out) {
    return absl::DataLossError(StrCat("write failed: ", path.string()));
  }
  return absl::OkStatus();
}

absl::StatusOr<LoadedCorpus> ParseCorpus(std::string_view content,
                                         const ColumnMap& columns) {
  auto table = ParseTable(content, columns);
  if (!table.ok()) return table.status();
  LoadedCorpus corpus;
  corpus.data_rows = static_cast<int64_t>(table->rows.size());
  for (size_t i = 0; i < table->rows.size(); ++i) {
    auto converted =
        ConvertRow(table->rows[i], table->index, static_cast<int64_t>(i) + 1);
    if (auto* record = std::get_if<AbstractRecord>(&converted)) {
      record->record_id = static_cast<int64_t>(corpus.records.size());
      corpus.records.push_back(std::move(*record));
    } else {
      corpus.errors.push_back(std::get<RowError>(std::move(converted)));
    }
  }
  return corpus;
}

absl::StatusOr<LoadedCorpus> LoadCorpus(const std::filesystem::path& path,
                                        const ColumnMap& columns) {
  auto content = ReadFile(path);
  if (!content.ok()) return content.status();
  auto corpus = ParseCorpus(*content, columns);
  if (!corpus.ok()) {
    return absl::Status(corpus.status().code(),
                        StrCat(path.string(), ": ",
                                     corpus.status().message()));
  }
  return corpus;
}

AbstractRecord NormalizeRecord(AbstractRecord record) {
  record.journal = NormalizeText(record.journal);
  record.title = NormalizeText(record.title);
  record.abstract = NormalizeText(record.abstract);
  return record;
}

std::string DedupeKey(std::string_view abstract) {
  return CaseFold(NormalizeText(abstract));
}

DedupeResult Dedupe(std::span<const AbstractRecord> records) {
  DedupeResult result;
  std::unordered_set<std::string> seen;
  seen.reserve(records.size());
  for (const auto& record : records) {
    if (seen.insert(DedupeKey(record.abstract)).second) {
      result.kept.push_back(record);
    } else {
      result.dropped.push_back(record);
    }
  }
  return result;
}

std::string FormatScore(double score) {
  return fmt::sprintf("%.6f", score);
}

absl::Status WriteCorpus(std::span<const AbstractRecord> records,
                         const std::filesystem::path& path,
                         const ColumnMap& columns) {
  std::string out = FormatCsvRow(
      {columns.journal, columns.title, columns.year, columns.abstract});
  for (const auto& r : records) {
    out += FormatCsvRow({r.journal, r.title, StrCat(r.year), r.abstract});
  }
  return WriteFile(path, out);
}

absl::Status WriteScoredCorpus(std::span<const AbstractRecord> records,
                               std::span<const SentimentResult> results,
                               const std::filesystem::path& path,
                               const ColumnMap& columns) {
  std::unordered_map<int64_t, const SentimentResult*> by_id;
  for (const auto& result : results) by_id[result.record_id] = &result;

  std::string out =
      FormatCsvRow({columns.journal, columns.title, columns.year,
                    columns.abstract, std::string(kScoreColumn),
                    std::string(kLabelColumn)});
  for (const auto& r : records) {
    CsvRow row = {r.journal, r.title, StrCat(r.year), r.abstract, "", ""};
    if (auto it = by_id.find(r.record_id); it != by_id.end()) {
      row[4] = FormatScore(it->second->normalized_score);
      row[5] = StrCat(it->second->label);
    }
    out += FormatCsvRow(row);
  }
  return WriteFile(path, out);
}

absl::StatusOr<ScoredCorpus> LoadScoredCorpus(const std::filesystem::path& path,
                                              const ColumnMap& columns) {
  auto content = ReadFile(path);
  if (!content.ok()) return content.status();
  auto table = ParseTable(*content, columns);
  if (!table.ok()) return table.status();
  if (!table->index.score || !table->index.label) {
    return absl::InvalidArgumentError(StrCat(
        path.string(), ": missing ", kScoreColumn, "/", kLabelColumn,
        " columns; run the score stage first"));
  }
  ScoredCorpus corpus;
  for (size_t i = 0; i < table->rows.size(); ++i) {
    const CsvRow& row = table->rows[i];
    const auto row_number = static_cast<int64_t>(i) + 1;
    auto converted = ConvertRow(row, table->index, row_number);
    if (auto* error = std::get_if<RowError>(&converted)) {
      corpus.errors.push_back(std::move(*error));
      continue;
    }
    ScoredRow scored;
    scored.record = std::get<AbstractRecord>(std::move(converted));
    scored.record.record_id = static_cast<int64_t>(corpus.rows.size());
    const size_t score_col = *table->index.score;
    const size_t label_col = *table->index.label;
    const std::string_view score_text =
        score_col < row.size() ? std::string_view(row[score_col]) : "";
    const std::string_view label_text =
        label_col < row.size() ? std::string_view(row[label_col]) : "";
    if (!score_text.empty() && !label_text.empty()) {
      double score = 0;
      int label = 0;
      const auto s = std::from_chars(score_text.data(),
                                     score_text.data() + score_text.size(), score);
      const auto l = std::from_chars(label_text.data(),
                                     label_text.data() + label_text.size(), label);
      if (s.ec != std::errc() || l.ec != std::errc() || label < 1 ||
          label > kNumStars || score < 0.0 || score > 1.0) {
        return absl::InvalidArgumentError(
            StrCat(path.string(), ": data row ", row_number,
                         " has a malformed sentiment score or label"));
      }
      scored.score = score;
      scored.label = label;
    }
    corpus.rows.push_back(std::move(scored));
  }
  return corpus;
}

}  // namespace sentiscope
