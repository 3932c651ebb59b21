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

#ifndef SENTISCOPE_CSV_H_
#define SENTISCOPE_CSV_H_

#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"

namespace sentiscope {

using CsvRow = std::vector<std::string>;

// RFC-4180 parser: comma separated, double-quote quoting with "" escapes,
// CRLF or LF record terminators. Quoted fields may span lines. A trailing
// newline does not produce an empty record; blank lines are skipped.
// Quotes inside an unquoted field are kept literally.
absl::StatusOr<std::vector<CsvRow>> ParseCsv(std::string_view content);

// Quotes a field only when it contains a comma, quote, CR or LF.
std::string EscapeCsvField(std::string_view field);

// One record terminated by "\n".
std::string FormatCsvRow(const CsvRow& row);

}  // namespace sentiscope

#endif  // SENTISCOPE_CSV_H_
