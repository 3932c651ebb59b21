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

#ifndef SENTISCOPE_TOOLS_COMMANDS_H_
#define SENTISCOPE_TOOLS_COMMANDS_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>

#include "config.h"

namespace sentiscope::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

// Handoff files inside output_dir.
inline constexpr char kCleanedCsv[] = "cleaned.csv";
inline constexpr char kRowErrorsJson[] = "row_errors.json";
inline constexpr char kScoredCsv[] = "scored.csv";
inline constexpr char kAnalysisDir[] = "analysis";
inline constexpr char kExplainDir[] = "explain";
inline constexpr char kValidationDir[] = "validation";

struct ScoreFlags {
  bool strict = false;
};

struct ExplainFlags {
  std::optional<int64_t> record_id;
  bool exact = false;
  std::optional<int64_t> samples;
  std::string quantity = "normalized_score";
};

struct ValidateFlags {
  std::optional<int64_t> sample_size;
  bool phrases = false;
};

// Each command prints a JSON summary to `out` and returns an exit code.
int RunIngest(const PipelineConfig& config, std::ostream& out);
int RunScore(const PipelineConfig& config, const ScoreFlags& flags, std::ostream& out);
int RunAnalyze(const PipelineConfig& config, std::ostream& out);
int RunExplain(const PipelineConfig& config, const ExplainFlags& flags, std::ostream& out);
int RunValidate(const PipelineConfig& config, const ValidateFlags& flags,
                std::ostream& out);

}  // namespace sentiscope::cli

#endif  // SENTISCOPE_TOOLS_COMMANDS_H_
