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

// Pipeline configuration for the sentiscope command line. Stored as YAML;
// relative paths are resolved against the directory of the config file.

#ifndef SENTISCOPE_TOOLS_CONFIG_H_
#define SENTISCOPE_TOOLS_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "absl/status/statusor.h"
#include "sentiscope/corpus_io.h"

namespace sentiscope::cli {

enum class LlmMode { kLive, kFixture };

struct LlmConfig {
  std::string endpoint = "https://api.openai.com/v1";
  std::string model = "gpt-3.5-turbo";
  std::filesystem::path cache_path = "llm_cache.jsonl";
  LlmMode mode = LlmMode::kLive;
  std::filesystem::path fixture_path;
  std::string token_env = "SENTISCOPE_LLM_TOKEN";
  int64_t sample_size = 10;
  std::optional<std::string> sentiment_prompt;
  std::optional<std::string> subjectivity_prompt;

  bool operator==(const LlmConfig&) const = default;
};

struct PipelineConfig {
  std::filesystem::path input_csv;
  ColumnMap columns;
  std::string backend = "transformer:nlptown/bert-base-multilingual-uncased-sentiment";
  int64_t chunk_budget = 512;
  int histogram_bins = 20;
  std::optional<std::pair<int, int>> trend_range;
  int top_n_journals = 20;
  std::string chart_format = "svg";
  LlmConfig llm;
  std::filesystem::path output_dir = "out";
  uint64_t seed = 0;
  int jobs = 1;

  bool operator==(const PipelineConfig&) const = default;
};

// Applies the keys present in `yaml` on top of `base`. Unknown keys and
// ill-typed values are InvalidArgument.
absl::StatusOr<PipelineConfig> ParseConfig(std::string_view yaml,
                                           const std::filesystem::path& base_dir,
                                           PipelineConfig base = {});
absl::StatusOr<PipelineConfig> LoadConfig(const std::filesystem::path& path);

// Every field, in a stable order; ParseConfig(SerializeConfig(c)) == c.
std::string SerializeConfig(const PipelineConfig& config);

// "llm.mode=fixture" style override; the value is read as YAML.
absl::StatusOr<PipelineConfig> ApplyOverride(PipelineConfig config,
                                             std::string_view assignment,
                                             const std::filesystem::path& base_dir);

std::string_view LlmModeName(LlmMode mode);

}  // namespace sentiscope::cli

#endif  // SENTISCOPE_TOOLS_CONFIG_H_
