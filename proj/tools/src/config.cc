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

#include "config.h"

#include <algorithm>
#include <initializer_list>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

namespace sentiscope::cli {
namespace {

namespace fs = std::filesystem;

constexpr std::string_view kLexiconPrefix = "lexicon:";

absl::Status Invalid(std::string_view key, std::string_view what) {
  return absl::InvalidArgumentError(fmt::format("config key '{}': {}", key, what));
}

absl::Status CheckKeys(const YAML::Node& node, std::string_view where,
                       std::initializer_list<std::string_view> allowed) {
  if (!node.IsMap()) return Invalid(where, "expected a mapping");
  for (const auto& entry : node) {
    const std::string key = entry.first.as<std::string>();
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      return absl::InvalidArgumentError(fmt::format(
          "unknown config key '{}{}'", where.empty() ? "" : std::string(where) + ".", key));
    }
  }
  return absl::OkStatus();
}

fs::path Resolve(const fs::path& base_dir, const fs::path& path) {
  if (path.empty() || path.is_absolute()) return path;
  return (base_dir / path).lexically_normal();
}

std::string ResolveBackend(const fs::path& base_dir, std::string spec) {
  if (!spec.starts_with(kLexiconPrefix)) return spec;
  const fs::path lexicon = spec.substr(kLexiconPrefix.size());
  return std::string(kLexiconPrefix) + Resolve(base_dir, lexicon).string();
}

template <typename T>
absl::Status Read(const YAML::Node& parent, const char* key, std::string_view where,
                  T& out) {
  const YAML::Node node = parent[key];
  if (!node) return absl::OkStatus();
  try {
    out = node.as<T>();
  } catch (const YAML::Exception&) {
    return Invalid(where.empty() ? std::string(key) : fmt::format("{}.{}", where, key),
                   "value has the wrong type");
  }
  return absl::OkStatus();
}

absl::Status ReadPath(const YAML::Node& parent, const char* key, std::string_view where,
                      const fs::path& base_dir, fs::path& out) {
  std::string text;
  bool present = static_cast<bool>(parent[key]);
  if (auto status = Read(parent, key, where, text); !status.ok()) return status;
  if (present) out = Resolve(base_dir, text);
  return absl::OkStatus();
}

absl::Status ApplyNode(const YAML::Node& root, const fs::path& base_dir,
                       PipelineConfig& config) {
  if (!root || root.IsNull()) return absl::OkStatus();
  if (auto s = CheckKeys(root, "",
                         {"input_csv", "columns", "backend", "chunk_budget",
                          "histogram_bins", "trend_range", "top_n_journals",
                          "chart_format", "llm", "output_dir", "seed", "jobs"});
      !s.ok()) {
    return s;
  }
  absl::Status status;
  auto chain = [&status](absl::Status next) {
    if (status.ok()) status = std::move(next);
  };
  chain(ReadPath(root, "input_csv", "", base_dir, config.input_csv));
  if (const YAML::Node columns = root["columns"]) {
    chain(CheckKeys(columns, "columns", {"journal", "title", "year", "abstract"}));
    chain(Read(columns, "journal", "columns", config.columns.journal));
    chain(Read(columns, "title", "columns", config.columns.title));
    chain(Read(columns, "year", "columns", config.columns.year));
    chain(Read(columns, "abstract", "columns", config.columns.abstract));
  }
  if (root["backend"]) {
    std::string backend;
    chain(Read(root, "backend", "", backend));
    config.backend = ResolveBackend(base_dir, backend);
  }
  chain(Read(root, "chunk_budget", "", config.chunk_budget));
  chain(Read(root, "histogram_bins", "", config.histogram_bins));
  if (const YAML::Node range = root["trend_range"]) {
    if (range.IsNull()) {
      config.trend_range.reset();
    } else if (!range.IsSequence() || range.size() != 2) {
      chain(Invalid("trend_range", "expected [year_from, year_to]"));
    } else {
      std::vector<int> years;
      chain(Read(root, "trend_range", "", years));
      if (years.size() == 2) config.trend_range = std::make_pair(years[0], years[1]);
    }
  }
  chain(Read(root, "top_n_journals", "", config.top_n_journals));
  chain(Read(root, "chart_format", "", config.chart_format));
  chain(ReadPath(root, "output_dir", "", base_dir, config.output_dir));
  chain(Read(root, "seed", "", config.seed));
  chain(Read(root, "jobs", "", config.jobs));

  if (const YAML::Node llm = root["llm"]) {
    chain(CheckKeys(llm, "llm",
                    {"endpoint", "model", "cache_path", "mode", "fixture_path",
                     "token_env", "sample_size", "prompts"}));
    if (!status.ok()) return status;
    chain(Read(llm, "endpoint", "llm", config.llm.endpoint));
    chain(Read(llm, "model", "llm", config.llm.model));
    chain(ReadPath(llm, "cache_path", "llm", base_dir, config.llm.cache_path));
    if (llm["mode"]) {
      std::string mode;
      chain(Read(llm, "mode", "llm", mode));
      if (mode == "live") {
        config.llm.mode = LlmMode::kLive;
      } else if (mode == "fixture") {
        config.llm.mode = LlmMode::kFixture;
      } else {
        chain(Invalid("llm.mode", "must be live or fixture"));
      }
    }
    chain(ReadPath(llm, "fixture_path", "llm", base_dir, config.llm.fixture_path));
    chain(Read(llm, "token_env", "llm", config.llm.token_env));
    chain(Read(llm, "sample_size", "llm", config.llm.sample_size));
    if (const YAML::Node prompts = llm["prompts"]) {
      chain(CheckKeys(prompts, "llm.prompts", {"sentiment_1_to_5", "subjectivity_phrases"}));
      if (prompts["sentiment_1_to_5"]) {
        std::string text;
        chain(Read(prompts, "sentiment_1_to_5", "llm.prompts", text));
        config.llm.sentiment_prompt = text;
      }
      if (prompts["subjectivity_phrases"]) {
        std::string text;
        chain(Read(prompts, "subjectivity_phrases", "llm.prompts", text));
        config.llm.subjectivity_prompt = text;
      }
    }
  }
  return status;
}

absl::Status Validate(const PipelineConfig& config) {
  if (config.chunk_budget < 3) return Invalid("chunk_budget", "must be at least 3");
  if (config.histogram_bins < 1) return Invalid("histogram_bins", "must be positive");
  if (config.top_n_journals < 0) return Invalid("top_n_journals", "must be >= 0");
  if (config.jobs < 1) return Invalid("jobs", "must be positive");
  if (config.chart_format != "svg" && config.chart_format != "png") {
    return Invalid("chart_format", "must be svg or png");
  }
  if (config.trend_range && config.trend_range->first > config.trend_range->second) {
    return Invalid("trend_range", "year_from must not exceed year_to");
  }
  if (config.llm.sample_size < 1) return Invalid("llm.sample_size", "must be positive");
  return absl::OkStatus();
}

// Literal block for text ending in exactly one newline, else double-quoted.
void EmitPrompt(YAML::Emitter& out, const std::string& text) {
  const bool literal_safe = text.ends_with('\n') && !text.ends_with("\n\n") &&
                            !text.starts_with(' ') &&
                            text.find_first_of("\r\t") == std::string::npos;
  out << (literal_safe ? YAML::Literal : YAML::DoubleQuoted) << text;
}

}  // namespace

std::string_view LlmModeName(LlmMode mode) {
  return mode == LlmMode::kLive ? "live" : "fixture";
}

absl::StatusOr<PipelineConfig> ParseConfig(std::string_view yaml,
                                           const fs::path& base_dir,
                                           PipelineConfig base) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(yaml));
  } catch (const YAML::Exception& e) {
    return absl::InvalidArgumentError(fmt::format("config is not valid YAML: {}", e.what()));
  }
  if (auto status = ApplyNode(root, fs::absolute(base_dir), base); !status.ok()) {
    return status;
  }
  if (auto status = Validate(base); !status.ok()) return status;
  return base;
}

absl::StatusOr<PipelineConfig> LoadConfig(const fs::path& path) {
  auto text = ReadFile(path);
  if (!text.ok()) return absl::InvalidArgumentError(std::string(text.status().message()));
  auto config = ParseConfig(*text, fs::absolute(path).parent_path());
  if (!config.ok()) {
    return absl::InvalidArgumentError(
        fmt::format("{}: {}", path.string(), std::string(config.status().message())));
  }
  return config;
}

std::string SerializeConfig(const PipelineConfig& config) {
  YAML::Emitter out;
  out << YAML::BeginMap;
  out << YAML::Key << "input_csv" << YAML::Value << config.input_csv.string();
  out << YAML::Key << "columns" << YAML::Value << YAML::BeginMap
      << YAML::Key << "journal" << YAML::Value << config.columns.journal
      << YAML::Key << "title" << YAML::Value << config.columns.title
      << YAML::Key << "year" << YAML::Value << config.columns.year
      << YAML::Key << "abstract" << YAML::Value << config.columns.abstract
      << YAML::EndMap;
  out << YAML::Key << "backend" << YAML::Value << config.backend;
  out << YAML::Key << "chunk_budget" << YAML::Value << config.chunk_budget;
  out << YAML::Key << "histogram_bins" << YAML::Value << config.histogram_bins;
  if (config.trend_range) {
    out << YAML::Key << "trend_range" << YAML::Value << YAML::Flow << YAML::BeginSeq
        << config.trend_range->first << config.trend_range->second << YAML::EndSeq;
  }
  out << YAML::Key << "top_n_journals" << YAML::Value << config.top_n_journals;
  out << YAML::Key << "chart_format" << YAML::Value << config.chart_format;
  out << YAML::Key << "output_dir" << YAML::Value << config.output_dir.string();
  out << YAML::Key << "seed" << YAML::Value << config.seed;
  out << YAML::Key << "jobs" << YAML::Value << config.jobs;

  const LlmConfig& llm = config.llm;
  out << YAML::Key << "llm" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "endpoint" << YAML::Value << llm.endpoint;
  out << YAML::Key << "model" << YAML::Value << llm.model;
  out << YAML::Key << "cache_path" << YAML::Value << llm.cache_path.string();
  out << YAML::Key << "mode" << YAML::Value << std::string(LlmModeName(llm.mode));
  out << YAML::Key << "fixture_path" << YAML::Value << llm.fixture_path.string();
  out << YAML::Key << "token_env" << YAML::Value << llm.token_env;
  out << YAML::Key << "sample_size" << YAML::Value << llm.sample_size;
  if (llm.sentiment_prompt || llm.subjectivity_prompt) {
    out << YAML::Key << "prompts" << YAML::Value << YAML::BeginMap;
    if (llm.sentiment_prompt) {
      out << YAML::Key << "sentiment_1_to_5" << YAML::Value;
      EmitPrompt(out, *llm.sentiment_prompt);
    }
    if (llm.subjectivity_prompt) {
      out << YAML::Key << "subjectivity_phrases" << YAML::Value;
      EmitPrompt(out, *llm.subjectivity_prompt);
    }
    out << YAML::EndMap;
  }
  out << YAML::EndMap;
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

absl::StatusOr<PipelineConfig> ApplyOverride(PipelineConfig config,
                                             std::string_view assignment,
                                             const fs::path& base_dir) {
  const size_t eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    return absl::InvalidArgumentError(
        fmt::format("override '{}' must look like key=value", assignment));
  }
  const std::string key(assignment.substr(0, eq));
  const std::string value(assignment.substr(eq + 1));
  YAML::Node leaf;
  try {
    leaf = value.empty() ? YAML::Node(std::string()) : YAML::Load(value);
  } catch (const YAML::Exception& e) {
    return absl::InvalidArgumentError(
        fmt::format("override '{}': value is not valid YAML: {}", assignment, e.what()));
  }
  YAML::Node root(YAML::NodeType::Map);
  YAML::Node cursor = root;
  size_t start = 0;
  while (true) {
    const size_t dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? dot : dot - start);
    if (dot == std::string::npos) {
      cursor[part] = leaf;
      break;
    }
    YAML::Node child(YAML::NodeType::Map);
    cursor[part] = child;
    cursor.reset(child);
    start = dot + 1;
  }
  YAML::Emitter emitter;
  emitter << root;
  return ParseConfig(emitter.c_str(), base_dir, std::move(config));
}

}  // namespace sentiscope::cli
