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

// sentiscope: ingest -> score -> analyze -> explain -> validate.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "commands.h"
#include "config.h"

namespace {

namespace fs = std::filesystem;
using sentiscope::cli::PipelineConfig;

struct GlobalFlags {
  std::optional<std::string> config_path;
  std::optional<std::string> output_dir;
  std::optional<int> jobs;
  std::optional<uint64_t> seed;
  bool strict = false;
  std::vector<std::string> overrides;
  bool verbose = false;
  bool quiet = false;
};

struct CommandFlags {
  std::optional<std::string> input;
  std::optional<std::string> backend;
  std::optional<int> year_from;
  std::optional<int> year_to;
  std::optional<std::string> chart_format;
  std::optional<int> bins;
  std::optional<int> top_n;
  std::optional<std::string> llm_mode;
  std::optional<std::string> fixture;
  sentiscope::cli::ExplainFlags explain;
  sentiscope::cli::ValidateFlags validate;
};

void InitLogging(const GlobalFlags& flags) {
  auto logger = spdlog::stderr_color_mt("sentiscope");
  logger->set_pattern("[%H:%M:%S] [%^%l%$] %v");
  logger->set_level(flags.verbose ? spdlog::level::debug
                    : flags.quiet ? spdlog::level::warn
                                  : spdlog::level::info);
  spdlog::set_default_logger(logger);
}

std::string Absolute(const std::string& path) { return fs::absolute(path).lexically_normal().string(); }

absl::StatusOr<PipelineConfig> BuildConfig(const GlobalFlags& global,
                                           const CommandFlags& flags) {
  PipelineConfig config;
  if (global.config_path) {
    auto loaded = sentiscope::cli::LoadConfig(*global.config_path);
    if (!loaded.ok()) return loaded.status();
    config = *std::move(loaded);
  }
  const fs::path cwd = fs::current_path();
  for (const auto& assignment : global.overrides) {
    auto updated = sentiscope::cli::ApplyOverride(std::move(config), assignment, cwd);
    if (!updated.ok()) return updated.status();
    config = *std::move(updated);
  }
  if (global.output_dir) config.output_dir = Absolute(*global.output_dir);
  if (global.jobs) config.jobs = *global.jobs;
  if (global.seed) config.seed = *global.seed;
  if (flags.input) config.input_csv = Absolute(*flags.input);
  if (flags.backend) {
    auto updated = sentiscope::cli::ApplyOverride(std::move(config),
                                                  "backend=" + *flags.backend, cwd);
    if (!updated.ok()) return updated.status();
    config = *std::move(updated);
  }
  if (flags.year_from || flags.year_to) {
    if (!flags.year_from || !flags.year_to) {
      return absl::InvalidArgumentError("--year-from and --year-to go together");
    }
    if (*flags.year_from > *flags.year_to) {
      return absl::InvalidArgumentError("--year-from must not exceed --year-to");
    }
    config.trend_range = std::make_pair(*flags.year_from, *flags.year_to);
  }
  if (flags.chart_format) config.chart_format = *flags.chart_format;
  if (flags.bins) config.histogram_bins = *flags.bins;
  if (flags.top_n) config.top_n_journals = *flags.top_n;
  if (flags.llm_mode) {
    auto updated =
        sentiscope::cli::ApplyOverride(std::move(config), "llm.mode=" + *flags.llm_mode, cwd);
    if (!updated.ok()) return updated.status();
    config = *std::move(updated);
  }
  if (flags.fixture) config.llm.fixture_path = Absolute(*flags.fixture);
  if (config.jobs < 1) return absl::InvalidArgumentError("--jobs must be positive");
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sentiment pipeline for scientific abstracts", "sentiscope"};
  app.set_version_flag("--version", SENTISCOPE_VERSION);
  app.require_subcommand(1);
  app.fallthrough();

  GlobalFlags global;
  CommandFlags flags;
  app.add_option("--config", global.config_path, "YAML pipeline config");
  app.add_option("--output-dir", global.output_dir, "Directory for all handoff files");
  app.add_option("--jobs", global.jobs, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--seed", global.seed, "Seed for sampling");
  app.add_flag("--strict", global.strict, "Fail when any record cannot be processed");
  app.add_option("--set", global.overrides, "Config override, e.g. llm.model=gpt-4o");
  app.add_flag("-v,--verbose", global.verbose, "Debug logging");
  app.add_flag("-q,--quiet", global.quiet, "Warnings and errors only");

  auto* ingest = app.add_subcommand("ingest", "Validate, normalize and dedupe the input CSV");
  ingest->add_option("--input", flags.input, "Input CSV (overrides input_csv)");

  auto* score = app.add_subcommand("score", "Score the cleaned corpus");
  score->add_option("--backend", flags.backend, "lexicon:PATH or transformer:MODEL_ID");

  auto* analyze = app.add_subcommand("analyze", "Histogram, yearly trend and journal stats");
  analyze->add_option("--year-from", flags.year_from, "First year of the trend");
  analyze->add_option("--year-to", flags.year_to, "Last year of the trend");
  analyze->add_option("--chart-format", flags.chart_format, "svg or png")
      ->check(CLI::IsMember({"svg", "png"}));
  analyze->add_option("--bins", flags.bins, "Histogram bins")->check(CLI::PositiveNumber);
  analyze->add_option("--top-n", flags.top_n, "Journals to keep (0 = all)")
      ->check(CLI::NonNegativeNumber);

  auto* explain = app.add_subcommand("explain", "Token attributions for one record");
  explain->add_option("--record-id", flags.explain.record_id, "Row index in cleaned.csv")
      ->required();
  auto* exact = explain->add_flag("--exact", flags.explain.exact, "Enumerate all coalitions");
  explain->add_option("--samples", flags.explain.samples, "Sampled permutations")
      ->excludes(exact);
  explain->add_option("--quantity", flags.explain.quantity,
                      "normalized_score or probability_of_label")
      ->check(CLI::IsMember({"normalized_score", "probability_of_label"}));
  explain->add_option("--backend", flags.backend, "lexicon:PATH or transformer:MODEL_ID");

  auto* validate = app.add_subcommand("validate", "Cross-check labels against an LLM");
  validate->add_option("--sample-size", flags.validate.sample_size, "Records to sample")
      ->check(CLI::PositiveNumber);
  validate->add_flag("--phrases", flags.validate.phrases, "Also ask for subjective phrases");
  validate->add_option("--mode", flags.llm_mode, "live or fixture")
      ->check(CLI::IsMember({"live", "fixture"}));
  validate->add_option("--fixture", flags.fixture, "JSONL fixture for fixture mode");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return sentiscope::cli::kExitUsage;
  }

  InitLogging(global);
  auto config = BuildConfig(global, flags);
  if (!config.ok()) {
    spdlog::error("{}", std::string(config.status().message()));
    return sentiscope::cli::kExitUsage;
  }

  if (ingest->parsed()) return sentiscope::cli::RunIngest(*config, std::cout);
  if (score->parsed()) {
    return sentiscope::cli::RunScore(*config, {.strict = global.strict}, std::cout);
  }
  if (analyze->parsed()) return sentiscope::cli::RunAnalyze(*config, std::cout);
  if (explain->parsed()) return sentiscope::cli::RunExplain(*config, flags.explain, std::cout);
  if (validate->parsed()) {
    return sentiscope::cli::RunValidate(*config, flags.validate, std::cout);
  }
  return sentiscope::cli::kExitUsage;
}
