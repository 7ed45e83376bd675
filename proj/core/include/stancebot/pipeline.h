/*
 * Copyright 2026 The Stancebot Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef STANCEBOT_PIPELINE_H_
#define STANCEBOT_PIPELINE_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <nlohmann/json.hpp>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stancebot/anomaly.h"
#include "stancebot/botcrit.h"
#include "stancebot/classifier.h"
#include "stancebot/features.h"
#include "stancebot/netcomm.h"
#include "stancebot/nullmodel.h"
#include "stancebot/seeding.h"
#include "stancebot/synth.h"

namespace stancebot {

// Failure inside a named pipeline stage.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& message)
      : Error(stage + ": " + message), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

struct PipelineConfig {
  std::uint64_t seed = 0;
  std::filesystem::path input;  // empty: use the synth stage output
  std::filesystem::path output;
  std::optional<DateWindow> window;

  SeedLexicon lexicon;
  std::vector<ManualLabel> overrides;
  BlockOptions features;
  GbtParams classifier;
  double threshold = 0.55;
  double log_odds_alpha = 0.5;
  std::size_t top_terms = 50;
  IsolationForestParams forest;
  GroupParams groups;
  BotParams bots;
  EnvelopeParams null_model;
  SbmParams network;
  ProfileParams profiles;
  std::optional<SynthSpec> synth;

  // Canonical JSON of the effective configuration (absolute paths, final
  // seed). Its FNV-1a hash tags every artifact.
  nlohmann::json canonical;
  std::uint64_t hash() const;

  // Relative paths resolve against base_dir. Throws InvalidArgument on any
  // missing or malformed field.
  static PipelineConfig from_json(const nlohmann::json& j,
                                  const std::filesystem::path& base_dir,
                                  std::optional<std::uint64_t> seed_override =
                                      std::nullopt);
  static PipelineConfig load(const std::filesystem::path& path,
                             std::optional<std::uint64_t> seed_override =
                                 std::nullopt);
};

// synth, ingest, seed, featurize, train, predict, associate, anomaly,
// nullmodel, botflag, network, report, evaluate
std::span<const std::string_view> stage_names();

// Upstream stages whose artifacts `stage` reads.
std::vector<std::string_view> stage_dependencies(std::string_view stage,
                                                 const PipelineConfig& config);

// Comma-separated list or "all"; returned in canonical order. Throws
// InvalidArgument for unknown names.
std::vector<std::string> parse_stage_list(std::string_view text,
                                          const PipelineConfig& config);

using LogFn = std::function<void(std::string_view)>;

// Runs one stage. Artifacts go to <output>/<stage>/ and a manifest to
// <output>/manifests/<stage>.json. Throws StageError.
void run_stage(const PipelineConfig& config, std::string_view stage,
               const LogFn& log = {});

// Checks the output directory for manifests written under another config,
// then runs the stages in order. Throws StageError.
void run_pipeline(const PipelineConfig& config,
                  std::span<const std::string> stages, const LogFn& log = {});

}  // namespace stancebot

#endif  // STANCEBOT_PIPELINE_H_
