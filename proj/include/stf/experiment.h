// Copyright (c) 2026 The stfnet Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef STF_EXPERIMENT_H_
#define STF_EXPERIMENT_H_

// Pipeline stages behind the stfnet command line tool.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "stf/evaluation.h"
#include "stf/metrics.h"
#include "stf/network.h"
#include "stf/synth_corpus.h"
#include "stf/training.h"
#include "stf/trials.h"

namespace stf {

struct ExperimentConfig {
  CorpusConfig corpus;
  NetworkConfig network;
  TrainingConfig training;
  MetricConfig metric;
  TrialRatio ratio;
  std::vector<ScoringMode> modes = {ScoringMode::kSpk, ScoringMode::kSpkText,
                                    ScoringMode::kSpkAdaptText};
  std::string out_dir;
  uint64_t seed = 1;

  // Copies seed into the per-stage configs.
  void PropagateSeed();
  void Validate() const;
};

void to_json(nlohmann::json& j, const ExperimentConfig& c);
// Unknown keys are rejected so that typos do not silently fall back to
// defaults.
ExperimentConfig ParseExperimentConfig(const nlohmann::json& j,
                                       const std::string& name);
// Empty path gives the defaults.
ExperimentConfig LoadExperimentConfig(const std::string& path);

void CmdGenCorpus(const ExperimentConfig& config, const std::string& out_dir);

enum class ModelKind { kFactorization, kBaseline };
ModelKind ParseModelKind(const std::string& name);

struct TrainOptions {
  std::string corpus_dir;
  std::string checkpoint;
  std::string log_path;  // defaults to <checkpoint>.log.jsonl
  ModelKind model = ModelKind::kFactorization;
};

// Epoch lines also go to progress when it is not null.
void CmdTrain(const ExperimentConfig& config, const TrainOptions& options,
              std::ostream* progress);

struct TrialsOptions {
  std::string corpus_dir;
  std::string out_dir;
  int condition = 1;
  int target_phrase = -1;
  EnrollMode enroll_mode = EnrollMode::kTextDependent;
  bool text_independent = false;  // relabel TW as target
};

// Writes trials.txt, models.txt, info.json and, for condition 2, adapt.txt
// into out_dir.
void CmdTrials(const ExperimentConfig& config, const TrialsOptions& options);

struct ScoreOptions {
  std::string checkpoint;
  std::string corpus_dir;
  std::string trials_dir;
  std::string out;
  ScoringMode mode = ScoringMode::kSpk;
};

void CmdScore(const ExperimentConfig& config, const ScoreOptions& options);

struct ReportSystem {
  std::string name;
  std::string trials_dir;
  std::string scores;
};

// One system gives the flat report object; several give {"systems": [...],
// "mean": {...}}. The table is written to table when not null.
nlohmann::json CmdReport(const ExperimentConfig& config,
                         const std::vector<ReportSystem>& systems,
                         const std::string& out, std::ostream* table);

}  // namespace stf

#endif  // STF_EXPERIMENT_H_
