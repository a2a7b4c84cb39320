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

#ifndef STF_EVALUATION_H_
#define STF_EVALUATION_H_

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "stf/checkpoint.h"
#include "stf/metrics.h"
#include "stf/network.h"
#include "stf/synth_corpus.h"
#include "stf/trials.h"

namespace stf {

enum class ExtractMode { kSpk, kSpkText };

// spk: speaker embeddings on both sides. spk_text: combined embeddings with
// each utterance's own text embedding. spk_adapt_text: enrollment side uses
// a text embedding computed from adaptation utterances; the test side keeps
// its own.
enum class ScoringMode { kSpk, kSpkText, kSpkAdaptText };

const char* ScoringModeName(ScoringMode mode);
ScoringMode ParseScoringMode(const std::string& name);

enum class AdaptationSource { kNone, kGenuine, kAdapted };

const char* AdaptationSourceName(AdaptationSource source);

// Full utterance, running batch-norm statistics. A baseline network only
// supports kSpk (ValidationError otherwise).
Embedding ExtractEmbedding(const AnyNet& net, const Utterance& utt,
                           ExtractMode mode);
// Parallel over utterances; equals calling ExtractEmbedding in a loop.
std::vector<Embedding> ExtractEmbeddings(
    const AnyNet& net, std::span<const Utterance* const> utts, ExtractMode mode);

Embedding ExtractTextEmbedding(const FactorizationNet<float>& net,
                               const Utterance& utt);

// Mean of the utterances' text embeddings. DomainError on an empty list,
// ValidationError when the utterances do not share one phrase.
Embedding AdaptationTextEmbedding(const FactorizationNet<float>& net,
                                  std::span<const Utterance* const> utts);

struct EnrollmentModel {
  std::string model_id;
  int speaker_id = 0;
  std::vector<std::string> utt_ids;
  Embedding embedding;  // unit length
  EnrollMode enrollment_mode = EnrollMode::kTextDependent;
  AdaptationSource adaptation_source = AdaptationSource::kNone;
};

// Mean of the per-utterance embeddings, then length-normalised.
EnrollmentModel Enroll(const AnyNet& net, const ModelSpec& spec,
                       std::span<const Utterance* const> utts, ScoringMode mode,
                       const std::optional<Embedding>& adaptation = std::nullopt);

// Embedding average followed by L2 normalisation; DomainError on an empty
// list or a zero mean.
Embedding MeanNormalized(std::span<const Embedding> embeddings);

double CosineScore(const Embedding& a, const Embedding& b);

// Scores every trial against models built from 'models'. Each utterance goes
// through the network once. adaptation_utt_ids is required (nonempty) for
// kSpkAdaptText.
std::vector<double> ScoreTrials(const AnyNet& net, const Corpus& corpus,
                                const std::vector<ModelSpec>& models,
                                const std::vector<Trial>& trials,
                                ScoringMode mode,
                                const std::vector<std::string>& adaptation_utt_ids = {});

// Per wrong type (TW, IC, IW): EER of TC trials as targets against that type
// as nontargets, whatever the trial labels say. Types without trials are
// left out and mentioned in notes.
std::map<TrialType, double> BreakdownByCondition(
    const std::vector<Trial>& trials, std::span<const double> scores,
    std::vector<std::string>* notes = nullptr);

struct ScoreReport {
  std::vector<double> scores;
  EerResult eer;
  DcfResult min_dcf;
  std::map<TrialType, double> breakdown;
  std::map<TrialType, long> n_trials;
  std::vector<std::string> notes;
};

ScoreReport BuildReport(const std::vector<Trial>& trials,
                        std::vector<double> scores, const MetricConfig& config);
nlohmann::json ReportToJson(const ScoreReport& report);

struct ScoreLine {
  std::string model_id;
  std::string test_utt_id;
  double score = 0.0;
};

// Lines "model_id test_utt_id score".
std::string FormatScores(const std::vector<Trial>& trials,
                         std::span<const double> scores);
std::vector<ScoreLine> ParseScores(const std::string& text,
                                   const std::string& name);
// Orders the scores like the trials; ValidationError on a missing or
// duplicated (model, test) pair.
std::vector<double> AlignScores(const std::vector<Trial>& trials,
                                const std::vector<ScoreLine>& lines,
                                const std::string& name);

}  // namespace stf

#endif  // STF_EVALUATION_H_
