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

#ifndef STF_TRIALS_H_
#define STF_TRIALS_H_

#include <cstdint>
#include <string>
#include <vector>

#include "stf/synth_corpus.h"

namespace stf {

// TC: target speaker, correct text. TW: target speaker, wrong text.
// IC: impostor, correct text. IW: impostor, wrong text.
enum class TrialType { kTC = 0, kTW = 1, kIC = 2, kIW = 3 };
inline constexpr int kNumTrialTypes = 4;

const char* TrialTypeName(TrialType type);
TrialType ParseTrialType(const std::string& name);

struct Trial {
  std::string model_id;
  std::string test_utt_id;
  bool target = false;
  TrialType type = TrialType::kTC;

  bool operator==(const Trial&) const = default;
};

enum class EnrollMode { kTextDependent, kTextIndependent };

const char* EnrollModeName(EnrollMode mode);
EnrollMode ParseEnrollMode(const std::string& name);

struct ModelSpec {
  std::string model_id;
  int speaker_id = 0;
  std::vector<std::string> utt_ids;

  bool operator==(const ModelSpec&) const = default;
};

struct TrialList {
  std::vector<ModelSpec> models;
  std::vector<Trial> trials;
  // Only set for condition 2.
  std::vector<std::string> adaptation_utt_ids;
};

struct TrialRatio {
  int tc = 1;
  int tw = 3;
  int ic = 3;
  int iw = 3;

  int operator[](TrialType type) const;
  void Validate() const;
};

TrialRatio ParseTrialRatio(const std::string& text);  // "1:3:3:3"
std::string TrialRatioString(const TrialRatio& ratio);

// Enrollment-vs-test matched text. One model per (eval speaker, eval
// phrase) built from the first enroll_repeats repeats; the remaining repeats
// are test utterances.
TrialList GenerateTrialsCondition1(const Corpus& corpus,
                                   const TrialRatio& ratio, uint64_t seed);

inline constexpr int kNumAdaptationUtterances = 10;

// Enrollment text differs from the target phrase. One model per eval
// speaker. Correct-text trials use the target phrase, wrong-text trials use
// phrases outside the enrollment set and the target phrase.
TrialList GenerateTrialsCondition2(const Corpus& corpus, int target_phrase,
                                   EnrollMode mode, uint64_t seed,
                                   const TrialRatio& ratio = {1, 1, 1, 1});

// Text-independent evaluation: same-speaker wrong-text trials count as
// targets.
void RelabelTextIndependent(TrialList* list);

// Lines "model_id test_utt_id target|nontarget TC|TW|IC|IW".
std::string FormatTrials(const std::vector<Trial>& trials);
std::vector<Trial> ParseTrials(const std::string& text, const std::string& name);
// Lines "model_id speaker_id utt_id...".
std::string FormatModels(const std::vector<ModelSpec>& models);
std::vector<ModelSpec> ParseModels(const std::string& text,
                                   const std::string& name);
// One utterance id per line.
std::string FormatIdList(const std::vector<std::string>& ids);
std::vector<std::string> ParseIdList(const std::string& text);

}  // namespace stf

#endif  // STF_TRIALS_H_
