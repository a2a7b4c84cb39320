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

#ifndef STF_SYNTH_CORPUS_H_
#define STF_SYNTH_CORPUS_H_

// Seeded synthetic corpus with explicit speaker and phrase structure.
//
// Frame t of an utterance by speaker s is
//   x_t = A * z_s + B * w_{phone(t)} + noise,
// with z_s one latent per speaker, w_c one latent per phoneme class, and A, B
// corpus-wide random mixing matrices. Every phrase is a fixed phoneme
// sequence framed by silence (class 0); each realisation draws fresh
// per-phone durations and noise.
//
// Splits: train speakers read the training phrases; dev and eval speakers
// read the (disjoint) evaluation phrases. Speaker and phrase ids are dense:
// train speakers come first, then dev, then eval; training phrases come
// before evaluation phrases.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "stf/matrix.h"
#include "stf/phonetic_labels.h"

namespace stf {

struct CorpusConfig {
  int n_speakers = 100;  // training speakers
  int n_phrases = 30;    // training phrases
  int utterances_per_speaker_phrase = 2;
  int n_eval_speakers = 20;
  int n_eval_phrases = 10;
  int eval_repeats = 9;
  int enroll_repeats = 3;  // leading eval repeats reserved for enrollment
  int n_dev_speakers = 10;
  int dev_repeats = 2;
  int feature_dim = 40;
  int num_phonemes = 40;
  int min_phones_per_phrase = 8;
  int max_phones_per_phrase = 12;
  int min_frames_per_phone = 4;
  int max_frames_per_phone = 8;
  int speaker_latent_dim = 32;
  int phoneme_latent_dim = 32;
  double noise_std = 2.0;
  uint64_t seed = 1;

  void Validate() const;
  int total_speakers() const { return n_speakers + n_dev_speakers + n_eval_speakers; }
  int total_phrases() const { return n_phrases + n_eval_phrases; }
  bool operator==(const CorpusConfig&) const = default;
};

void to_json(nlohmann::json& j, const CorpusConfig& c);
void from_json(const nlohmann::json& j, CorpusConfig& c);

enum class Split { kTrain, kDev, kEval };
std::string SplitName(Split split);
Split ParseSplit(const std::string& name);

struct Utterance {
  std::string utt_id;
  int speaker_id = 0;
  int phrase_id = 0;
  int repeat = 0;
  Split split = Split::kTrain;
  Matrix<float> features;  // frames x feature_dim
  PhonemeAlignment alignment;

  int num_frames() const { return features.rows(); }
  bool operator==(const Utterance&) const = default;
};

struct Corpus {
  CorpusConfig config;
  std::vector<std::vector<uint16_t>> phrases;  // phoneme sequence per phrase
  std::vector<Utterance> utterances;

  std::vector<const Utterance*> SplitUtterances(Split split) const;
  // Throws ValidationError for unknown ids.
  const Utterance& Find(const std::string& utt_id) const;
  bool operator==(const Corpus& other) const {
    return config == other.config && phrases == other.phrases &&
           utterances == other.utterances;
  }

 private:
  mutable std::map<std::string, size_t> index_;
};

// Ground-truth generative parameters, exposed for tests.
struct LatentModel {
  Matrix<double> speaker_latents;   // total_speakers x speaker_latent_dim
  Matrix<double> phoneme_latents;   // num_phonemes x phoneme_latent_dim
  Matrix<double> speaker_mixing;    // feature_dim x speaker_latent_dim (A)
  Matrix<double> phoneme_mixing;    // feature_dim x phoneme_latent_dim (B)
};

// Pure function of config (seed included).
Corpus GenerateCorpus(const CorpusConfig& config, LatentModel* truth = nullptr);

struct TrainingSegment {
  Matrix<float> features;
  int speaker_label = 0;  // dense index over training speakers
  SegmentPhonemeDistribution target;
  std::string utt_id;
  int start = 0;
};

struct CropResult {
  std::vector<TrainingSegment> segments;
  int skipped = 0;  // utterances shorter than min_frames
  int num_speakers = 0;
};

// One crop per training utterance. Crop length is uniform on
// [min_frames, min(max_frames, N)] and the offset uniform over valid starts;
// labels come from the cropped alignment.
CropResult CropTrainingSegments(const Corpus& corpus, int min_frames,
                                int max_frames, uint64_t seed);

// Directory layout: manifest.json + feats/<utt_id>.fsvf.
void WriteCorpus(const Corpus& corpus, const std::string& directory);
Corpus ReadCorpus(const std::string& directory);

// FSVF: "FSVF", version byte 1, u32 N, u32 feature_dim, u32 C, N x u16
// phoneme indices, N x feature_dim float32 (row-major), all little-endian.
std::string EncodeFeatureFile(const Utterance& utt, int num_phonemes);
void DecodeFeatureFile(const std::string& bytes, const std::string& name,
                       int expected_dim, int expected_phonemes, Utterance* utt);

}  // namespace stf

#endif  // STF_SYNTH_CORPUS_H_
