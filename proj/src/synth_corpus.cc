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

#include "stf/synth_corpus.h"

#include <cmath>
#include <cstdio>
#include <random>
#include <set>

#include "stf/error.h"

namespace stf {

void CorpusConfig::Validate() const {
  auto fail = [](const std::string& msg) {
    throw ValidationError("corpus config: " + msg);
  };
  for (int v : {n_speakers, n_phrases, utterances_per_speaker_phrase,
                n_eval_speakers, n_eval_phrases, eval_repeats, n_dev_speakers,
                dev_repeats, feature_dim, min_phones_per_phrase,
                min_frames_per_phone, speaker_latent_dim, phoneme_latent_dim}) {
    if (v < 1) fail("all counts must be positive");
  }
  if (enroll_repeats < 1 || enroll_repeats >= eval_repeats) {
    fail("enroll_repeats must be in [1, eval_repeats)");
  }
  if (num_phonemes < 2) fail("num_phonemes must be at least 2");
  if (num_phonemes > 65536) fail("num_phonemes must fit in 16 bits");
  if (max_phones_per_phrase < min_phones_per_phrase) {
    fail("max_phones_per_phrase < min_phones_per_phrase");
  }
  if (max_frames_per_phone < min_frames_per_phone) {
    fail("max_frames_per_phone < min_frames_per_phone");
  }
  if (!(noise_std >= 0.0)) fail("noise_std must be non-negative");
}

void to_json(nlohmann::json& j, const CorpusConfig& c) {
  j = nlohmann::json{
      {"n_speakers", c.n_speakers},
      {"n_phrases", c.n_phrases},
      {"utterances_per_speaker_phrase", c.utterances_per_speaker_phrase},
      {"n_eval_speakers", c.n_eval_speakers},
      {"n_eval_phrases", c.n_eval_phrases},
      {"eval_repeats", c.eval_repeats},
      {"enroll_repeats", c.enroll_repeats},
      {"n_dev_speakers", c.n_dev_speakers},
      {"dev_repeats", c.dev_repeats},
      {"feature_dim", c.feature_dim},
      {"num_phonemes", c.num_phonemes},
      {"min_phones_per_phrase", c.min_phones_per_phrase},
      {"max_phones_per_phrase", c.max_phones_per_phrase},
      {"min_frames_per_phone", c.min_frames_per_phone},
      {"max_frames_per_phone", c.max_frames_per_phone},
      {"speaker_latent_dim", c.speaker_latent_dim},
      {"phoneme_latent_dim", c.phoneme_latent_dim},
      {"noise_std", c.noise_std},
      {"seed", c.seed}};
}

void from_json(const nlohmann::json& j, CorpusConfig& c) {
  const CorpusConfig d;
#define STF_FIELD(name) c.name = j.value(#name, d.name)
  STF_FIELD(n_speakers);
  STF_FIELD(n_phrases);
  STF_FIELD(utterances_per_speaker_phrase);
  STF_FIELD(n_eval_speakers);
  STF_FIELD(n_eval_phrases);
  STF_FIELD(eval_repeats);
  STF_FIELD(enroll_repeats);
  STF_FIELD(n_dev_speakers);
  STF_FIELD(dev_repeats);
  STF_FIELD(feature_dim);
  STF_FIELD(num_phonemes);
  STF_FIELD(min_phones_per_phrase);
  STF_FIELD(max_phones_per_phrase);
  STF_FIELD(min_frames_per_phone);
  STF_FIELD(max_frames_per_phone);
  STF_FIELD(speaker_latent_dim);
  STF_FIELD(phoneme_latent_dim);
  STF_FIELD(noise_std);
  STF_FIELD(seed);
#undef STF_FIELD
}

std::string SplitName(Split split) {
  switch (split) {
    case Split::kTrain:
      return "train";
    case Split::kDev:
      return "dev";
    case Split::kEval:
      return "eval";
  }
  return "unknown";
}

Split ParseSplit(const std::string& name) {
  if (name == "train") return Split::kTrain;
  if (name == "dev") return Split::kDev;
  if (name == "eval") return Split::kEval;
  throw FormatError("unknown split '" + name + "'");
}

std::vector<const Utterance*> Corpus::SplitUtterances(Split split) const {
  std::vector<const Utterance*> out;
  for (const auto& utt : utterances) {
    if (utt.split == split) out.push_back(&utt);
  }
  return out;
}

const Utterance& Corpus::Find(const std::string& utt_id) const {
  if (index_.size() != utterances.size()) {
    index_.clear();
    for (size_t i = 0; i < utterances.size(); ++i) {
      index_[utterances[i].utt_id] = i;
    }
  }
  auto it = index_.find(utt_id);
  if (it == index_.end()) {
    throw ValidationError("unknown utterance id '" + utt_id + "'");
  }
  return utterances[it->second];
}

namespace {

Matrix<double> NormalMatrix(int rows, int cols, double stddev,
                            std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, stddev);
  Matrix<double> m(rows, cols);
  for (double& v : m.values()) v = normal(rng);
  return m;
}

std::string MakeUttId(Split split, int speaker, int phrase, int repeat) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s_s%04d_p%03d_r%02d",
                SplitName(split).c_str(), speaker, phrase, repeat);
  return buf;
}

// Projects latents through the mixing matrices once so frames are sums of
// precomputed rows.
Matrix<double> MixRows(const Matrix<double>& latents,
                       const Matrix<double>& mixing) {
  Matrix<double> out(latents.rows(), mixing.rows());
  for (int r = 0; r < latents.rows(); ++r) {
    for (int f = 0; f < mixing.rows(); ++f) {
      double acc = 0.0;
      for (int k = 0; k < mixing.cols(); ++k) acc += mixing(f, k) * latents(r, k);
      out(r, f) = acc;
    }
  }
  return out;
}

}  // namespace

Corpus GenerateCorpus(const CorpusConfig& config, LatentModel* truth) {
  config.Validate();
  std::mt19937_64 rng(config.seed);

  LatentModel model;
  model.speaker_latents =
      NormalMatrix(config.total_speakers(), config.speaker_latent_dim, 1.0, rng);
  model.phoneme_latents =
      NormalMatrix(config.num_phonemes, config.phoneme_latent_dim, 1.0, rng);
  // Scaled so each mixed component has unit variance per feature dimension.
  model.speaker_mixing =
      NormalMatrix(config.feature_dim, config.speaker_latent_dim,
                   1.0 / std::sqrt(double(config.speaker_latent_dim)), rng);
  model.phoneme_mixing =
      NormalMatrix(config.feature_dim, config.phoneme_latent_dim,
                   1.0 / std::sqrt(double(config.phoneme_latent_dim)), rng);

  Corpus corpus;
  corpus.config = config;
  std::uniform_int_distribution<int> phrase_len(config.min_phones_per_phrase,
                                                config.max_phones_per_phrase);
  for (int p = 0; p < config.total_phrases(); ++p) {
    std::vector<uint16_t> seq{0};
    const int len = phrase_len(rng);
    if (config.num_phonemes > 1) {
      std::uniform_int_distribution<int> phone(1, config.num_phonemes - 1);
      for (int i = 0; i < len; ++i) {
        int c = phone(rng);
        while (config.num_phonemes > 2 && c == seq.back()) c = phone(rng);
        seq.push_back(static_cast<uint16_t>(c));
      }
    }
    seq.push_back(0);
    corpus.phrases.push_back(std::move(seq));
  }

  const Matrix<double> speaker_part =
      MixRows(model.speaker_latents, model.speaker_mixing);
  const Matrix<double> phoneme_part =
      MixRows(model.phoneme_latents, model.phoneme_mixing);

  std::uniform_int_distribution<int> duration(config.min_frames_per_phone,
                                              config.max_frames_per_phone);
  std::normal_distribution<double> noise(0.0, 1.0);
  auto realise = [&](Split split, int speaker, int phrase, int repeat) {
    Utterance utt;
    utt.utt_id = MakeUttId(split, speaker, phrase, repeat);
    utt.speaker_id = speaker;
    utt.phrase_id = phrase;
    utt.repeat = repeat;
    utt.split = split;
    for (uint16_t c : corpus.phrases[phrase]) {
      const int frames = duration(rng);
      for (int i = 0; i < frames; ++i) utt.alignment.frame_phonemes.push_back(c);
    }
    const int n = utt.alignment.num_frames();
    utt.features = Matrix<float>(n, config.feature_dim);
    for (int t = 0; t < n; ++t) {
      const int c = utt.alignment.frame_phonemes[t];
      for (int f = 0; f < config.feature_dim; ++f) {
        double v = speaker_part(speaker, f) + phoneme_part(c, f);
        if (config.noise_std > 0.0) v += config.noise_std * noise(rng);
        utt.features(t, f) = static_cast<float>(v);
      }
    }
    corpus.utterances.push_back(std::move(utt));
  };

  const int dev_first = config.n_speakers;
  const int eval_first = dev_first + config.n_dev_speakers;
  for (int s = 0; s < config.n_speakers; ++s) {
    for (int p = 0; p < config.n_phrases; ++p) {
      for (int r = 0; r < config.utterances_per_speaker_phrase; ++r) {
        realise(Split::kTrain, s, p, r);
      }
    }
  }
  for (int s = dev_first; s < eval_first; ++s) {
    for (int p = config.n_phrases; p < config.total_phrases(); ++p) {
      for (int r = 0; r < config.dev_repeats; ++r) realise(Split::kDev, s, p, r);
    }
  }
  for (int s = eval_first; s < config.total_speakers(); ++s) {
    for (int p = config.n_phrases; p < config.total_phrases(); ++p) {
      for (int r = 0; r < config.eval_repeats; ++r) realise(Split::kEval, s, p, r);
    }
  }
  if (truth != nullptr) *truth = std::move(model);
  return corpus;
}

CropResult CropTrainingSegments(const Corpus& corpus, int min_frames,
                                int max_frames, uint64_t seed) {
  if (min_frames < 1 || max_frames < min_frames) {
    throw ValidationError("crop range must satisfy 1 <= min_frames <= max_frames");
  }
  std::mt19937_64 rng(seed);
  CropResult result;
  std::set<int> speakers;
  for (const auto& utt : corpus.utterances) {
    if (utt.split == Split::kTrain) speakers.insert(utt.speaker_id);
  }
  std::map<int, int> label_of;
  for (int s : speakers) label_of.emplace(s, static_cast<int>(label_of.size()));
  result.num_speakers = static_cast<int>(speakers.size());

  const int num_phonemes = corpus.config.num_phonemes;
  for (const auto& utt : corpus.utterances) {
    if (utt.split != Split::kTrain) continue;
    const int n = utt.num_frames();
    if (n < min_frames) {
      ++result.skipped;
      continue;
    }
    std::uniform_int_distribution<int> len_dist(min_frames,
                                                std::min(max_frames, n));
    const int len = len_dist(rng);
    std::uniform_int_distribution<int> start_dist(0, n - len);
    const int start = start_dist(rng);

    TrainingSegment seg;
    seg.features = Matrix<float>(len, utt.features.cols());
    std::copy_n(utt.features.row(start).data(), seg.features.size(),
                seg.features.data());
    seg.speaker_label = label_of.at(utt.speaker_id);
    seg.target = ComputeSegmentDistribution(
        std::span(utt.alignment.frame_phonemes).subspan(start, len),
        num_phonemes);
    seg.utt_id = utt.utt_id;
    seg.start = start;
    result.segments.push_back(std::move(seg));
  }
  return result;
}

}  // namespace stf
