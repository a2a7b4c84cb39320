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

#ifndef STF_TESTS_TEST_UTIL_H_
#define STF_TESTS_TEST_UTIL_H_

#include <atomic>
#include <filesystem>
#include <random>
#include <string>
#include <unistd.h>

#include "stf/network.h"
#include "stf/synth_corpus.h"

namespace stf::testing {

// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("stf_test_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string operator/(const std::string& name) const { return (path_ / name).string(); }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline CorpusConfig TinyCorpusConfig() {
  CorpusConfig c;
  c.n_speakers = 4;
  c.n_phrases = 3;
  c.utterances_per_speaker_phrase = 2;
  c.n_eval_speakers = 3;
  c.n_eval_phrases = 5;
  c.eval_repeats = 5;
  c.enroll_repeats = 2;
  c.n_dev_speakers = 5;
  c.dev_repeats = 2;
  c.feature_dim = 6;
  c.num_phonemes = 5;
  c.min_phones_per_phrase = 3;
  c.max_phones_per_phrase = 4;
  c.min_frames_per_phone = 4;
  c.max_frames_per_phone = 6;
  c.speaker_latent_dim = 3;
  c.phoneme_latent_dim = 3;
  c.noise_std = 0.5;
  c.seed = 5;
  return c;
}

// Narrow network that fits TinyCorpusConfig features.
inline NetworkConfig TinyNetworkConfig(int feature_dim, int num_speakers,
                                       int num_phonemes) {
  NetworkConfig c;
  c.feature_dim = feature_dim;
  c.num_speakers = num_speakers;
  c.num_phonemes = num_phonemes;
  c.context_offsets = {{-1, 0, 1}, {0}, {-1, 0, 1}, {0}, {0}};
  c.frame_dims = {4, 4, 4, 4, 6};
  c.embedding_dim = 4;
  c.combined_dim = 5;
  return c;
}

inline Matrix<float> RandomFeatures(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<float> normal(0.0f, 1.0f);
  Matrix<float> m(rows, cols);
  for (float& v : m.values()) v = normal(rng);
  return m;
}

}  // namespace stf::testing

#endif  // STF_TESTS_TEST_UTIL_H_
