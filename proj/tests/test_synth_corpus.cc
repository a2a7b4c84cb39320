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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "doctest.h"
#include "json.hpp"
#include "stf/binary_io.h"
#include "stf/error.h"
#include "stf/synth_corpus.h"
#include "test_util.h"

namespace stf {
namespace {

using testing::TempDir;
using testing::TinyCorpusConfig;

// Least-squares residual of d against the columns of a, via the normal
// equations solved by Gaussian elimination with partial pivoting.
double ColumnSpaceResidual(const Matrix<double>& a, const std::vector<double>& d) {
  const int m = a.rows(), k = a.cols();
  std::vector<std::vector<double>> g(k, std::vector<double>(k + 1, 0.0));
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      for (int r = 0; r < m; ++r) g[i][j] += a(r, i) * a(r, j);
    }
    for (int r = 0; r < m; ++r) g[i][k] += a(r, i) * d[r];
  }
  for (int col = 0; col < k; ++col) {
    int pivot = col;
    for (int r = col + 1; r < k; ++r) {
      if (std::abs(g[r][col]) > std::abs(g[pivot][col])) pivot = r;
    }
    std::swap(g[col], g[pivot]);
    for (int r = 0; r < k; ++r) {
      if (r == col) continue;
      const double f = g[r][col] / g[col][col];
      for (int j = col; j <= k; ++j) g[r][j] -= f * g[col][j];
    }
  }
  double residual = 0.0;
  for (int r = 0; r < m; ++r) {
    double fit = 0.0;
    for (int j = 0; j < k; ++j) fit += a(r, j) * g[j][k] / g[j][j];
    residual += (d[r] - fit) * (d[r] - fit);
  }
  return std::sqrt(residual);
}

double Norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

TEST_CASE("generation is deterministic in the seed") {
  const auto config = TinyCorpusConfig();
  const Corpus a = GenerateCorpus(config);
  const Corpus b = GenerateCorpus(config);
  CHECK(a == b);
  auto other = config;
  other.seed += 1;
  CHECK_FALSE(GenerateCorpus(other) == a);
}

TEST_CASE("corpus structure") {
  const auto config = TinyCorpusConfig();
  const Corpus corpus = GenerateCorpus(config);
  std::set<int> train, dev, eval;
  for (const auto& u : corpus.utterances) {
    CHECK(u.features.rows() == u.alignment.num_frames());
    CHECK(u.features.cols() == config.feature_dim);
    for (float v : u.features.values()) CHECK(std::isfinite(v));
    const auto& phrase = corpus.phrases[u.phrase_id];
    CHECK(u.alignment.frame_phonemes.front() == phrase.front());
    CHECK(u.alignment.frame_phonemes.back() == phrase.back());
    (u.split == Split::kTrain ? train : u.split == Split::kDev ? dev : eval)
        .insert(u.speaker_id);
    if (u.split == Split::kTrain) {
      CHECK(u.phrase_id < config.n_phrases);
    } else {
      CHECK(u.phrase_id >= config.n_phrases);
    }
  }
  CHECK(static_cast<int>(train.size()) == config.n_speakers);
  CHECK(static_cast<int>(dev.size()) == config.n_dev_speakers);
  CHECK(static_cast<int>(eval.size()) == config.n_eval_speakers);
  for (int s : eval) {
    CHECK(train.count(s) == 0);
    CHECK(dev.count(s) == 0);
  }
  CHECK(corpus.SplitUtterances(Split::kEval).size() ==
        size_t(config.n_eval_speakers * config.n_eval_phrases * config.eval_repeats));
  CHECK(corpus.Find(corpus.utterances[7].utt_id).utt_id == corpus.utterances[7].utt_id);
  CHECK_THROWS_AS(corpus.Find("nope"), ValidationError);
}

TEST_CASE("noiseless utterances with equal durations are identical") {
  auto config = TinyCorpusConfig();
  config.noise_std = 0.0;
  config.min_frames_per_phone = config.max_frames_per_phone = 5;
  const Corpus corpus = GenerateCorpus(config);
  int compared = 0;
  for (const auto& a : corpus.utterances) {
    for (const auto& b : corpus.utterances) {
      if (&a == &b || a.speaker_id != b.speaker_id || a.phrase_id != b.phrase_id) continue;
      CHECK(a.features == b.features);
      ++compared;
    }
  }
  CHECK(compared > 0);
}

TEST_CASE("noiseless speaker differences lie in the speaker mixing column space") {
  auto config = TinyCorpusConfig();
  config.noise_std = 0.0;
  config.feature_dim = 12;
  config.speaker_latent_dim = 4;
  config.phoneme_latent_dim = 4;
  LatentModel truth;
  const Corpus corpus = GenerateCorpus(config, &truth);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> normal;
  int checked = 0;
  for (size_t i = 0; i + 1 < corpus.utterances.size(); i += 7) {
    const auto& a = corpus.utterances[i];
    const auto& b = corpus.utterances[(i * 13 + 5) % corpus.utterances.size()];
    for (int ta = 0; ta < a.num_frames(); ++ta) {
      for (int tb = 0; tb < b.num_frames(); ++tb) {
        if (a.alignment.frame_phonemes[ta] != b.alignment.frame_phonemes[tb]) continue;
        std::vector<double> d(config.feature_dim);
        for (int f = 0; f < config.feature_dim; ++f) {
          d[f] = double(a.features(ta, f)) - double(b.features(tb, f));
        }
        // float32 storage bounds how close to zero the residual can get.
        CHECK(ColumnSpaceResidual(truth.speaker_mixing, d) <= 1e-5 * (1.0 + Norm(d)));
        ++checked;
        tb = b.num_frames();
        ta = a.num_frames();
      }
    }
  }
  CHECK(checked > 10);
  // A generic direction is far from the 4-dimensional subspace.
  std::vector<double> random(config.feature_dim);
  for (double& v : random) v = normal(rng);
  CHECK(ColumnSpaceResidual(truth.speaker_mixing, random) > 0.1 * Norm(random));
}

TEST_CASE("noiseless mean frame is linear in the latents") {
  auto config = TinyCorpusConfig();
  config.noise_std = 0.0;
  LatentModel truth;
  const Corpus corpus = GenerateCorpus(config, &truth);
  for (const auto& u : corpus.utterances) {
    const int n = u.num_frames();
    for (int f = 0; f < config.feature_dim; ++f) {
      double speaker = 0.0;
      for (int k = 0; k < config.speaker_latent_dim; ++k) {
        speaker += truth.speaker_mixing(f, k) * truth.speaker_latents(u.speaker_id, k);
      }
      // A z + B (duration-weighted mean phone latent), evaluated per frame
      // and rounded to the stored float32 precision.
      double expected = 0.0, actual = 0.0;
      for (int t = 0; t < n; ++t) {
        const int c = u.alignment.frame_phonemes[t];
        double phone = 0.0;
        for (int k = 0; k < config.phoneme_latent_dim; ++k) {
          phone += truth.phoneme_mixing(f, k) * truth.phoneme_latents(c, k);
        }
        expected += static_cast<float>(speaker + phone);
        actual += u.features(t, f);
      }
      CHECK(std::abs(expected / n - actual / n) <= 1e-9);
    }
  }
}

TEST_CASE("corpus round trip is bit exact") {
  auto config = TinyCorpusConfig();
  config.n_speakers = 2;
  config.n_phrases = 1;
  config.n_eval_speakers = 1;
  config.n_eval_phrases = 2;
  config.eval_repeats = 2;
  config.enroll_repeats = 1;
  config.n_dev_speakers = 1;
  config.dev_repeats = 1;
  const Corpus corpus = GenerateCorpus(config);
  REQUIRE(corpus.utterances.size() == 10);
  TempDir dir;
  WriteCorpus(corpus, dir / "c");
  CHECK(ReadCorpus(dir / "c") == corpus);
  CHECK_FALSE(std::filesystem::exists(dir / "c.partial"));
}

TEST_CASE("feature file errors") {
  const Corpus corpus = GenerateCorpus(TinyCorpusConfig());
  const Utterance& utt = corpus.utterances[0];
  const std::string bytes = EncodeFeatureFile(utt, 5);
  Utterance decoded;
  DecodeFeatureFile(bytes, "x.fsvf", utt.features.cols(), 5, &decoded);
  CHECK(decoded.features == utt.features);
  CHECK(decoded.alignment == utt.alignment);

  CHECK(bytes.substr(0, 4) == "FSVF");
  CHECK_THROWS_AS(DecodeFeatureFile(bytes.substr(0, bytes.size() - 3), "x.fsvf",
                                    utt.features.cols(), 5, &decoded),
                  FormatError);
  std::string bad_magic = bytes;
  bad_magic[0] = 'X';
  CHECK_THROWS_AS(DecodeFeatureFile(bad_magic, "x.fsvf", utt.features.cols(), 5, &decoded),
                  FormatError);
  CHECK_THROWS_AS(DecodeFeatureFile(bytes, "x.fsvf", utt.features.cols() + 1, 5, &decoded),
                  FormatError);
  try {
    DecodeFeatureFile(bytes.substr(0, 30), "x.fsvf", utt.features.cols(), 5, &decoded);
  } catch (const FormatError& e) {
    const std::string what = e.what();
    CHECK(what.find("x.fsvf") != std::string::npos);
    CHECK(what.find("offset") != std::string::npos);
  }
}

TEST_CASE("read corpus rejects inconsistent directories") {
  const Corpus corpus = GenerateCorpus(TinyCorpusConfig());
  TempDir dir;
  WriteCorpus(corpus, dir / "c");

  SUBCASE("truncated feature file") {
    const std::string path = dir / ("c/feats/" + corpus.utterances[3].utt_id + ".fsvf");
    const std::string bytes = binary::ReadFile(path);
    binary::WriteFile(path, bytes.substr(0, bytes.size() / 2));
    CHECK_THROWS_AS(ReadCorpus(dir / "c"), FormatError);
  }
  SUBCASE("speaker count mismatch") {
    const std::string path = dir / "c/manifest.json";
    auto manifest = nlohmann::json::parse(binary::ReadFile(path));
    manifest["config"]["n_speakers"] = 5;
    binary::WriteFile(path, manifest.dump());
    CHECK_THROWS_AS(ReadCorpus(dir / "c"), ValidationError);
  }
  SUBCASE("missing manifest field") {
    const std::string path = dir / "c/manifest.json";
    auto manifest = nlohmann::json::parse(binary::ReadFile(path));
    manifest["utterances"][0].erase("speaker_id");
    binary::WriteFile(path, manifest.dump());
    CHECK_THROWS_AS(ReadCorpus(dir / "c"), FormatError);
  }
}

TEST_CASE("training crops") {
  const auto config = TinyCorpusConfig();
  const Corpus corpus = GenerateCorpus(config);
  const CropResult a = CropTrainingSegments(corpus, 10, 14, 3);
  const CropResult b = CropTrainingSegments(corpus, 10, 14, 3);
  CHECK(a.num_speakers == config.n_speakers);
  REQUIRE(a.segments.size() == b.segments.size());
  for (size_t i = 0; i < a.segments.size(); ++i) {
    const auto& s = a.segments[i];
    CHECK(s.features == b.segments[i].features);
    CHECK(s.start == b.segments[i].start);
    CHECK(s.features.rows() >= 10);
    CHECK(s.features.rows() <= 14);
    const Utterance& utt = corpus.Find(s.utt_id);
    CHECK(utt.split == Split::kTrain);
    const auto crop = CropAlignment(utt.alignment, s.start, s.features.rows());
    CHECK(s.target == ComputeSegmentDistribution(crop, PhonemeSet(config.num_phonemes)));
    for (int t = 0; t < s.features.rows(); ++t) {
      for (int f = 0; f < config.feature_dim; ++f) {
        CHECK(s.features(t, f) == utt.features(s.start + t, f));
      }
    }
  }

  // min = max = N gives the whole utterance.
  int shortest = 1 << 30;
  for (const Utterance* u : corpus.SplitUtterances(Split::kTrain)) {
    shortest = std::min(shortest, u->num_frames());
  }
  const CropResult whole = CropTrainingSegments(corpus, shortest, shortest, 1);
  for (const auto& s : whole.segments) {
    const Utterance& utt = corpus.Find(s.utt_id);
    if (utt.num_frames() != shortest) continue;
    CHECK(s.features == utt.features);
    CHECK(s.target == ComputeSegmentDistribution(utt.alignment, PhonemeSet(config.num_phonemes)));
  }

  const CropResult too_long = CropTrainingSegments(corpus, 1000, 1000, 1);
  CHECK(too_long.segments.empty());
  CHECK(too_long.skipped == static_cast<int>(corpus.SplitUtterances(Split::kTrain).size()));
}

}  // namespace
}  // namespace stf
