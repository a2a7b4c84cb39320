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

#include <filesystem>
#include <set>

#include "stf/binary_io.h"
#include "stf/error.h"
#include "stf/synth_corpus.h"

namespace stf {

namespace fs = std::filesystem;

namespace {

constexpr char kFeatureMagic[] = "FSVF";
constexpr uint8_t kFeatureVersion = 1;
constexpr int kManifestVersion = 1;

}  // namespace

std::string EncodeFeatureFile(const Utterance& utt, int num_phonemes) {
  std::string out(kFeatureMagic, 4);
  out.push_back(static_cast<char>(kFeatureVersion));
  binary::PutU32(out, static_cast<uint32_t>(utt.num_frames()));
  binary::PutU32(out, static_cast<uint32_t>(utt.features.cols()));
  binary::PutU32(out, static_cast<uint32_t>(num_phonemes));
  for (uint16_t c : utt.alignment.frame_phonemes) binary::PutU16(out, c);
  for (float v : utt.features.values()) binary::PutF32(out, v);
  return out;
}

void DecodeFeatureFile(const std::string& bytes, const std::string& name,
                       int expected_dim, int expected_phonemes, Utterance* utt) {
  binary::Reader reader(bytes, name);
  if (reader.Bytes(4, "magic") != std::string(kFeatureMagic, 4)) {
    throw FormatError(name + ": bad magic at offset 0 (expected FSVF)");
  }
  const uint8_t version = reader.U8("version");
  if (version != kFeatureVersion) {
    throw FormatError(name + ": unsupported version " +
                      std::to_string(version) + " at offset 4");
  }
  const uint32_t n = reader.U32("frame count");
  const uint32_t dim = reader.U32("feature_dim");
  const uint32_t num_phonemes = reader.U32("phoneme set size");
  if (n == 0) throw FormatError(name + ": zero frames at offset 5");
  if (static_cast<int>(dim) != expected_dim) {
    throw FormatError(name + ": feature_dim " + std::to_string(dim) +
                      " at offset 9 does not match manifest (" +
                      std::to_string(expected_dim) + ")");
  }
  if (static_cast<int>(num_phonemes) != expected_phonemes) {
    throw FormatError(name + ": phoneme set size " +
                      std::to_string(num_phonemes) +
                      " at offset 13 does not match manifest (" +
                      std::to_string(expected_phonemes) + ")");
  }
  reader.Need(2ull * n, "phoneme indices");
  utt->alignment.frame_phonemes.resize(n);
  for (uint32_t t = 0; t < n; ++t) {
    const size_t at = reader.offset();
    const uint16_t c = reader.U16("phoneme index");
    if (c >= num_phonemes) {
      throw FormatError(name + ": phoneme index " + std::to_string(c) +
                        " out of range at offset " + std::to_string(at));
    }
    utt->alignment.frame_phonemes[t] = c;
  }
  reader.Need(4ull * n * dim, "feature values");
  utt->features = Matrix<float>(static_cast<int>(n), static_cast<int>(dim));
  for (float& v : utt->features.values()) v = reader.F32("feature value");
  if (reader.remaining() != 0) reader.Fail("trailing bytes");
}

void WriteCorpus(const Corpus& corpus, const std::string& directory) {
  const fs::path target(directory);
  fs::path tmp = target;
  tmp += ".partial";
  fs::remove_all(tmp);
  fs::create_directories(tmp / "feats");

  nlohmann::json manifest;
  manifest["format_version"] = kManifestVersion;
  manifest["config"] = corpus.config;
  manifest["phrases"] = corpus.phrases;
  nlohmann::json utts = nlohmann::json::array();
  for (const auto& utt : corpus.utterances) {
    const std::string rel = "feats/" + utt.utt_id + ".fsvf";
    utts.push_back({{"utt_id", utt.utt_id},
                    {"speaker_id", utt.speaker_id},
                    {"phrase_id", utt.phrase_id},
                    {"repeat", utt.repeat},
                    {"split", SplitName(utt.split)},
                    {"path", rel}});
    binary::WriteFile((tmp / rel).string(),
                      EncodeFeatureFile(utt, corpus.config.num_phonemes));
  }
  manifest["utterances"] = std::move(utts);
  binary::WriteFile((tmp / "manifest.json").string(), manifest.dump(1) + "\n");

  fs::remove_all(target);
  fs::rename(tmp, target);
}

Corpus ReadCorpus(const std::string& directory) {
  const fs::path dir(directory);
  const std::string manifest_path = (dir / "manifest.json").string();
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(binary::ReadFile(manifest_path));
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(manifest_path + ": " + e.what());
  }

  Corpus corpus;
  std::string field = "format_version";
  try {
    if (manifest.at(field).get<int>() != kManifestVersion) {
      throw FormatError(manifest_path + ": unsupported format_version");
    }
    field = "config";
    corpus.config = manifest.at(field).get<CorpusConfig>();
    corpus.config.Validate();
    field = "phrases";
    corpus.phrases =
        manifest.at(field).get<std::vector<std::vector<uint16_t>>>();
    field = "utterances";
    for (const auto& entry : manifest.at(field)) {
      Utterance utt;
      utt.utt_id = entry.at("utt_id").get<std::string>();
      utt.speaker_id = entry.at("speaker_id").get<int>();
      utt.phrase_id = entry.at("phrase_id").get<int>();
      utt.repeat = entry.value("repeat", 0);
      utt.split = ParseSplit(entry.at("split").get<std::string>());
      const std::string path = (dir / entry.at("path").get<std::string>()).string();
      DecodeFeatureFile(binary::ReadFile(path), path, corpus.config.feature_dim,
                        corpus.config.num_phonemes, &utt);
      corpus.utterances.push_back(std::move(utt));
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(manifest_path + ": field '" + field + "': " + e.what());
  }

  // Cross-check the declared structure against the utterance list.
  const CorpusConfig& c = corpus.config;
  std::set<int> train, dev, eval;
  for (const auto& utt : corpus.utterances) {
    if (utt.speaker_id < 0 || utt.speaker_id >= c.total_speakers()) {
      throw ValidationError(manifest_path + ": speaker_id " +
                            std::to_string(utt.speaker_id) + " of " +
                            utt.utt_id + " outside [0, " +
                            std::to_string(c.total_speakers()) + ")");
    }
    if (utt.phrase_id < 0 ||
        utt.phrase_id >= static_cast<int>(corpus.phrases.size())) {
      throw ValidationError(manifest_path + ": phrase_id of " + utt.utt_id +
                            " out of range");
    }
    (utt.split == Split::kTrain ? train
     : utt.split == Split::kDev ? dev
                                : eval)
        .insert(utt.speaker_id);
  }
  auto check = [&](const char* what, size_t got, int declared) {
    if (static_cast<int>(got) != declared) {
      throw ValidationError(manifest_path + ": config declares " +
                            std::to_string(declared) + " " + what +
                            " but files contain " + std::to_string(got));
    }
  };
  check("training speakers (n_speakers)", train.size(), c.n_speakers);
  check("dev speakers (n_dev_speakers)", dev.size(), c.n_dev_speakers);
  check("eval speakers (n_eval_speakers)", eval.size(), c.n_eval_speakers);
  check("phrases", corpus.phrases.size(), c.total_phrases());
  for (int s : eval) {
    if (train.count(s) != 0) {
      throw ValidationError(manifest_path + ": speaker " + std::to_string(s) +
                            " appears in both train and eval splits");
    }
  }
  return corpus;
}

}  // namespace stf
