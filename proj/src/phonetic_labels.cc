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

#include "stf/phonetic_labels.h"

#include <set>

#include "stf/error.h"

namespace stf {

PhonemeSet::PhonemeSet(int size) {
  if (size < 2) {
    throw DomainError("phoneme set needs at least 2 classes, got " +
                      std::to_string(size));
  }
  names_.reserve(size);
  names_.push_back("sil");
  for (int c = 1; c < size; ++c) names_.push_back("ph" + std::to_string(c));
}

PhonemeSet::PhonemeSet(std::vector<std::string> names)
    : names_(std::move(names)) {
  if (names_.size() < 2) {
    throw DomainError("phoneme set needs at least 2 classes");
  }
  std::set<std::string> seen(names_.begin(), names_.end());
  if (seen.size() != names_.size()) {
    throw DomainError("phoneme names must be unique");
  }
}

SegmentPhonemeDistribution ComputeSegmentDistribution(
    std::span<const uint16_t> frame_phonemes, int num_phonemes) {
  if (frame_phonemes.empty()) throw DomainError("empty segment");
  std::vector<int64_t> counts(num_phonemes, 0);
  for (size_t t = 0; t < frame_phonemes.size(); ++t) {
    int c = frame_phonemes[t];
    if (c >= num_phonemes) {
      throw DomainError("phoneme index " + std::to_string(c) + " at frame " +
                        std::to_string(t) + " is out of range for C=" +
                        std::to_string(num_phonemes));
    }
    ++counts[c];
  }
  const double n = static_cast<double>(frame_phonemes.size());
  SegmentPhonemeDistribution dist;
  dist.probs.resize(num_phonemes);
  for (int c = 0; c < num_phonemes; ++c) dist.probs[c] = counts[c] / n;
  return dist;
}

SegmentPhonemeDistribution ComputeSegmentDistribution(
    const PhonemeAlignment& alignment, const PhonemeSet& phoneme_set) {
  return ComputeSegmentDistribution(alignment.frame_phonemes,
                                    phoneme_set.size());
}

PhonemeAlignment CropAlignment(const PhonemeAlignment& alignment, int start,
                               int length) {
  const int n = alignment.num_frames();
  if (length < 1 || start < 0 || start > n - length) {
    throw RangeError("crop [" + std::to_string(start) + ", " +
                     std::to_string(start + length) +
                     ") outside alignment of " + std::to_string(n) +
                     " frames");
  }
  PhonemeAlignment out;
  out.frame_phonemes.assign(alignment.frame_phonemes.begin() + start,
                            alignment.frame_phonemes.begin() + start + length);
  return out;
}

}  // namespace stf
