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

#ifndef STF_PHONETIC_LABELS_H_
#define STF_PHONETIC_LABELS_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace stf {

// Inventory of phoneme classes. Index 0 is conventionally silence.
class PhonemeSet {
 public:
  // Names default to "sil", "ph1", "ph2", ...
  explicit PhonemeSet(int size);
  explicit PhonemeSet(std::vector<std::string> names);

  int size() const { return static_cast<int>(names_.size()); }
  const std::vector<std::string>& names() const { return names_; }

 private:
  std::vector<std::string> names_;
};

// One phoneme index per frame.
struct PhonemeAlignment {
  std::vector<uint16_t> frame_phonemes;

  int num_frames() const { return static_cast<int>(frame_phonemes.size()); }
  bool operator==(const PhonemeAlignment&) const = default;
};

// Segment-level phoneme label: probs[c] = N_c / N, the fraction of the
// segment's frames aligned to phoneme c.
struct SegmentPhonemeDistribution {
  std::vector<double> probs;

  int size() const { return static_cast<int>(probs.size()); }
  bool operator==(const SegmentPhonemeDistribution&) const = default;
};

// Throws DomainError on an empty alignment or a phoneme index >= C (the
// message names the offending frame).
SegmentPhonemeDistribution ComputeSegmentDistribution(
    const PhonemeAlignment& alignment, const PhonemeSet& phoneme_set);

// Same computation over a raw index span; used for crops without copying.
SegmentPhonemeDistribution ComputeSegmentDistribution(
    std::span<const uint16_t> frame_phonemes, int num_phonemes);

// Contiguous sub-alignment [start, start + length). Throws RangeError when
// the window leaves the alignment or length < 1.
PhonemeAlignment CropAlignment(const PhonemeAlignment& alignment, int start,
                               int length);

}  // namespace stf

#endif  // STF_PHONETIC_LABELS_H_
