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

#ifndef STF_METRICS_H_
#define STF_METRICS_H_

// Detection metrics over a threshold sweep.
//
// The sweep visits every distinct score u plus +inf. At threshold u a trial
// is accepted when score >= u, so
//   FAR(u) = #{nontarget scores >= u} / #nontargets
//   FRR(u) = #{target scores < u} / #targets.
// FAR - FRR starts at 1 (lowest score) and ends <= 0, so a crossing always
// exists. The EER is read at the first sweep point where FAR - FRR <= 0,
// linearly interpolated against the previous point when the sign change is
// strict.

#include <span>

namespace stf {

struct ScoredTrial {
  double score = 0.0;
  bool target = false;
};

struct MetricConfig {
  double p_tar = 0.01;
  double c_miss = 1.0;
  double c_fa = 1.0;

  void Validate() const;
};

struct EerResult {
  double eer = 0.0;
  double threshold = 0.0;
};

struct DcfResult {
  double min_dcf = 0.0;    // normalised by min(c_miss p_tar, c_fa (1 - p_tar))
  double threshold = 0.0;  // +inf when rejecting everything is optimal
};

// Both throw DomainError unless there is at least one target and one
// nontarget trial.
EerResult ComputeEer(std::span<const ScoredTrial> trials);
DcfResult ComputeMinDcf(std::span<const ScoredTrial> trials,
                        const MetricConfig& config);

}  // namespace stf

#endif  // STF_METRICS_H_
