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

#include "stf/metrics.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "stf/error.h"

namespace stf {

void MetricConfig::Validate() const {
  if (!(p_tar > 0.0 && p_tar < 1.0)) {
    throw ValidationError("metric config: p_tar must be in (0, 1)");
  }
  if (!(c_miss > 0.0 && c_fa > 0.0)) {
    throw ValidationError("metric config: costs must be positive");
  }
}

namespace {

struct SweepPoint {
  double threshold;
  double far;
  double frr;
};

std::vector<SweepPoint> Sweep(std::span<const ScoredTrial> trials) {
  std::vector<ScoredTrial> sorted(trials.begin(), trials.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const ScoredTrial& a, const ScoredTrial& b) {
              return a.score < b.score;
            });
  long num_targets = 0;
  for (const auto& t : sorted) num_targets += t.target ? 1 : 0;
  const long num_nontargets = static_cast<long>(sorted.size()) - num_targets;
  if (num_targets == 0 || num_nontargets == 0) {
    throw DomainError("metrics need at least one target and one nontarget trial");
  }

  std::vector<SweepPoint> points;
  long targets_below = 0;
  long nontargets_below = 0;
  size_t i = 0;
  while (i < sorted.size()) {
    const double u = sorted[i].score;
    points.push_back({u, double(num_nontargets - nontargets_below) / num_nontargets,
                      double(targets_below) / num_targets});
    for (; i < sorted.size() && sorted[i].score == u; ++i) {
      (sorted[i].target ? targets_below : nontargets_below) += 1;
    }
  }
  points.push_back({std::numeric_limits<double>::infinity(), 0.0, 1.0});
  return points;
}

}  // namespace

EerResult ComputeEer(std::span<const ScoredTrial> trials) {
  const auto points = Sweep(trials);
  for (size_t k = 1; k < points.size(); ++k) {
    const double d = points[k].far - points[k].frr;
    if (d > 0.0) continue;
    if (d == 0.0) return {points[k].far, points[k].threshold};
    const auto& prev = points[k - 1];
    const double d_prev = prev.far - prev.frr;
    const double alpha = d_prev / (d_prev - d);
    const double eer = prev.far + alpha * (points[k].far - prev.far);
    const double threshold =
        std::isinf(points[k].threshold)
            ? prev.threshold
            : prev.threshold + alpha * (points[k].threshold - prev.threshold);
    return {eer, threshold};
  }
  // Unreachable: the +inf point always has FAR - FRR = -1.
  throw DomainError("EER sweep found no crossing");
}

DcfResult ComputeMinDcf(std::span<const ScoredTrial> trials,
                        const MetricConfig& config) {
  config.Validate();
  const auto points = Sweep(trials);
  const double norm = std::min(config.c_miss * config.p_tar,
                               config.c_fa * (1.0 - config.p_tar));
  DcfResult best{std::numeric_limits<double>::infinity(), 0.0};
  for (const auto& p : points) {
    const double dcf = config.c_miss * p.frr * config.p_tar +
                       config.c_fa * p.far * (1.0 - config.p_tar);
    if (dcf < best.min_dcf) best = {dcf, p.threshold};
  }
  best.min_dcf /= norm;
  return best;
}

}  // namespace stf
