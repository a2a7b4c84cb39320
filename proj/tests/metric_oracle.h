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

#ifndef STF_TESTS_METRIC_ORACLE_H_
#define STF_TESTS_METRIC_ORACLE_H_

// Brute-force threshold sweep: every distinct score plus +inf, FAR and FRR
// recounted from scratch at each threshold.

#include <algorithm>
#include <limits>
#include <set>
#include <vector>

#include "stf/metrics.h"

namespace stf::testing {

struct OracleRates {
  double threshold, far, frr;
};

inline std::vector<OracleRates> OracleSweep(const std::vector<ScoredTrial>& trials) {
  std::set<double> thresholds;
  for (const auto& t : trials) thresholds.insert(t.score);
  thresholds.insert(std::numeric_limits<double>::infinity());
  std::vector<OracleRates> out;
  for (double u : thresholds) {
    long fa = 0, nontargets = 0, miss = 0, targets = 0;
    for (const auto& t : trials) {
      if (t.target) {
        ++targets;
        miss += t.score < u;
      } else {
        ++nontargets;
        fa += t.score >= u;
      }
    }
    out.push_back({u, double(fa) / nontargets, double(miss) / targets});
  }
  return out;
}

inline double OracleEer(const std::vector<ScoredTrial>& trials) {
  const auto sweep = OracleSweep(trials);
  for (size_t k = 0; k < sweep.size(); ++k) {
    const double d = sweep[k].far - sweep[k].frr;
    if (d > 0.0) continue;
    if (d == 0.0 || k == 0) return sweep[k].far;
    const double d_prev = sweep[k - 1].far - sweep[k - 1].frr;
    const double alpha = d_prev / (d_prev - d);
    return sweep[k - 1].far + alpha * (sweep[k].far - sweep[k - 1].far);
  }
  return 1.0;
}

inline double OracleMinDcf(const std::vector<ScoredTrial>& trials, const MetricConfig& c) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& r : OracleSweep(trials)) {
    best = std::min(best, c.c_miss * r.frr * c.p_tar + c.c_fa * r.far * (1.0 - c.p_tar));
  }
  return best / std::min(c.c_miss * c.p_tar, c.c_fa * (1.0 - c.p_tar));
}

// Random score set with 4..200 trials, both classes present, ties likely
// when 'quantise' is set.
template <typename Rng>
std::vector<ScoredTrial> RandomScoreSet(Rng& rng, bool quantise) {
  std::uniform_int_distribution<int> size(4, 200);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int n = size(rng);
  const double separation = 2.0 * u(rng);
  std::vector<ScoredTrial> trials(n);
  for (int i = 0; i < n; ++i) {
    trials[i].target = i == 0 || (i != 1 && u(rng) < 0.3);
    double s = normal(rng) + (trials[i].target ? separation : 0.0);
    if (quantise) s = std::round(s * 4.0) / 4.0;
    trials[i].score = s;
  }
  return trials;
}

}  // namespace stf::testing

#endif  // STF_TESTS_METRIC_ORACLE_H_
