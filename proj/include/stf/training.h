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

#ifndef STF_TRAINING_H_
#define STF_TRAINING_H_

// Joint training of the factorization network.
//
// For a pair batch [x_s, x_t] with speaker labels y^s (of x_s) and phoneme
// distributions y^t (of x_t):
//   l_s1 = CE(speaker(generic(x_s)), y^s)
//   l_t1 = KL(y^t || text(generic(x_t)))
//   l_s2 = CE(combination_spk([ebd_s, ebd_t]), y^s)
//   l_t2 = KL(y^t || combination_text([ebd_s, ebd_t]))
//   total = l_s1 + l_t1 + l_s2 + l_t2
// each term averaged over the batch. The baseline trains on l_s1 alone.

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "stf/network.h"
#include "stf/synth_corpus.h"

namespace stf {

struct TrainingConfig {
  double learning_rate = 0.01;
  double momentum = 0.9;
  double weight_decay = 1e-4;
  int batch_size = 64;
  int epochs = 20;
  uint64_t seed = 1;
  double identical_pair_probability = 0.5;
  int min_crop_frames = 30;
  int max_crop_frames = 60;

  void Validate() const;
};

void to_json(nlohmann::json& j, const TrainingConfig& c);
void from_json(const nlohmann::json& j, TrainingConfig& c);

struct LossBreakdown {
  double l_s1 = 0.0;
  double l_t1 = 0.0;
  double l_s2 = 0.0;
  double l_t2 = 0.0;
  double total = 0.0;
};

// -log softmax(logits)[class_index], max-subtracted. Throws NumericError on
// non-finite logits and RangeError on a bad class index.
template <typename T>
double CrossEntropy(std::span<const T> logits, int class_index);

// sum_c target_c * log(target_c / max(predicted_c, 1e-12)), 0 log 0 = 0.
// Throws ShapeError on length mismatch.
double KlDivergence(std::span<const double> target,
                    std::span<const double> predicted);
inline double KlDivergence(const SegmentPhonemeDistribution& target,
                           std::span<const double> predicted) {
  return KlDivergence(target.probs, predicted);
}

inline constexpr double kProbabilityFloor = 1e-12;

// Indices into a segment pool; speaker[i] and text[i] form pair i.
struct PairBatch {
  std::vector<int> speaker;
  std::vector<int> text;
  int fallbacks = 0;  // cross-speaker draws replaced by identical pairs
};

// With probability identical_pair_probability the text segment is the anchor
// itself; otherwise it is drawn uniformly from segments of other speakers.
// With a single speaker in the pool every pair falls back to identical.
PairBatch SamplePairBatch(std::span<const TrainingSegment> pool,
                          std::span<const int> anchors,
                          double identical_pair_probability,
                          std::mt19937_64& rng);
// Draws config.batch_size anchors uniformly from the pool.
PairBatch SamplePairBatch(std::span<const TrainingSegment> pool,
                          const TrainingConfig& config, uint64_t seed);

// Materialised pair batch. Distinct crops appear once in segments.
template <typename T>
struct PairExamples {
  std::vector<Matrix<T>> segments;
  std::vector<int> speaker_index;
  std::vector<int> text_index;
  std::vector<int> speaker_labels;
  std::vector<SegmentPhonemeDistribution> text_targets;

  int batch_size() const { return static_cast<int>(speaker_index.size()); }
};

PairExamples<float> MakePairExamples(std::span<const TrainingSegment> pool,
                                     const PairBatch& batch);

template <typename T>
struct FactorizationTape {
  TdnnStackTape<T> generic;
  SegmentNetTape<T> speaker;
  SegmentNetTape<T> text;
  CombinationTape<T> combination;
};

// Train-mode forward (batch statistics). When grad is non-null, gradients of
// total are accumulated into it. When tape is non-null, the batch-norm
// statistics are recorded there. Throws NumericError naming the offending
// term if a loss is not finite.
template <typename T>
LossBreakdown FactorizationLoss(const FactorizationNet<T>& net,
                                const PairExamples<T>& examples,
                                FactorizationNet<T>* grad,
                                FactorizationTape<T>* tape = nullptr);

template <typename T>
LossBreakdown BaselineLoss(const BaselineNet<T>& net,
                           std::span<const Matrix<T>> segments,
                           std::span<const int> labels, BaselineNet<T>* grad,
                           SegmentNetTape<T>* tape = nullptr);

// Stochastic gradient descent with momentum and L2 weight decay:
//   v <- momentum * v + (g + weight_decay * w);  w <- w - lr * v
template <typename Net>
class SgdOptimizer {
 public:
  SgdOptimizer(const Net& net, const TrainingConfig& config)
      : velocity_(ZerosLike(net)), config_(config) {}

  void Step(Net& net, const Net& grad);
  const Net& velocity() const { return velocity_; }

 private:
  Net velocity_;
  TrainingConfig config_;
};

// One optimisation step on a pair batch: loss, gradients, parameter update,
// running-statistics update. Returns the pre-update loss.
template <typename T>
LossBreakdown TrainingStep(FactorizationNet<T>& net,
                           const PairExamples<T>& examples,
                           SgdOptimizer<FactorizationNet<T>>& optimizer);

template <typename T>
LossBreakdown BaselineTrainingStep(BaselineNet<T>& net,
                                   std::span<const Matrix<T>> segments,
                                   std::span<const int> labels,
                                   SgdOptimizer<BaselineNet<T>>& optimizer);

struct EpochLog {
  int epoch = 0;
  LossBreakdown loss;  // batch means over the epoch
  double wall_time = 0.0;
  int skipped_utterances = 0;
  int pair_fallbacks = 0;
};

nlohmann::json EpochLogJson(const EpochLog& log);

template <typename Net>
struct FitResult {
  Net net;
  std::vector<EpochLog> history;
};

using EpochCallback = std::function<void(const EpochLog&)>;

// network.num_speakers is filled from the training split; the rest of the
// network config is taken as given. Deterministic in config.seed.
FitResult<FactorizationNet<float>> FitFactorization(
    const Corpus& corpus, NetworkConfig network, const TrainingConfig& config,
    const EpochCallback& on_epoch = {});
FitResult<BaselineNet<float>> FitBaseline(const Corpus& corpus,
                                          NetworkConfig network,
                                          const TrainingConfig& config,
                                          const EpochCallback& on_epoch = {});

}  // namespace stf

#endif  // STF_TRAINING_H_
