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

#include "stf/training.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <numeric>

#include "stf/error.h"
#include "stf/seeding.h"

namespace stf {

void TrainingConfig::Validate() const {
  auto fail = [](const std::string& msg) {
    throw ValidationError("training config: " + msg);
  };
  if (!(learning_rate >= 0.0)) fail("learning_rate must be non-negative");
  if (!(momentum >= 0.0 && momentum < 1.0)) fail("momentum must be in [0, 1)");
  if (!(weight_decay >= 0.0)) fail("weight_decay must be non-negative");
  if (batch_size < 1) fail("batch_size must be positive");
  if (epochs < 1) fail("epochs must be positive");
  if (!(identical_pair_probability >= 0.0 && identical_pair_probability <= 1.0)) {
    fail("identical_pair_probability must be in [0, 1]");
  }
  if (min_crop_frames < 1 || max_crop_frames < min_crop_frames) {
    fail("crop range must satisfy 1 <= min_crop_frames <= max_crop_frames");
  }
}

void to_json(nlohmann::json& j, const TrainingConfig& c) {
  j = nlohmann::json{{"learning_rate", c.learning_rate},
                     {"momentum", c.momentum},
                     {"weight_decay", c.weight_decay},
                     {"batch_size", c.batch_size},
                     {"epochs", c.epochs},
                     {"seed", c.seed},
                     {"identical_pair_probability", c.identical_pair_probability},
                     {"min_crop_frames", c.min_crop_frames},
                     {"max_crop_frames", c.max_crop_frames}};
}

void from_json(const nlohmann::json& j, TrainingConfig& c) {
  const TrainingConfig d;
  c.learning_rate = j.value("learning_rate", d.learning_rate);
  c.momentum = j.value("momentum", d.momentum);
  c.weight_decay = j.value("weight_decay", d.weight_decay);
  c.batch_size = j.value("batch_size", d.batch_size);
  c.epochs = j.value("epochs", d.epochs);
  c.seed = j.value("seed", d.seed);
  c.identical_pair_probability =
      j.value("identical_pair_probability", d.identical_pair_probability);
  c.min_crop_frames = j.value("min_crop_frames", d.min_crop_frames);
  c.max_crop_frames = j.value("max_crop_frames", d.max_crop_frames);
}

template <typename T>
double CrossEntropy(std::span<const T> logits, int class_index) {
  if (class_index < 0 || class_index >= static_cast<int>(logits.size())) {
    throw RangeError("class index " + std::to_string(class_index) +
                     " outside " + std::to_string(logits.size()) + " logits");
  }
  double max = -INFINITY;
  for (T v : logits) {
    if (!std::isfinite(static_cast<double>(v))) {
      throw NumericError("cross entropy: non-finite logit");
    }
    max = std::max(max, static_cast<double>(v));
  }
  double sum = 0.0;
  for (T v : logits) sum += std::exp(static_cast<double>(v) - max);
  return std::log(sum) - (static_cast<double>(logits[class_index]) - max);
}

double KlDivergence(std::span<const double> target,
                    std::span<const double> predicted) {
  if (target.size() != predicted.size()) {
    throw ShapeError("KL divergence over distributions of length " +
                     std::to_string(target.size()) + " and " +
                     std::to_string(predicted.size()));
  }
  double kl = 0.0;
  for (size_t c = 0; c < target.size(); ++c) {
    if (target[c] > 0.0) {
      kl += target[c] *
            (std::log(target[c]) - std::log(std::max(predicted[c], kProbabilityFloor)));
    }
  }
  return kl;
}

PairBatch SamplePairBatch(std::span<const TrainingSegment> pool,
                          std::span<const int> anchors,
                          double identical_pair_probability,
                          std::mt19937_64& rng) {
  if (pool.empty()) throw DomainError("pair sampling from an empty segment pool");
  bool multi_speaker = false;
  for (const auto& seg : pool) {
    if (seg.speaker_label != pool.front().speaker_label) {
      multi_speaker = true;
      break;
    }
  }
  std::bernoulli_distribution identical(identical_pair_probability);
  std::uniform_int_distribution<int> any(0, static_cast<int>(pool.size()) - 1);
  PairBatch batch;
  for (int anchor : anchors) {
    batch.speaker.push_back(anchor);
    if (identical(rng)) {
      batch.text.push_back(anchor);
      continue;
    }
    if (!multi_speaker) {
      ++batch.fallbacks;
      batch.text.push_back(anchor);
      continue;
    }
    int other = any(rng);
    while (pool[other].speaker_label == pool[anchor].speaker_label) other = any(rng);
    batch.text.push_back(other);
  }
  return batch;
}

PairBatch SamplePairBatch(std::span<const TrainingSegment> pool,
                          const TrainingConfig& config, uint64_t seed) {
  if (pool.empty()) throw DomainError("pair sampling from an empty segment pool");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> any(0, static_cast<int>(pool.size()) - 1);
  std::vector<int> anchors(config.batch_size);
  for (int& a : anchors) a = any(rng);
  return SamplePairBatch(pool, anchors, config.identical_pair_probability, rng);
}

PairExamples<float> MakePairExamples(std::span<const TrainingSegment> pool,
                                     const PairBatch& batch) {
  PairExamples<float> ex;
  std::map<int, int> slot;
  auto intern = [&](int pool_index) {
    auto [it, inserted] =
        slot.emplace(pool_index, static_cast<int>(ex.segments.size()));
    if (inserted) ex.segments.push_back(pool[pool_index].features);
    return it->second;
  };
  for (size_t i = 0; i < batch.speaker.size(); ++i) {
    ex.speaker_index.push_back(intern(batch.speaker[i]));
    ex.speaker_labels.push_back(pool[batch.speaker[i]].speaker_label);
  }
  for (size_t i = 0; i < batch.text.size(); ++i) {
    ex.text_index.push_back(intern(batch.text[i]));
    ex.text_targets.push_back(pool[batch.text[i]].target);
  }
  return ex;
}

namespace {

template <typename T>
std::vector<double> SoftmaxRow(std::span<const T> logits) {
  double max = -INFINITY;
  for (T v : logits) max = std::max(max, static_cast<double>(v));
  std::vector<double> p(logits.size());
  double sum = 0.0;
  for (size_t c = 0; c < logits.size(); ++c) {
    p[c] = std::exp(static_cast<double>(logits[c]) - max);
    sum += p[c];
  }
  for (double& v : p) v /= sum;
  return p;
}

// Mean CE over rows; d_logits = (softmax - onehot) / B.
template <typename T>
double SpeakerTerm(const Matrix<T>& logits, std::span<const int> labels,
                   Matrix<T>* d_logits) {
  const int b = logits.rows();
  d_logits->Resize(b, logits.cols());
  double sum = 0.0;
  for (int r = 0; r < b; ++r) {
    sum += CrossEntropy<T>(logits.row(r), labels[r]);
    const auto p = SoftmaxRow<T>(logits.row(r));
    for (int c = 0; c < logits.cols(); ++c) {
      (*d_logits)(r, c) = static_cast<T>((p[c] - (c == labels[r] ? 1.0 : 0.0)) / b);
    }
  }
  return sum / b;
}

// Mean KL(target || softmax(logits)); d_logits = (softmax - target) / B.
template <typename T>
double TextTerm(const Matrix<T>& logits,
                std::span<const SegmentPhonemeDistribution> targets,
                Matrix<T>* d_logits) {
  const int b = logits.rows();
  d_logits->Resize(b, logits.cols());
  double sum = 0.0;
  for (int r = 0; r < b; ++r) {
    const auto p = SoftmaxRow<T>(logits.row(r));
    sum += KlDivergence(targets[r].probs, p);
    for (int c = 0; c < logits.cols(); ++c) {
      (*d_logits)(r, c) = static_cast<T>((p[c] - targets[r].probs[c]) / b);
    }
  }
  return sum / b;
}

void CheckFinite(double value, const char* term) {
  if (!std::isfinite(value)) {
    throw NumericError(std::string("non-finite loss term ") + term);
  }
}

template <typename T>
FrameBatch<T> Concatenate(std::span<const Matrix<T>> segments, int feature_dim,
                          int min_frames) {
  FrameBatch<T> batch;
  int total = 0;
  for (const auto& seg : segments) {
    if (seg.cols() != feature_dim) {
      throw ShapeError("segment has " + std::to_string(seg.cols()) +
                       " dims, network expects " + std::to_string(feature_dim));
    }
    if (seg.rows() < min_frames) {
      throw DomainError("segment has " + std::to_string(seg.rows()) +
                        " frames; the network needs at least " +
                        std::to_string(min_frames));
    }
    total += seg.rows();
    batch.offsets.push_back(total);
  }
  batch.frames.Resize(total, feature_dim);
  for (size_t s = 0; s < segments.size(); ++s) {
    std::copy(segments[s].data(), segments[s].data() + segments[s].size(),
              batch.frames.row(batch.offsets[s]).data());
  }
  return batch;
}

template <typename T>
void UpdateStackStats(TdnnStack<T>& stack, const TdnnStackTape<T>& tape,
                      double momentum) {
  for (size_t i = 0; i < stack.layers.size(); ++i) {
    UpdateRunningStats(stack.layers[i].bn, tape.layers[i].bn,
                       tape.layers[i].pre_activation.rows(), momentum);
  }
}

template <typename T>
void UpdateDenseStats(DenseLayer<T>& layer, const DenseCache<T>& cache,
                      double momentum) {
  UpdateRunningStats(layer.bn, cache.bn, cache.pre_activation.rows(), momentum);
}

template <typename T>
void UpdateSegmentStats(SegmentNet<T>& net, const SegmentNetTape<T>& tape,
                        double momentum) {
  UpdateStackStats(net.frames, tape.frames, momentum);
  UpdateDenseStats(net.embedding, tape.embedding, momentum);
  UpdateDenseStats(net.hidden, tape.hidden, momentum);
}

template <typename Net>
struct NetScalar;
template <typename T>
struct NetScalar<FactorizationNet<T>> {
  using type = T;
};
template <typename T>
struct NetScalar<BaselineNet<T>> {
  using type = T;
};

}  // namespace

template <typename T>
LossBreakdown FactorizationLoss(const FactorizationNet<T>& net,
                                const PairExamples<T>& examples,
                                FactorizationNet<T>* grad,
                                FactorizationTape<T>* tape) {
  const NetworkConfig& cfg = net.config;
  const int b = examples.batch_size();
  if (b < 1 || static_cast<int>(examples.text_index.size()) != b ||
      static_cast<int>(examples.speaker_labels.size()) != b ||
      static_cast<int>(examples.text_targets.size()) != b) {
    throw ShapeError("malformed pair batch");
  }
  for (int i = 0; i < b; ++i) {
    if (examples.speaker_labels[i] < 0 ||
        examples.speaker_labels[i] >= cfg.num_speakers) {
      throw RangeError("speaker label " + std::to_string(examples.speaker_labels[i]) +
                       " outside [0, " + std::to_string(cfg.num_speakers) + ")");
    }
    if (examples.text_targets[i].size() != cfg.num_phonemes) {
      throw ShapeError("phoneme target has wrong length");
    }
  }

  FactorizationTape<T> local_tape;
  FactorizationTape<T>& tp = tape ? *tape : local_tape;
  const FrameBatch<T> input = Concatenate<T>(examples.segments, cfg.feature_dim,
                                             cfg.MinFrames());
  const FrameBatch<T> generic =
      TdnnStackForward(net.generic, input, Mode::kTrain, &tp.generic);
  const FrameBatch<T> spk_in = GatherSegments(generic, std::span(examples.speaker_index));
  const FrameBatch<T> text_in = GatherSegments(generic, std::span(examples.text_index));
  auto spk = SegmentNetForward(net.speaker, spk_in, Mode::kTrain, &tp.speaker);
  auto text = SegmentNetForward(net.text, text_in, Mode::kTrain, &tp.text);
  auto comb = CombinationForward(net.combination, spk.embedding, text.embedding,
                                 Mode::kTrain, &tp.combination);

  LossBreakdown loss;
  Matrix<T> d_s1, d_t1, d_s2, d_t2;
  loss.l_s1 = SpeakerTerm(spk.logits, std::span(examples.speaker_labels), &d_s1);
  loss.l_t1 = TextTerm(text.logits, std::span(examples.text_targets), &d_t1);
  loss.l_s2 = SpeakerTerm(comb.speaker_logits, std::span(examples.speaker_labels), &d_s2);
  loss.l_t2 = TextTerm(comb.phoneme_logits, std::span(examples.text_targets), &d_t2);
  CheckFinite(loss.l_s1, "l_s1");
  CheckFinite(loss.l_t1, "l_t1");
  CheckFinite(loss.l_s2, "l_s2");
  CheckFinite(loss.l_t2, "l_t2");
  loss.total = loss.l_s1 + loss.l_t1 + loss.l_s2 + loss.l_t2;
  if (grad == nullptr) return loss;

  auto [d_spk_emb, d_text_emb] = CombinationBackward(
      net.combination, tp.combination, d_s2, d_t2, &grad->combination);
  Matrix<T> d_spk_in =
      SegmentNetBackward(net.speaker, tp.speaker, d_s1, d_spk_emb, &grad->speaker);
  Matrix<T> d_text_in =
      SegmentNetBackward(net.text, tp.text, d_t1, d_text_emb, &grad->text);
  Matrix<T> d_generic(generic.frames.rows(), generic.frames.cols());
  ScatterAddSegments(generic, std::span(examples.speaker_index), d_spk_in, &d_generic);
  ScatterAddSegments(generic, std::span(examples.text_index), d_text_in, &d_generic);
  TdnnStackBackward(net.generic, tp.generic, d_generic, &grad->generic);
  return loss;
}

template <typename T>
LossBreakdown BaselineLoss(const BaselineNet<T>& net,
                           std::span<const Matrix<T>> segments,
                           std::span<const int> labels, BaselineNet<T>* grad,
                           SegmentNetTape<T>* tape) {
  if (segments.empty() || segments.size() != labels.size()) {
    throw ShapeError("malformed baseline batch");
  }
  for (int label : labels) {
    if (label < 0 || label >= net.config.num_speakers) {
      throw RangeError("speaker label " + std::to_string(label) + " out of range");
    }
  }
  SegmentNetTape<T> local_tape;
  SegmentNetTape<T>& tp = tape ? *tape : local_tape;
  const FrameBatch<T> input =
      Concatenate<T>(segments, net.config.feature_dim, net.config.MinFrames());
  auto out = SegmentNetForward(net.net, input, Mode::kTrain, &tp);
  LossBreakdown loss;
  Matrix<T> d_logits;
  loss.l_s1 = SpeakerTerm(out.logits, labels, &d_logits);
  CheckFinite(loss.l_s1, "l_s1");
  loss.total = loss.l_s1;
  if (grad != nullptr) {
    SegmentNetBackward(net.net, tp, d_logits, Matrix<T>(), &grad->net);
  }
  return loss;
}

template <typename Net>
void SgdOptimizer<Net>::Step(Net& net, const Net& grad) {
  using T = typename NetScalar<Net>::type;
  std::vector<std::span<T>> params, velocity;
  std::vector<std::span<const T>> grads;
  VisitNet(net, [&](std::span<T> s) { params.push_back(s); }, false);
  VisitNet(velocity_, [&](std::span<T> s) { velocity.push_back(s); }, false);
  VisitNet(grad, [&](std::span<const T> s) { grads.push_back(s); }, false);
  const T lr = static_cast<T>(config_.learning_rate);
  const T momentum = static_cast<T>(config_.momentum);
  const T decay = static_cast<T>(config_.weight_decay);
  for (size_t i = 0; i < params.size(); ++i) {
    T* __restrict w = params[i].data();
    T* __restrict v = velocity[i].data();
    const T* __restrict g = grads[i].data();
    for (size_t j = 0; j < params[i].size(); ++j) {
      v[j] = momentum * v[j] + (g[j] + decay * w[j]);
      w[j] -= lr * v[j];
    }
  }
}

template <typename T>
LossBreakdown TrainingStep(FactorizationNet<T>& net,
                           const PairExamples<T>& examples,
                           SgdOptimizer<FactorizationNet<T>>& optimizer) {
  FactorizationNet<T> grad = ZerosLike(net);
  FactorizationTape<T> tape;
  const LossBreakdown loss = FactorizationLoss(net, examples, &grad, &tape);
  optimizer.Step(net, grad);
  const double m = net.config.bn_momentum;
  UpdateStackStats(net.generic, tape.generic, m);
  UpdateSegmentStats(net.speaker, tape.speaker, m);
  UpdateSegmentStats(net.text, tape.text, m);
  UpdateDenseStats(net.combination.shared_embedding,
                   tape.combination.shared_embedding, m);
  UpdateDenseStats(net.combination.shared_hidden, tape.combination.shared_hidden, m);
  return loss;
}

template <typename T>
LossBreakdown BaselineTrainingStep(BaselineNet<T>& net,
                                   std::span<const Matrix<T>> segments,
                                   std::span<const int> labels,
                                   SgdOptimizer<BaselineNet<T>>& optimizer) {
  BaselineNet<T> grad = ZerosLike(net);
  SegmentNetTape<T> tape;
  const LossBreakdown loss = BaselineLoss(net, segments, labels, &grad, &tape);
  optimizer.Step(net, grad);
  UpdateSegmentStats(net.net, tape, net.config.bn_momentum);
  return loss;
}

nlohmann::json EpochLogJson(const EpochLog& log) {
  return {{"epoch", log.epoch},         {"l_s1", log.loss.l_s1},
          {"l_t1", log.loss.l_t1},      {"l_s2", log.loss.l_s2},
          {"l_t2", log.loss.l_t2},      {"total", log.loss.total},
          {"wall_time", log.wall_time},
          {"skipped_utterances", log.skipped_utterances},
          {"pair_fallbacks", log.pair_fallbacks}};
}

namespace {

enum SeedStream : uint64_t { kInitStream = 1, kCropStream = 2, kOrderStream = 3 };

void Accumulate(LossBreakdown& acc, const LossBreakdown& step) {
  acc.l_s1 += step.l_s1;
  acc.l_t1 += step.l_t1;
  acc.l_s2 += step.l_s2;
  acc.l_t2 += step.l_t2;
  acc.total += step.total;
}

void Scale(LossBreakdown& acc, double factor) {
  acc.l_s1 *= factor;
  acc.l_t1 *= factor;
  acc.l_s2 *= factor;
  acc.l_t2 *= factor;
  acc.total *= factor;
}

// Shared epoch loop. step(crops, anchors, rng) trains on one batch and
// returns its loss.
template <typename StepFn>
std::vector<EpochLog> RunEpochs(const Corpus& corpus,
                                const TrainingConfig& config,
                                const CropResult& first_epoch, StepFn&& step,
                                const EpochCallback& on_epoch) {
  std::vector<EpochLog> history;
  std::mt19937_64 rng(DeriveSeed(config.seed, kOrderStream));
  const auto start_time = std::chrono::steady_clock::now();
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const CropResult crops =
        epoch == 1 ? first_epoch
                   : CropTrainingSegments(corpus, config.min_crop_frames,
                                          config.max_crop_frames,
                                          DeriveSeed(config.seed, kCropStream, epoch - 1));
    std::vector<int> order(crops.segments.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);

    const int n = static_cast<int>(order.size());
    const int batch = std::min(config.batch_size, n);
    EpochLog log;
    log.epoch = epoch;
    log.skipped_utterances = crops.skipped;
    int num_batches = 0;
    for (int begin = 0; begin + batch <= n; begin += batch) {
      std::span<const int> anchors(order.data() + begin, batch);
      Accumulate(log.loss, step(crops, anchors, rng, log));
      ++num_batches;
    }
    Scale(log.loss, 1.0 / num_batches);
    log.wall_time = std::chrono::duration<double>(
                        std::chrono::steady_clock::now() - start_time)
                        .count();
    history.push_back(log);
    if (on_epoch) on_epoch(log);
  }
  return history;
}

CropResult FirstCrops(const Corpus& corpus, const TrainingConfig& config) {
  CropResult crops = CropTrainingSegments(corpus, config.min_crop_frames,
                                          config.max_crop_frames,
                                          DeriveSeed(config.seed, kCropStream, 0));
  if (crops.segments.empty()) {
    throw ValidationError("training split has no utterance of at least " +
                          std::to_string(config.min_crop_frames) + " frames");
  }
  return crops;
}

NetworkConfig FillFromCorpus(NetworkConfig network, const Corpus& corpus,
                             const CropResult& crops,
                             const TrainingConfig& config) {
  network.feature_dim = corpus.config.feature_dim;
  network.num_phonemes = corpus.config.num_phonemes;
  network.num_speakers = crops.num_speakers;
  if (config.min_crop_frames < network.MinFrames()) {
    throw ValidationError("min_crop_frames " + std::to_string(config.min_crop_frames) +
                          " is below the receptive field of " +
                          std::to_string(network.MinFrames()) + " frames");
  }
  return network;
}

}  // namespace

FitResult<FactorizationNet<float>> FitFactorization(const Corpus& corpus,
                                                    NetworkConfig network,
                                                    const TrainingConfig& config,
                                                    const EpochCallback& on_epoch) {
  config.Validate();
  const CropResult first = FirstCrops(corpus, config);
  network = FillFromCorpus(network, corpus, first, config);
  FitResult<FactorizationNet<float>> result;
  result.net = InitFactorizationNet<float>(network, DeriveSeed(config.seed, kInitStream));
  SgdOptimizer<FactorizationNet<float>> optimizer(result.net, config);
  auto step = [&](const CropResult& crops, std::span<const int> anchors,
                  std::mt19937_64& rng, EpochLog& log) {
    const PairBatch pairs = SamplePairBatch(
        crops.segments, anchors, config.identical_pair_probability, rng);
    log.pair_fallbacks += pairs.fallbacks;
    return TrainingStep(result.net, MakePairExamples(crops.segments, pairs),
                        optimizer);
  };
  result.history = RunEpochs(corpus, config, first, step, on_epoch);
  return result;
}

FitResult<BaselineNet<float>> FitBaseline(const Corpus& corpus,
                                          NetworkConfig network,
                                          const TrainingConfig& config,
                                          const EpochCallback& on_epoch) {
  config.Validate();
  const CropResult first = FirstCrops(corpus, config);
  network = FillFromCorpus(network, corpus, first, config);
  FitResult<BaselineNet<float>> result;
  result.net = InitBaselineNet<float>(network, DeriveSeed(config.seed, kInitStream));
  SgdOptimizer<BaselineNet<float>> optimizer(result.net, config);
  auto step = [&](const CropResult& crops, std::span<const int> anchors,
                  std::mt19937_64&, EpochLog&) {
    std::vector<Matrix<float>> segments;
    std::vector<int> labels;
    for (int a : anchors) {
      segments.push_back(crops.segments[a].features);
      labels.push_back(crops.segments[a].speaker_label);
    }
    return BaselineTrainingStep(result.net, std::span<const Matrix<float>>(segments),
                                std::span<const int>(labels), optimizer);
  };
  result.history = RunEpochs(corpus, config, first, step, on_epoch);
  return result;
}

#define STF_INSTANTIATE_TRAINING(T)                                            \
  template double CrossEntropy<T>(std::span<const T>, int);                    \
  template LossBreakdown FactorizationLoss(const FactorizationNet<T>&,         \
                                           const PairExamples<T>&,             \
                                           FactorizationNet<T>*,               \
                                           FactorizationTape<T>*);             \
  template LossBreakdown BaselineLoss(const BaselineNet<T>&,                   \
                                      std::span<const Matrix<T>>,              \
                                      std::span<const int>, BaselineNet<T>*,   \
                                      SegmentNetTape<T>*);                     \
  template class SgdOptimizer<FactorizationNet<T>>;                            \
  template class SgdOptimizer<BaselineNet<T>>;                                 \
  template LossBreakdown TrainingStep(FactorizationNet<T>&,                    \
                                      const PairExamples<T>&,                  \
                                      SgdOptimizer<FactorizationNet<T>>&);     \
  template LossBreakdown BaselineTrainingStep(BaselineNet<T>&,                 \
                                              std::span<const Matrix<T>>,      \
                                              std::span<const int>,            \
                                              SgdOptimizer<BaselineNet<T>>&);

STF_INSTANTIATE_TRAINING(float)
STF_INSTANTIATE_TRAINING(double)

#undef STF_INSTANTIATE_TRAINING

}  // namespace stf
