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

#ifndef STF_NETWORK_H_
#define STF_NETWORK_H_

// The baseline x-vector TDNN and the speaker-text factorization network.
//
// Factorization layout:
//   generic      3 time-delay layers shared by both branches
//   speaker      2 time-delay layers, stats pooling, 2 dense, speaker head
//   text         same shape as speaker, phoneme-distribution head
//   combination  2 shared dense layers over [ebd_s, ebd_t], speaker head and
//                phoneme-distribution head
// The baseline is 5 time-delay layers, pooling, 2 dense and a speaker head,
// which is layer-for-layer generic ++ speaker.
//
// Every embedding is the pre-activation of the first dense layer after the
// point where it is tapped.

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "stf/layers.h"
#include "stf/matrix.h"

namespace stf {

enum class EmbeddingKind { kSpk, kText, kCombined };
std::string EmbeddingKindName(EmbeddingKind kind);

struct NetworkConfig {
  int feature_dim = 40;
  int num_speakers = 0;
  int num_phonemes = 40;
  std::vector<std::vector<int>> context_offsets = {
      {-2, -1, 0, 1, 2}, {-2, 0, 2}, {-3, 0, 3}, {0}, {0}};
  std::vector<int> frame_dims = {64, 64, 64, 64, 128};
  // Leading time-delay layers that form the generic feature learner.
  int num_generic_layers = 3;
  int embedding_dim = 64;   // spk and text embeddings
  int combined_dim = 128;
  double bn_momentum = 0.1;

  void Validate() const;
  // Shortest input (in frames) that yields at least one pooled frame.
  int MinFrames() const;
  int EmbeddingDim(EmbeddingKind kind) const;

  bool operator==(const NetworkConfig&) const = default;
};

void to_json(nlohmann::json& j, const NetworkConfig& c);
void from_json(const nlohmann::json& j, NetworkConfig& c);
void to_json(nlohmann::json& j, const LayerSpec& s);
void from_json(const nlohmann::json& j, LayerSpec& s);

struct Embedding {
  EmbeddingKind kind = EmbeddingKind::kSpk;
  std::vector<double> values;

  int size() const { return static_cast<int>(values.size()); }
  bool operator==(const Embedding&) const = default;
};

template <typename T>
struct TdnnStack {
  std::vector<TimeDelayLayer<T>> layers;
};

// time-delay stack -> stats pooling -> dense (embedding) -> dense -> head
template <typename T>
struct SegmentNet {
  TdnnStack<T> frames;
  DenseLayer<T> embedding;
  DenseLayer<T> hidden;
  OutputLayer<T> head;
};

template <typename T>
struct CombinationNet {
  DenseLayer<T> shared_embedding;
  DenseLayer<T> shared_hidden;
  OutputLayer<T> speaker_head;
  OutputLayer<T> phoneme_head;
};

template <typename T>
struct FactorizationNet {
  NetworkConfig config;
  TdnnStack<T> generic;
  SegmentNet<T> speaker;
  SegmentNet<T> text;
  CombinationNet<T> combination;
};

template <typename T>
struct BaselineNet {
  NetworkConfig config;
  SegmentNet<T> net;
};

std::vector<LayerSpec> GenericLayerSpecs(const NetworkConfig& config);
std::vector<LayerSpec> SpeakerLayerSpecs(const NetworkConfig& config);
std::vector<LayerSpec> TextLayerSpecs(const NetworkConfig& config);
std::vector<LayerSpec> CombinationLayerSpecs(const NetworkConfig& config);
std::vector<LayerSpec> BaselineLayerSpecs(const NetworkConfig& config);

template <typename T>
std::vector<LayerSpec> LayerSpecs(const TdnnStack<T>& stack);
template <typename T>
std::vector<LayerSpec> LayerSpecs(const SegmentNet<T>& net);
template <typename T>
std::vector<LayerSpec> LayerSpecs(const CombinationNet<T>& net);

// Weights ~ U(-sqrt(6 / fan_in), +sqrt(6 / fan_in)), biases zero, batch norm
// at the identity. Deterministic in seed.
template <typename T>
FactorizationNet<T> InitFactorizationNet(const NetworkConfig& config,
                                         uint64_t seed);
template <typename T>
BaselineNet<T> InitBaselineNet(const NetworkConfig& config, uint64_t seed);

// ---- Visitors over trainable tensors and batch-norm running statistics.

template <typename Stack, typename F>
void VisitStack(Stack& stack, F&& f, bool buffers) {
  for (auto& layer : stack.layers) {
    buffers ? VisitBuffers(layer, f) : VisitParams(layer, f);
  }
}

template <typename Net, typename F>
void VisitSegmentNet(Net& net, F&& f, bool buffers) {
  VisitStack(net.frames, f, buffers);
  if (buffers) {
    VisitBuffers(net.embedding, f);
    VisitBuffers(net.hidden, f);
  } else {
    VisitParams(net.embedding, f);
    VisitParams(net.hidden, f);
    VisitParams(net.head, f);
  }
}

template <typename Net, typename F>
void VisitCombinationNet(Net& net, F&& f, bool buffers) {
  if (buffers) {
    VisitBuffers(net.shared_embedding, f);
    VisitBuffers(net.shared_hidden, f);
  } else {
    VisitParams(net.shared_embedding, f);
    VisitParams(net.shared_hidden, f);
    VisitParams(net.speaker_head, f);
    VisitParams(net.phoneme_head, f);
  }
}

template <typename Net, typename F>
void VisitNet(Net& net, F&& f, bool buffers) {
  if constexpr (requires { net.combination; }) {
    VisitStack(net.generic, f, buffers);
    VisitSegmentNet(net.speaker, f, buffers);
    VisitSegmentNet(net.text, f, buffers);
    VisitCombinationNet(net.combination, f, buffers);
  } else {
    VisitSegmentNet(net.net, f, buffers);
  }
}

// Same structure with every tensor zeroed; used for gradients and momentum.
template <typename Net>
Net ZerosLike(const Net& net) {
  Net zeros = net;
  auto clear = [](auto span) { std::fill(span.begin(), span.end(), 0); };
  VisitNet(zeros, clear, false);
  VisitNet(zeros, clear, true);
  return zeros;
}

template <typename Net>
size_t CountParams(const Net& net) {
  size_t n = 0;
  VisitNet(net, [&](auto span) { n += span.size(); }, false);
  return n;
}

// ---- Batched passes with recorded tapes, used by training.

template <typename T>
struct TdnnStackTape {
  std::vector<TimeDelayCache<T>> layers;
};

template <typename T>
FrameBatch<T> TdnnStackForward(const TdnnStack<T>& stack,
                               const FrameBatch<T>& input, Mode mode,
                               TdnnStackTape<T>* tape);
template <typename T>
Matrix<T> TdnnStackBackward(const TdnnStack<T>& stack,
                            const TdnnStackTape<T>& tape,
                            const Matrix<T>& d_out, TdnnStack<T>* grad);

template <typename T>
struct SegmentNetOutput {
  Matrix<T> embedding;  // B x embedding_dim
  Matrix<T> logits;     // B x head size
};

template <typename T>
struct SegmentNetTape {
  TdnnStackTape<T> frames;
  StatsPoolCache<T> pool;
  DenseCache<T> embedding;
  DenseCache<T> hidden;
  Matrix<T> hidden_output;
};

template <typename T>
SegmentNetOutput<T> SegmentNetForward(const SegmentNet<T>& net,
                                      const FrameBatch<T>& input, Mode mode,
                                      SegmentNetTape<T>* tape);

// d_embedding may be empty. Returns the gradient w.r.t. the input frames.
template <typename T>
Matrix<T> SegmentNetBackward(const SegmentNet<T>& net,
                             const SegmentNetTape<T>& tape,
                             const Matrix<T>& d_logits,
                             const Matrix<T>& d_embedding, SegmentNet<T>* grad);

template <typename T>
struct CombinationOutput {
  Matrix<T> combined;
  Matrix<T> speaker_logits;
  Matrix<T> phoneme_logits;
};

template <typename T>
struct CombinationTape {
  DenseCache<T> shared_embedding;
  DenseCache<T> shared_hidden;
  Matrix<T> hidden_output;
};

template <typename T>
CombinationOutput<T> CombinationForward(const CombinationNet<T>& net,
                                        const Matrix<T>& spk_embedding,
                                        const Matrix<T>& text_embedding,
                                        Mode mode, CombinationTape<T>* tape);

// Returns (d_spk_embedding, d_text_embedding).
template <typename T>
std::pair<Matrix<T>, Matrix<T>> CombinationBackward(
    const CombinationNet<T>& net, const CombinationTape<T>& tape,
    const Matrix<T>& d_speaker_logits, const Matrix<T>& d_phoneme_logits,
    CombinationNet<T>* grad);

// Row-wise softmax with max subtraction.
template <typename T>
Matrix<T> SoftmaxRows(const Matrix<T>& logits);

// ---- Single-utterance inference (batch norm uses running statistics).

struct SpeakerOutput {
  Embedding embedding;
  std::vector<double> logits;
};

struct TextOutput {
  Embedding embedding;
  std::vector<double> distribution;
};

struct CombinedOutput {
  Embedding combined;
  std::vector<double> speaker_logits;
  std::vector<double> phoneme_distribution;
};

// Throws DomainError when features has fewer than config.MinFrames() rows.
template <typename T>
SpeakerOutput ForwardSpeaker(const FactorizationNet<T>& net,
                             const Matrix<T>& features);
template <typename T>
SpeakerOutput ForwardSpeaker(const BaselineNet<T>& net,
                             const Matrix<T>& features);
template <typename T>
TextOutput ForwardText(const FactorizationNet<T>& net,
                       const Matrix<T>& features);
// Throws ValidationError on wrong embedding kinds, ShapeError on lengths.
template <typename T>
CombinedOutput ForwardCombined(const FactorizationNet<T>& net,
                               const Embedding& spk, const Embedding& text);

}  // namespace stf

#endif  // STF_NETWORK_H_
