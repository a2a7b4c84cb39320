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

#include "stf/network.h"

#include <cmath>
#include <random>

#include "stf/error.h"

namespace stf {

std::string EmbeddingKindName(EmbeddingKind kind) {
  switch (kind) {
    case EmbeddingKind::kSpk:
      return "spk";
    case EmbeddingKind::kText:
      return "text";
    case EmbeddingKind::kCombined:
      return "combined";
  }
  return "unknown";
}

void NetworkConfig::Validate() const {
  auto fail = [](const std::string& msg) {
    throw ValidationError("network config: " + msg);
  };
  if (feature_dim < 1) fail("feature_dim must be positive");
  if (num_speakers < 1) fail("num_speakers must be positive");
  if (num_phonemes < 2) fail("num_phonemes must be at least 2");
  if (frame_dims.size() != context_offsets.size()) {
    fail("frame_dims and context_offsets differ in length");
  }
  const int num_layers = static_cast<int>(frame_dims.size());
  if (num_generic_layers < 1 || num_generic_layers >= num_layers) {
    fail("num_generic_layers must leave at least one layer per sub-net");
  }
  for (int i = 0; i < num_layers; ++i) {
    if (frame_dims[i] < 1) fail("frame_dims must be positive");
    const auto& offsets = context_offsets[i];
    if (offsets.empty()) fail("empty context offsets");
    for (size_t k = 1; k < offsets.size(); ++k) {
      if (offsets[k] <= offsets[k - 1]) {
        fail("context offsets must be strictly ascending");
      }
    }
  }
  if (embedding_dim < 1 || combined_dim < 1) fail("embedding dims must be positive");
  if (!(bn_momentum > 0.0 && bn_momentum <= 1.0)) fail("bn_momentum must be in (0, 1]");
}

int NetworkConfig::MinFrames() const {
  int frames = 1;
  for (const auto& offsets : context_offsets) {
    frames += offsets.back() - offsets.front();
  }
  return frames;
}

int NetworkConfig::EmbeddingDim(EmbeddingKind kind) const {
  return kind == EmbeddingKind::kCombined ? combined_dim : embedding_dim;
}

void to_json(nlohmann::json& j, const NetworkConfig& c) {
  j = nlohmann::json{{"feature_dim", c.feature_dim},
                     {"num_speakers", c.num_speakers},
                     {"num_phonemes", c.num_phonemes},
                     {"context_offsets", c.context_offsets},
                     {"frame_dims", c.frame_dims},
                     {"num_generic_layers", c.num_generic_layers},
                     {"embedding_dim", c.embedding_dim},
                     {"combined_dim", c.combined_dim},
                     {"bn_momentum", c.bn_momentum}};
}

void from_json(const nlohmann::json& j, NetworkConfig& c) {
  NetworkConfig defaults;
  c.feature_dim = j.value("feature_dim", defaults.feature_dim);
  c.num_speakers = j.value("num_speakers", defaults.num_speakers);
  c.num_phonemes = j.value("num_phonemes", defaults.num_phonemes);
  c.context_offsets = j.value("context_offsets", defaults.context_offsets);
  c.frame_dims = j.value("frame_dims", defaults.frame_dims);
  c.num_generic_layers =
      j.value("num_generic_layers", defaults.num_generic_layers);
  c.embedding_dim = j.value("embedding_dim", defaults.embedding_dim);
  c.combined_dim = j.value("combined_dim", defaults.combined_dim);
  c.bn_momentum = j.value("bn_momentum", defaults.bn_momentum);
}

void to_json(nlohmann::json& j, const LayerSpec& s) {
  j = nlohmann::json{{"kind", LayerKindName(s.kind)},
                     {"input_dim", s.input_dim},
                     {"output_dim", s.output_dim}};
  if (s.kind == LayerKind::kTimeDelay) j["context_offsets"] = s.context_offsets;
}

void from_json(const nlohmann::json& j, LayerSpec& s) {
  s.kind = ParseLayerKind(j.at("kind").get<std::string>());
  s.input_dim = j.at("input_dim").get<int>();
  s.output_dim = j.at("output_dim").get<int>();
  s.context_offsets = j.value("context_offsets", std::vector<int>{});
}

namespace {

LayerSpec TimeDelaySpec(const NetworkConfig& c, int i) {
  return {LayerKind::kTimeDelay, i == 0 ? c.feature_dim : c.frame_dims[i - 1],
          c.frame_dims[i], c.context_offsets[i]};
}

std::vector<LayerSpec> SegmentSpecs(const NetworkConfig& c, int first_layer,
                                    int head_dim) {
  std::vector<LayerSpec> specs;
  const int num_layers = static_cast<int>(c.frame_dims.size());
  for (int i = first_layer; i < num_layers; ++i) {
    specs.push_back(TimeDelaySpec(c, i));
  }
  const int pooled_in = c.frame_dims.back();
  specs.push_back({LayerKind::kStatsPool, pooled_in, 2 * pooled_in, {}});
  specs.push_back({LayerKind::kDense, 2 * pooled_in, c.embedding_dim, {}});
  specs.push_back({LayerKind::kDense, c.embedding_dim, c.embedding_dim, {}});
  specs.push_back({LayerKind::kOutputHead, c.embedding_dim, head_dim, {}});
  return specs;
}

template <typename T>
void FillUniform(std::span<T> values, int fan_in, std::mt19937_64& rng) {
  const double bound = std::sqrt(6.0 / fan_in);
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (T& v : values) v = static_cast<T>(dist(rng));
}

template <typename T>
TimeDelayLayer<T> MakeTimeDelay(const LayerSpec& spec, std::mt19937_64& rng) {
  TimeDelayLayer<T> layer;
  layer.spec = spec;
  const int fan_in =
      static_cast<int>(spec.context_offsets.size()) * spec.input_dim;
  layer.weight = Matrix<T>(fan_in, spec.output_dim);
  FillUniform(layer.weight.values(), fan_in, rng);
  layer.bias.assign(spec.output_dim, T(0));
  layer.bn = BatchNorm<T>(spec.output_dim);
  return layer;
}

template <typename T>
DenseLayer<T> MakeDense(const LayerSpec& spec, std::mt19937_64& rng) {
  DenseLayer<T> layer;
  layer.spec = spec;
  layer.weight = Matrix<T>(spec.input_dim, spec.output_dim);
  FillUniform(layer.weight.values(), spec.input_dim, rng);
  layer.bias.assign(spec.output_dim, T(0));
  layer.bn = BatchNorm<T>(spec.output_dim);
  return layer;
}

template <typename T>
OutputLayer<T> MakeOutput(const LayerSpec& spec, std::mt19937_64& rng) {
  OutputLayer<T> layer;
  layer.spec = spec;
  layer.weight = Matrix<T>(spec.input_dim, spec.output_dim);
  FillUniform(layer.weight.values(), spec.input_dim, rng);
  layer.bias.assign(spec.output_dim, T(0));
  return layer;
}

template <typename T>
TdnnStack<T> MakeStack(std::span<const LayerSpec> specs, std::mt19937_64& rng) {
  TdnnStack<T> stack;
  for (const auto& spec : specs) {
    stack.layers.push_back(MakeTimeDelay<T>(spec, rng));
  }
  return stack;
}

// specs: time-delay layers, stats_pool, dense, dense, output_head.
template <typename T>
SegmentNet<T> MakeSegmentNet(const std::vector<LayerSpec>& specs,
                             std::mt19937_64& rng) {
  const size_t num_td = specs.size() - 4;
  SegmentNet<T> net;
  net.frames = MakeStack<T>(std::span(specs).first(num_td), rng);
  net.embedding = MakeDense<T>(specs[num_td + 1], rng);
  net.hidden = MakeDense<T>(specs[num_td + 2], rng);
  net.head = MakeOutput<T>(specs[num_td + 3], rng);
  return net;
}

template <typename T>
std::vector<double> RowToVector(const Matrix<T>& m, int r) {
  auto row = m.row(r);
  return {row.begin(), row.end()};
}

template <typename T>
FrameBatch<T> SingleSegment(const NetworkConfig& config,
                            const Matrix<T>& features) {
  if (features.cols() != config.feature_dim) {
    throw ShapeError("features have " + std::to_string(features.cols()) +
                     " dims, network expects " +
                     std::to_string(config.feature_dim));
  }
  if (features.rows() < config.MinFrames()) {
    throw DomainError("utterance has " + std::to_string(features.rows()) +
                      " frames; the network needs at least " +
                      std::to_string(config.MinFrames()));
  }
  FrameBatch<T> batch;
  batch.frames = features;
  batch.offsets = {0, features.rows()};
  return batch;
}

}  // namespace

std::vector<LayerSpec> GenericLayerSpecs(const NetworkConfig& config) {
  std::vector<LayerSpec> specs;
  for (int i = 0; i < config.num_generic_layers; ++i) {
    specs.push_back(TimeDelaySpec(config, i));
  }
  return specs;
}

std::vector<LayerSpec> SpeakerLayerSpecs(const NetworkConfig& config) {
  return SegmentSpecs(config, config.num_generic_layers, config.num_speakers);
}

std::vector<LayerSpec> TextLayerSpecs(const NetworkConfig& config) {
  return SegmentSpecs(config, config.num_generic_layers, config.num_phonemes);
}

std::vector<LayerSpec> CombinationLayerSpecs(const NetworkConfig& config) {
  const int in = 2 * config.embedding_dim;
  const int mid = config.combined_dim;
  return {{LayerKind::kDense, in, mid, {}},
          {LayerKind::kDense, mid, mid, {}},
          {LayerKind::kOutputHead, mid, config.num_speakers, {}},
          {LayerKind::kOutputHead, mid, config.num_phonemes, {}}};
}

std::vector<LayerSpec> BaselineLayerSpecs(const NetworkConfig& config) {
  return SegmentSpecs(config, 0, config.num_speakers);
}

template <typename T>
std::vector<LayerSpec> LayerSpecs(const TdnnStack<T>& stack) {
  std::vector<LayerSpec> specs;
  for (const auto& layer : stack.layers) specs.push_back(layer.spec);
  return specs;
}

template <typename T>
std::vector<LayerSpec> LayerSpecs(const SegmentNet<T>& net) {
  std::vector<LayerSpec> specs = LayerSpecs(net.frames);
  const int d = specs.back().output_dim;
  specs.push_back({LayerKind::kStatsPool, d, 2 * d, {}});
  specs.push_back(net.embedding.spec);
  specs.push_back(net.hidden.spec);
  specs.push_back(net.head.spec);
  return specs;
}

template <typename T>
std::vector<LayerSpec> LayerSpecs(const CombinationNet<T>& net) {
  return {net.shared_embedding.spec, net.shared_hidden.spec,
          net.speaker_head.spec, net.phoneme_head.spec};
}

template <typename T>
FactorizationNet<T> InitFactorizationNet(const NetworkConfig& config,
                                         uint64_t seed) {
  config.Validate();
  std::mt19937_64 rng(seed);
  FactorizationNet<T> net;
  net.config = config;
  const auto generic = GenericLayerSpecs(config);
  net.generic = MakeStack<T>(generic, rng);
  net.speaker = MakeSegmentNet<T>(SpeakerLayerSpecs(config), rng);
  net.text = MakeSegmentNet<T>(TextLayerSpecs(config), rng);
  const auto comb = CombinationLayerSpecs(config);
  net.combination.shared_embedding = MakeDense<T>(comb[0], rng);
  net.combination.shared_hidden = MakeDense<T>(comb[1], rng);
  net.combination.speaker_head = MakeOutput<T>(comb[2], rng);
  net.combination.phoneme_head = MakeOutput<T>(comb[3], rng);
  return net;
}

template <typename T>
BaselineNet<T> InitBaselineNet(const NetworkConfig& config, uint64_t seed) {
  config.Validate();
  std::mt19937_64 rng(seed);
  BaselineNet<T> net;
  net.config = config;
  net.net = MakeSegmentNet<T>(BaselineLayerSpecs(config), rng);
  return net;
}

template <typename T>
FrameBatch<T> TdnnStackForward(const TdnnStack<T>& stack,
                               const FrameBatch<T>& input, Mode mode,
                               TdnnStackTape<T>* tape) {
  if (tape != nullptr) tape->layers.resize(stack.layers.size());
  FrameBatch<T> h = input;
  for (size_t i = 0; i < stack.layers.size(); ++i) {
    h = TimeDelayForward(stack.layers[i], h, mode,
                         tape ? &tape->layers[i] : nullptr);
  }
  return h;
}

template <typename T>
Matrix<T> TdnnStackBackward(const TdnnStack<T>& stack,
                            const TdnnStackTape<T>& tape,
                            const Matrix<T>& d_out, TdnnStack<T>* grad) {
  Matrix<T> d = d_out;
  for (size_t i = stack.layers.size(); i-- > 0;) {
    d = TimeDelayBackward(stack.layers[i], tape.layers[i], d,
                          &grad->layers[i]);
  }
  return d;
}

template <typename T>
SegmentNetOutput<T> SegmentNetForward(const SegmentNet<T>& net,
                                      const FrameBatch<T>& input, Mode mode,
                                      SegmentNetTape<T>* tape) {
  FrameBatch<T> h =
      TdnnStackForward(net.frames, input, mode, tape ? &tape->frames : nullptr);
  Matrix<T> pooled = StatsPoolForward(h, tape ? &tape->pool : nullptr);
  DenseOutput<T> emb = DenseForward(net.embedding, pooled, mode,
                                    tape ? &tape->embedding : nullptr);
  DenseOutput<T> hid = DenseForward(net.hidden, emb.output, mode,
                                    tape ? &tape->hidden : nullptr);
  SegmentNetOutput<T> out;
  out.logits = OutputForward(net.head, hid.output);
  out.embedding = std::move(emb.pre_activation);
  if (tape != nullptr) tape->hidden_output = std::move(hid.output);
  return out;
}

template <typename T>
Matrix<T> SegmentNetBackward(const SegmentNet<T>& net,
                             const SegmentNetTape<T>& tape,
                             const Matrix<T>& d_logits,
                             const Matrix<T>& d_embedding,
                             SegmentNet<T>* grad) {
  Matrix<T> d_hidden =
      OutputBackward(net.head, tape.hidden_output, d_logits, &grad->head);
  Matrix<T> d_emb_out =
      DenseBackward(net.hidden, tape.hidden, d_hidden, Matrix<T>(), &grad->hidden);
  Matrix<T> d_pooled = DenseBackward(net.embedding, tape.embedding, d_emb_out,
                                     d_embedding, &grad->embedding);
  Matrix<T> d_frames = StatsPoolBackward(tape.pool, d_pooled);
  return TdnnStackBackward(net.frames, tape.frames, d_frames, &grad->frames);
}

template <typename T>
CombinationOutput<T> CombinationForward(const CombinationNet<T>& net,
                                        const Matrix<T>& spk_embedding,
                                        const Matrix<T>& text_embedding,
                                        Mode mode, CombinationTape<T>* tape) {
  if (spk_embedding.rows() != text_embedding.rows()) {
    throw ShapeError("combination inputs differ in batch size");
  }
  const int b = spk_embedding.rows();
  const int ds = spk_embedding.cols();
  const int dt = text_embedding.cols();
  Matrix<T> joined(b, ds + dt);
  for (int r = 0; r < b; ++r) {
    std::copy_n(spk_embedding.row(r).data(), ds, joined.row(r).data());
    std::copy_n(text_embedding.row(r).data(), dt, joined.row(r).data() + ds);
  }
  DenseOutput<T> emb = DenseForward(net.shared_embedding, joined, mode,
                                    tape ? &tape->shared_embedding : nullptr);
  DenseOutput<T> hid = DenseForward(net.shared_hidden, emb.output, mode,
                                    tape ? &tape->shared_hidden : nullptr);
  CombinationOutput<T> out;
  out.speaker_logits = OutputForward(net.speaker_head, hid.output);
  out.phoneme_logits = OutputForward(net.phoneme_head, hid.output);
  out.combined = std::move(emb.pre_activation);
  if (tape != nullptr) tape->hidden_output = std::move(hid.output);
  return out;
}

template <typename T>
std::pair<Matrix<T>, Matrix<T>> CombinationBackward(
    const CombinationNet<T>& net, const CombinationTape<T>& tape,
    const Matrix<T>& d_speaker_logits, const Matrix<T>& d_phoneme_logits,
    CombinationNet<T>* grad) {
  Matrix<T> d_hidden = OutputBackward(net.speaker_head, tape.hidden_output,
                                      d_speaker_logits, &grad->speaker_head);
  Matrix<T> d_hidden_ph = OutputBackward(net.phoneme_head, tape.hidden_output,
                                         d_phoneme_logits, &grad->phoneme_head);
  for (size_t i = 0; i < d_hidden.size(); ++i) {
    d_hidden.data()[i] += d_hidden_ph.data()[i];
  }
  Matrix<T> d_emb_out = DenseBackward(net.shared_hidden, tape.shared_hidden,
                                      d_hidden, Matrix<T>(), &grad->shared_hidden);
  Matrix<T> d_joined =
      DenseBackward(net.shared_embedding, tape.shared_embedding, d_emb_out,
                    Matrix<T>(), &grad->shared_embedding);
  const int b = d_joined.rows();
  const int ds = net.shared_embedding.spec.input_dim / 2;
  const int dt = d_joined.cols() - ds;
  Matrix<T> d_spk(b, ds), d_text(b, dt);
  for (int r = 0; r < b; ++r) {
    std::copy_n(d_joined.row(r).data(), ds, d_spk.row(r).data());
    std::copy_n(d_joined.row(r).data() + ds, dt, d_text.row(r).data());
  }
  return {std::move(d_spk), std::move(d_text)};
}

template <typename T>
Matrix<T> SoftmaxRows(const Matrix<T>& logits) {
  Matrix<T> probs(logits.rows(), logits.cols());
  for (int r = 0; r < logits.rows(); ++r) {
    auto in = logits.row(r);
    auto out = probs.row(r);
    const T max = *std::max_element(in.begin(), in.end());
    double sum = 0.0;
    for (size_t c = 0; c < in.size(); ++c) sum += std::exp(double(in[c] - max));
    for (size_t c = 0; c < in.size(); ++c) {
      out[c] = static_cast<T>(std::exp(double(in[c] - max)) / sum);
    }
  }
  return probs;
}

template <typename T>
SpeakerOutput ForwardSpeaker(const FactorizationNet<T>& net,
                             const Matrix<T>& features) {
  FrameBatch<T> h = TdnnStackForward(
      net.generic, SingleSegment(net.config, features), Mode::kInference,
      static_cast<TdnnStackTape<T>*>(nullptr));
  auto out = SegmentNetForward(net.speaker, h, Mode::kInference,
                               static_cast<SegmentNetTape<T>*>(nullptr));
  return {{EmbeddingKind::kSpk, RowToVector(out.embedding, 0)},
          RowToVector(out.logits, 0)};
}

template <typename T>
SpeakerOutput ForwardSpeaker(const BaselineNet<T>& net,
                             const Matrix<T>& features) {
  auto out = SegmentNetForward(net.net, SingleSegment(net.config, features),
                               Mode::kInference,
                               static_cast<SegmentNetTape<T>*>(nullptr));
  return {{EmbeddingKind::kSpk, RowToVector(out.embedding, 0)},
          RowToVector(out.logits, 0)};
}

template <typename T>
TextOutput ForwardText(const FactorizationNet<T>& net,
                       const Matrix<T>& features) {
  FrameBatch<T> h = TdnnStackForward(
      net.generic, SingleSegment(net.config, features), Mode::kInference,
      static_cast<TdnnStackTape<T>*>(nullptr));
  auto out = SegmentNetForward(net.text, h, Mode::kInference,
                               static_cast<SegmentNetTape<T>*>(nullptr));
  return {{EmbeddingKind::kText, RowToVector(out.embedding, 0)},
          RowToVector(SoftmaxRows(out.logits), 0)};
}

template <typename T>
CombinedOutput ForwardCombined(const FactorizationNet<T>& net,
                               const Embedding& spk, const Embedding& text) {
  if (spk.kind != EmbeddingKind::kSpk || text.kind != EmbeddingKind::kText) {
    throw ValidationError("combination expects (spk, text) embeddings, got (" +
                          EmbeddingKindName(spk.kind) + ", " +
                          EmbeddingKindName(text.kind) + ")");
  }
  const int dim = net.config.embedding_dim;
  if (spk.size() != dim || text.size() != dim) {
    throw ShapeError("combination expects " + std::to_string(dim) +
                     "-dim embeddings, got " + std::to_string(spk.size()) +
                     " and " + std::to_string(text.size()));
  }
  Matrix<T> s(1, dim), t(1, dim);
  for (int i = 0; i < dim; ++i) {
    s(0, i) = static_cast<T>(spk.values[i]);
    t(0, i) = static_cast<T>(text.values[i]);
  }
  auto out = CombinationForward(net.combination, s, t, Mode::kInference,
                                static_cast<CombinationTape<T>*>(nullptr));
  return {{EmbeddingKind::kCombined, RowToVector(out.combined, 0)},
          RowToVector(out.speaker_logits, 0),
          RowToVector(SoftmaxRows(out.phoneme_logits), 0)};
}

#define STF_INSTANTIATE_NETWORK(T)                                             \
  template std::vector<LayerSpec> LayerSpecs(const TdnnStack<T>&);             \
  template std::vector<LayerSpec> LayerSpecs(const SegmentNet<T>&);            \
  template std::vector<LayerSpec> LayerSpecs(const CombinationNet<T>&);        \
  template FactorizationNet<T> InitFactorizationNet<T>(const NetworkConfig&,   \
                                                       uint64_t);              \
  template BaselineNet<T> InitBaselineNet<T>(const NetworkConfig&, uint64_t);  \
  template FrameBatch<T> TdnnStackForward(const TdnnStack<T>&,                 \
                                          const FrameBatch<T>&, Mode,          \
                                          TdnnStackTape<T>*);                  \
  template Matrix<T> TdnnStackBackward(const TdnnStack<T>&,                    \
                                       const TdnnStackTape<T>&,                \
                                       const Matrix<T>&, TdnnStack<T>*);       \
  template SegmentNetOutput<T> SegmentNetForward(                              \
      const SegmentNet<T>&, const FrameBatch<T>&, Mode, SegmentNetTape<T>*);   \
  template Matrix<T> SegmentNetBackward(const SegmentNet<T>&,                  \
                                        const SegmentNetTape<T>&,              \
                                        const Matrix<T>&, const Matrix<T>&,    \
                                        SegmentNet<T>*);                       \
  template CombinationOutput<T> CombinationForward(                            \
      const CombinationNet<T>&, const Matrix<T>&, const Matrix<T>&, Mode,      \
      CombinationTape<T>*);                                                    \
  template std::pair<Matrix<T>, Matrix<T>> CombinationBackward(                \
      const CombinationNet<T>&, const CombinationTape<T>&, const Matrix<T>&,   \
      const Matrix<T>&, CombinationNet<T>*);                                   \
  template Matrix<T> SoftmaxRows(const Matrix<T>&);                            \
  template SpeakerOutput ForwardSpeaker(const FactorizationNet<T>&,            \
                                        const Matrix<T>&);                     \
  template SpeakerOutput ForwardSpeaker(const BaselineNet<T>&,                 \
                                        const Matrix<T>&);                     \
  template TextOutput ForwardText(const FactorizationNet<T>&,                  \
                                  const Matrix<T>&);                           \
  template CombinedOutput ForwardCombined(                                     \
      const FactorizationNet<T>&, const Embedding&, const Embedding&);

STF_INSTANTIATE_NETWORK(float)
STF_INSTANTIATE_NETWORK(double)

#undef STF_INSTANTIATE_NETWORK

}  // namespace stf
