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

#ifndef STF_LAYERS_H_
#define STF_LAYERS_H_

// Building blocks of the TDNN family: time-delay layers, statistics pooling,
// dense layers and output heads, each with an explicit forward pass that can
// record a cache and a backward pass that consumes it. Time-delay and dense
// layers apply affine -> ReLU -> batch norm.

#include <span>
#include <string>
#include <vector>

#include "stf/matrix.h"

namespace stf {

enum class LayerKind { kTimeDelay, kDense, kStatsPool, kOutputHead };

std::string LayerKindName(LayerKind kind);
LayerKind ParseLayerKind(const std::string& name);

struct LayerSpec {
  LayerKind kind = LayerKind::kDense;
  int input_dim = 0;
  int output_dim = 0;
  std::vector<int> context_offsets;  // time-delay layers only, ascending

  bool operator==(const LayerSpec&) const = default;
};

// Batch-norm behaviour is always passed explicitly, never stored in a layer.
enum class Mode { kTrain, kInference };

inline constexpr double kBatchNormEpsilon = 1e-5;
inline constexpr double kStatsPoolEpsilon = 1e-10;

template <typename T>
struct BatchNorm {
  std::vector<T> gamma;
  std::vector<T> beta;
  std::vector<T> running_mean;
  std::vector<T> running_var;

  BatchNorm() = default;
  explicit BatchNorm(int dim)
      : gamma(dim, T(1)), beta(dim, T(0)), running_mean(dim, T(0)),
        running_var(dim, T(1)) {}
  int dim() const { return static_cast<int>(gamma.size()); }
};

template <typename T>
struct BatchNormCache {
  Matrix<T> normalized;
  std::vector<T> inv_std;
  std::vector<T> mean;
  std::vector<T> var;  // biased batch variance
};

template <typename T>
Matrix<T> BatchNormForward(const BatchNorm<T>& bn, const Matrix<T>& x,
                           Mode mode, BatchNormCache<T>* cache);

// Train-mode backward. Accumulates into grad->gamma / grad->beta.
template <typename T>
Matrix<T> BatchNormBackward(const BatchNorm<T>& bn,
                            const BatchNormCache<T>& cache,
                            const Matrix<T>& d_out, BatchNorm<T>* grad);

// running = (1 - momentum) * running + momentum * batch, with the unbiased
// batch variance.
template <typename T>
void UpdateRunningStats(BatchNorm<T>& bn, const BatchNormCache<T>& cache,
                        int count, double momentum);

template <typename T>
struct TimeDelayLayer {
  LayerSpec spec;
  Matrix<T> weight;  // (offsets * input_dim) x output_dim
  std::vector<T> bias;
  BatchNorm<T> bn;

  int context_span() const {
    return spec.context_offsets.back() - spec.context_offsets.front();
  }
};

template <typename T>
struct TimeDelayCache {
  std::vector<int> input_offsets;
  int input_rows = 0;
  Matrix<T> spliced;  // one row per output frame
  Matrix<T> pre_activation;
  BatchNormCache<T> bn;
};

// Output segment s has length(s) - context_span() frames (no padding).
// Throws DomainError if any segment is too short.
template <typename T>
FrameBatch<T> TimeDelayForward(const TimeDelayLayer<T>& layer,
                               const FrameBatch<T>& input, Mode mode,
                               TimeDelayCache<T>* cache);

template <typename T>
Matrix<T> TimeDelayBackward(const TimeDelayLayer<T>& layer,
                            const TimeDelayCache<T>& cache,
                            const Matrix<T>& d_out, TimeDelayLayer<T>* grad);

template <typename T>
struct DenseLayer {
  LayerSpec spec;
  Matrix<T> weight;  // input_dim x output_dim
  std::vector<T> bias;
  BatchNorm<T> bn;
};

template <typename T>
struct DenseCache {
  Matrix<T> input;
  Matrix<T> pre_activation;
  BatchNormCache<T> bn;
};

template <typename T>
struct DenseOutput {
  Matrix<T> pre_activation;  // embedding tap point
  Matrix<T> output;          // after ReLU and batch norm
};

template <typename T>
DenseOutput<T> DenseForward(const DenseLayer<T>& layer, const Matrix<T>& x,
                            Mode mode, DenseCache<T>* cache);

// d_pre_extra (may be empty) is gradient arriving directly at the
// pre-activation, i.e. from consumers of the embedding.
template <typename T>
Matrix<T> DenseBackward(const DenseLayer<T>& layer, const DenseCache<T>& cache,
                        const Matrix<T>& d_out, const Matrix<T>& d_pre_extra,
                        DenseLayer<T>* grad);

template <typename T>
struct OutputLayer {
  LayerSpec spec;
  Matrix<T> weight;
  std::vector<T> bias;
};

template <typename T>
Matrix<T> OutputForward(const OutputLayer<T>& layer, const Matrix<T>& x);

template <typename T>
Matrix<T> OutputBackward(const OutputLayer<T>& layer, const Matrix<T>& x,
                         const Matrix<T>& d_logits, OutputLayer<T>* grad);

template <typename T>
struct StatsPoolCache {
  FrameBatch<T> input;
  Matrix<T> mean;
  Matrix<T> stddev;
};

// Per-segment [mean ++ population std], std = sqrt(var + 1e-10).
template <typename T>
Matrix<T> StatsPoolForward(const FrameBatch<T>& input, StatsPoolCache<T>* cache);

template <typename T>
Matrix<T> StatsPoolBackward(const StatsPoolCache<T>& cache,
                            const Matrix<T>& d_pooled);

// Picks segments by index (duplicates allowed).
template <typename T>
FrameBatch<T> GatherSegments(const FrameBatch<T>& batch,
                             std::span<const int> indices);

// Adjoint of GatherSegments: adds d_gathered rows back into d_batch.
template <typename T>
void ScatterAddSegments(const FrameBatch<T>& batch,
                        std::span<const int> indices,
                        const Matrix<T>& d_gathered, Matrix<T>* d_batch);

// Parameter visitors. Trainable tensors and running statistics are visited
// separately; both orders are fixed and define the checkpoint layout.
template <typename Layer, typename F>
void VisitParams(Layer& layer, F&& f) {
  f(layer.weight.values());
  f(std::span(layer.bias));
  if constexpr (requires { layer.bn; }) {
    f(std::span(layer.bn.gamma));
    f(std::span(layer.bn.beta));
  }
}

template <typename Layer, typename F>
void VisitBuffers(Layer& layer, F&& f) {
  if constexpr (requires { layer.bn; }) {
    f(std::span(layer.bn.running_mean));
    f(std::span(layer.bn.running_var));
  }
}

}  // namespace stf

#endif  // STF_LAYERS_H_
