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

#include "stf/layers.h"

#include <cmath>
#include <cstring>

#include "stf/error.h"
#include "stf/kernels.h"

namespace stf {

std::string LayerKindName(LayerKind kind) {
  switch (kind) {
    case LayerKind::kTimeDelay:
      return "time_delay";
    case LayerKind::kDense:
      return "dense";
    case LayerKind::kStatsPool:
      return "stats_pool";
    case LayerKind::kOutputHead:
      return "output_head";
  }
  return "unknown";
}

LayerKind ParseLayerKind(const std::string& name) {
  if (name == "time_delay") return LayerKind::kTimeDelay;
  if (name == "dense") return LayerKind::kDense;
  if (name == "stats_pool") return LayerKind::kStatsPool;
  if (name == "output_head") return LayerKind::kOutputHead;
  throw FormatError("unknown layer kind '" + name + "'");
}

namespace {

template <typename T>
void AddBias(Matrix<T>& m, const std::vector<T>& bias) {
  for (int r = 0; r < m.rows(); ++r) {
    T* row = m.row(r).data();
    for (int c = 0; c < m.cols(); ++c) row[c] += bias[c];
  }
}

template <typename T>
void AccumulateColumnSums(const Matrix<T>& m, std::vector<T>& out) {
  for (int r = 0; r < m.rows(); ++r) {
    const T* row = m.row(r).data();
    for (int c = 0; c < m.cols(); ++c) out[c] += row[c];
  }
}

template <typename T>
Matrix<T> Relu(const Matrix<T>& x) {
  Matrix<T> y(x.rows(), x.cols());
  for (size_t i = 0; i < x.size(); ++i) {
    y.data()[i] = x.data()[i] > T(0) ? x.data()[i] : T(0);
  }
  return y;
}

template <typename T>
void ReluBackwardInPlace(const Matrix<T>& pre, Matrix<T>& d) {
  for (size_t i = 0; i < d.size(); ++i) {
    if (!(pre.data()[i] > T(0))) d.data()[i] = T(0);
  }
}

// grad_w += x^T d_pre; grad_b += colsum(d_pre); returns d_pre * w^T.
template <typename T>
Matrix<T> AffineBackward(const Matrix<T>& x, const Matrix<T>& weight,
                         const Matrix<T>& d_pre, Matrix<T>* grad_w,
                         std::vector<T>* grad_b) {
  kernels::GemmTN(x.data(), d_pre.data(), grad_w->data(), x.rows(), x.cols(),
                  d_pre.cols());
  AccumulateColumnSums(d_pre, *grad_b);
  Matrix<T> d_x(x.rows(), x.cols());
  kernels::GemmNT(d_pre.data(), weight.data(), d_x.data(), d_pre.rows(),
                  d_pre.cols(), weight.rows());
  return d_x;
}

template <typename T>
Matrix<T> Affine(const Matrix<T>& x, const Matrix<T>& weight,
                 const std::vector<T>& bias) {
  if (x.cols() != weight.rows()) {
    throw ShapeError("affine input has " + std::to_string(x.cols()) +
                     " columns, weight expects " +
                     std::to_string(weight.rows()));
  }
  Matrix<T> out(x.rows(), weight.cols());
  kernels::GemmNN(x.data(), weight.data(), out.data(), x.rows(), x.cols(),
                  weight.cols(), false);
  AddBias(out, bias);
  return out;
}

}  // namespace

template <typename T>
Matrix<T> BatchNormForward(const BatchNorm<T>& bn, const Matrix<T>& x,
                           Mode mode, BatchNormCache<T>* cache) {
  const int n = x.rows();
  const int d = x.cols();
  Matrix<T> y(n, d);
  if (mode == Mode::kInference) {
    std::vector<T> inv_std(d);
    for (int c = 0; c < d; ++c) {
      inv_std[c] = T(1) / std::sqrt(bn.running_var[c] + T(kBatchNormEpsilon));
    }
    for (int r = 0; r < n; ++r) {
      const T* in = x.row(r).data();
      T* out = y.row(r).data();
      for (int c = 0; c < d; ++c) {
        out[c] = (in[c] - bn.running_mean[c]) * inv_std[c] * bn.gamma[c] +
                 bn.beta[c];
      }
    }
    return y;
  }

  std::vector<double> sum(d, 0.0);
  for (int r = 0; r < n; ++r) {
    const T* in = x.row(r).data();
    for (int c = 0; c < d; ++c) sum[c] += in[c];
  }
  std::vector<T> mean(d);
  for (int c = 0; c < d; ++c) mean[c] = static_cast<T>(sum[c] / n);
  std::vector<double> sq(d, 0.0);
  for (int r = 0; r < n; ++r) {
    const T* in = x.row(r).data();
    for (int c = 0; c < d; ++c) {
      const double dev = static_cast<double>(in[c]) - mean[c];
      sq[c] += dev * dev;
    }
  }
  std::vector<T> var(d), inv_std(d);
  for (int c = 0; c < d; ++c) {
    var[c] = static_cast<T>(sq[c] / n);
    inv_std[c] = static_cast<T>(1.0 / std::sqrt(sq[c] / n + kBatchNormEpsilon));
  }
  Matrix<T> normalized(n, d);
  for (int r = 0; r < n; ++r) {
    const T* in = x.row(r).data();
    T* xhat = normalized.row(r).data();
    T* out = y.row(r).data();
    for (int c = 0; c < d; ++c) {
      xhat[c] = (in[c] - mean[c]) * inv_std[c];
      out[c] = xhat[c] * bn.gamma[c] + bn.beta[c];
    }
  }
  if (cache != nullptr) {
    cache->normalized = std::move(normalized);
    cache->inv_std = std::move(inv_std);
    cache->mean = std::move(mean);
    cache->var = std::move(var);
  }
  return y;
}

template <typename T>
Matrix<T> BatchNormBackward(const BatchNorm<T>& bn,
                            const BatchNormCache<T>& cache,
                            const Matrix<T>& d_out, BatchNorm<T>* grad) {
  const int n = d_out.rows();
  const int d = d_out.cols();
  std::vector<double> sum_dy(d, 0.0), sum_dy_xhat(d, 0.0);
  for (int r = 0; r < n; ++r) {
    const T* dy = d_out.row(r).data();
    const T* xhat = cache.normalized.row(r).data();
    for (int c = 0; c < d; ++c) {
      sum_dy[c] += dy[c];
      sum_dy_xhat[c] += static_cast<double>(dy[c]) * xhat[c];
    }
  }
  for (int c = 0; c < d; ++c) {
    grad->gamma[c] += static_cast<T>(sum_dy_xhat[c]);
    grad->beta[c] += static_cast<T>(sum_dy[c]);
  }
  Matrix<T> d_x(n, d);
  for (int r = 0; r < n; ++r) {
    const T* dy = d_out.row(r).data();
    const T* xhat = cache.normalized.row(r).data();
    T* dx = d_x.row(r).data();
    for (int c = 0; c < d; ++c) {
      const double scale = static_cast<double>(bn.gamma[c]) * cache.inv_std[c];
      dx[c] = static_cast<T>(
          scale * (dy[c] - sum_dy[c] / n - xhat[c] * sum_dy_xhat[c] / n));
    }
  }
  return d_x;
}

template <typename T>
void UpdateRunningStats(BatchNorm<T>& bn, const BatchNormCache<T>& cache,
                        int count, double momentum) {
  const double correction = count > 1 ? double(count) / (count - 1) : 1.0;
  for (int c = 0; c < bn.dim(); ++c) {
    bn.running_mean[c] = static_cast<T>((1.0 - momentum) * bn.running_mean[c] +
                                        momentum * cache.mean[c]);
    bn.running_var[c] =
        static_cast<T>((1.0 - momentum) * bn.running_var[c] +
                       momentum * correction * cache.var[c]);
  }
}

template <typename T>
FrameBatch<T> TimeDelayForward(const TimeDelayLayer<T>& layer,
                               const FrameBatch<T>& input, Mode mode,
                               TimeDelayCache<T>* cache) {
  const auto& offsets = layer.spec.context_offsets;
  const int in_dim = layer.spec.input_dim;
  if (input.frames.cols() != in_dim) {
    throw ShapeError("time-delay layer expects " + std::to_string(in_dim) +
                     "-dim frames, got " +
                     std::to_string(input.frames.cols()));
  }
  const int span = layer.context_span();
  const int num_segments = input.num_segments();

  FrameBatch<T> out;
  out.offsets.resize(num_segments + 1);
  out.offsets[0] = 0;
  for (int s = 0; s < num_segments; ++s) {
    const int len = input.length(s) - span;
    if (len < 1) {
      throw DomainError("segment of " + std::to_string(input.length(s)) +
                        " frames is shorter than the time-delay context (" +
                        std::to_string(span + 1) + " frames)");
    }
    out.offsets[s + 1] = out.offsets[s] + len;
  }
  const int total = out.offsets[num_segments];
  const int num_taps = static_cast<int>(offsets.size());

  Matrix<T> spliced(total, num_taps * in_dim);
  for (int s = 0; s < num_segments; ++s) {
    for (int j = 0; j < input.length(s) - span; ++j) {
      T* dst = spliced.row(out.offsets[s] + j).data();
      for (int o = 0; o < num_taps; ++o) {
        const int src_row = input.offsets[s] + j - offsets.front() + offsets[o];
        std::memcpy(dst + o * in_dim, input.frames.row(src_row).data(),
                    sizeof(T) * in_dim);
      }
    }
  }
  Matrix<T> pre = Affine(spliced, layer.weight, layer.bias);
  out.frames = BatchNormForward(layer.bn, Relu(pre), mode,
                                cache ? &cache->bn : nullptr);
  if (cache != nullptr) {
    cache->input_offsets = input.offsets;
    cache->input_rows = input.frames.rows();
    cache->spliced = std::move(spliced);
    cache->pre_activation = std::move(pre);
  }
  return out;
}

template <typename T>
Matrix<T> TimeDelayBackward(const TimeDelayLayer<T>& layer,
                            const TimeDelayCache<T>& cache,
                            const Matrix<T>& d_out, TimeDelayLayer<T>* grad) {
  Matrix<T> d_pre = BatchNormBackward(layer.bn, cache.bn, d_out, &grad->bn);
  ReluBackwardInPlace(cache.pre_activation, d_pre);
  Matrix<T> d_spliced = AffineBackward(cache.spliced, layer.weight, d_pre,
                                       &grad->weight, &grad->bias);

  const auto& offsets = layer.spec.context_offsets;
  const int in_dim = layer.spec.input_dim;
  const int span = layer.context_span();
  const int num_taps = static_cast<int>(offsets.size());
  Matrix<T> d_input(cache.input_rows, in_dim);
  int out_row = 0;
  for (size_t s = 0; s + 1 < cache.input_offsets.size(); ++s) {
    const int len =
        cache.input_offsets[s + 1] - cache.input_offsets[s] - span;
    for (int j = 0; j < len; ++j, ++out_row) {
      const T* src = d_spliced.row(out_row).data();
      for (int o = 0; o < num_taps; ++o) {
        T* dst = d_input
                     .row(cache.input_offsets[s] + j - offsets.front() +
                          offsets[o])
                     .data();
        for (int c = 0; c < in_dim; ++c) dst[c] += src[o * in_dim + c];
      }
    }
  }
  return d_input;
}

template <typename T>
DenseOutput<T> DenseForward(const DenseLayer<T>& layer, const Matrix<T>& x,
                            Mode mode, DenseCache<T>* cache) {
  DenseOutput<T> result;
  result.pre_activation = Affine(x, layer.weight, layer.bias);
  result.output = BatchNormForward(layer.bn, Relu(result.pre_activation), mode,
                                   cache ? &cache->bn : nullptr);
  if (cache != nullptr) {
    cache->input = x;
    cache->pre_activation = result.pre_activation;
  }
  return result;
}

template <typename T>
Matrix<T> DenseBackward(const DenseLayer<T>& layer, const DenseCache<T>& cache,
                        const Matrix<T>& d_out, const Matrix<T>& d_pre_extra,
                        DenseLayer<T>* grad) {
  Matrix<T> d_pre = BatchNormBackward(layer.bn, cache.bn, d_out, &grad->bn);
  ReluBackwardInPlace(cache.pre_activation, d_pre);
  if (!d_pre_extra.empty()) {
    for (size_t i = 0; i < d_pre.size(); ++i) {
      d_pre.data()[i] += d_pre_extra.data()[i];
    }
  }
  return AffineBackward(cache.input, layer.weight, d_pre, &grad->weight,
                        &grad->bias);
}

template <typename T>
Matrix<T> OutputForward(const OutputLayer<T>& layer, const Matrix<T>& x) {
  return Affine(x, layer.weight, layer.bias);
}

template <typename T>
Matrix<T> OutputBackward(const OutputLayer<T>& layer, const Matrix<T>& x,
                         const Matrix<T>& d_logits, OutputLayer<T>* grad) {
  return AffineBackward(x, layer.weight, d_logits, &grad->weight, &grad->bias);
}

template <typename T>
Matrix<T> StatsPoolForward(const FrameBatch<T>& input,
                           StatsPoolCache<T>* cache) {
  const int num_segments = input.num_segments();
  const int d = input.frames.cols();
  Matrix<T> mean(num_segments, d), stddev(num_segments, d);
  Matrix<T> pooled(num_segments, 2 * d);
  std::vector<double> acc(d);
  for (int s = 0; s < num_segments; ++s) {
    const int n = input.length(s);
    if (n < 1) throw DomainError("statistics pooling over an empty segment");
    std::fill(acc.begin(), acc.end(), 0.0);
    for (int r = input.offsets[s]; r < input.offsets[s + 1]; ++r) {
      const T* h = input.frames.row(r).data();
      for (int c = 0; c < d; ++c) acc[c] += h[c];
    }
    for (int c = 0; c < d; ++c) mean(s, c) = static_cast<T>(acc[c] / n);
    std::fill(acc.begin(), acc.end(), 0.0);
    for (int r = input.offsets[s]; r < input.offsets[s + 1]; ++r) {
      const T* h = input.frames.row(r).data();
      for (int c = 0; c < d; ++c) {
        const double dev = static_cast<double>(h[c]) - mean(s, c);
        acc[c] += dev * dev;
      }
    }
    for (int c = 0; c < d; ++c) {
      stddev(s, c) = static_cast<T>(std::sqrt(acc[c] / n + kStatsPoolEpsilon));
      pooled(s, c) = mean(s, c);
      pooled(s, d + c) = stddev(s, c);
    }
  }
  if (cache != nullptr) {
    cache->input = input;
    cache->mean = std::move(mean);
    cache->stddev = std::move(stddev);
  }
  return pooled;
}

template <typename T>
Matrix<T> StatsPoolBackward(const StatsPoolCache<T>& cache,
                            const Matrix<T>& d_pooled) {
  const FrameBatch<T>& input = cache.input;
  const int d = input.frames.cols();
  Matrix<T> d_input(input.frames.rows(), d);
  for (int s = 0; s < input.num_segments(); ++s) {
    const T n = static_cast<T>(input.length(s));
    for (int r = input.offsets[s]; r < input.offsets[s + 1]; ++r) {
      const T* h = input.frames.row(r).data();
      T* dh = d_input.row(r).data();
      for (int c = 0; c < d; ++c) {
        dh[c] = d_pooled(s, c) / n + d_pooled(s, d + c) *
                                         (h[c] - cache.mean(s, c)) /
                                         (n * cache.stddev(s, c));
      }
    }
  }
  return d_input;
}

template <typename T>
FrameBatch<T> GatherSegments(const FrameBatch<T>& batch,
                             std::span<const int> indices) {
  FrameBatch<T> out;
  out.offsets.resize(indices.size() + 1);
  out.offsets[0] = 0;
  for (size_t i = 0; i < indices.size(); ++i) {
    out.offsets[i + 1] = out.offsets[i] + batch.length(indices[i]);
  }
  const int d = batch.frames.cols();
  out.frames.Resize(out.offsets.back(), d);
  for (size_t i = 0; i < indices.size(); ++i) {
    std::memcpy(out.frames.row(out.offsets[i]).data(),
                batch.frames.row(batch.offsets[indices[i]]).data(),
                sizeof(T) * batch.length(indices[i]) * d);
  }
  return out;
}

template <typename T>
void ScatterAddSegments(const FrameBatch<T>& batch,
                        std::span<const int> indices,
                        const Matrix<T>& d_gathered, Matrix<T>* d_batch) {
  const int d = batch.frames.cols();
  int src = 0;
  for (int index : indices) {
    for (int r = batch.offsets[index]; r < batch.offsets[index + 1];
         ++r, ++src) {
      T* dst = d_batch->row(r).data();
      const T* g = d_gathered.row(src).data();
      for (int c = 0; c < d; ++c) dst[c] += g[c];
    }
  }
}

#define STF_INSTANTIATE_LAYERS(T)                                              \
  template Matrix<T> BatchNormForward(const BatchNorm<T>&, const Matrix<T>&,   \
                                      Mode, BatchNormCache<T>*);               \
  template Matrix<T> BatchNormBackward(const BatchNorm<T>&,                    \
                                       const BatchNormCache<T>&,               \
                                       const Matrix<T>&, BatchNorm<T>*);       \
  template void UpdateRunningStats(BatchNorm<T>&, const BatchNormCache<T>&,    \
                                   int, double);                               \
  template FrameBatch<T> TimeDelayForward(const TimeDelayLayer<T>&,            \
                                          const FrameBatch<T>&, Mode,          \
                                          TimeDelayCache<T>*);                 \
  template Matrix<T> TimeDelayBackward(const TimeDelayLayer<T>&,               \
                                       const TimeDelayCache<T>&,               \
                                       const Matrix<T>&, TimeDelayLayer<T>*);  \
  template DenseOutput<T> DenseForward(const DenseLayer<T>&, const Matrix<T>&, \
                                       Mode, DenseCache<T>*);                  \
  template Matrix<T> DenseBackward(const DenseLayer<T>&, const DenseCache<T>&, \
                                   const Matrix<T>&, const Matrix<T>&,         \
                                   DenseLayer<T>*);                            \
  template Matrix<T> OutputForward(const OutputLayer<T>&, const Matrix<T>&);   \
  template Matrix<T> OutputBackward(const OutputLayer<T>&, const Matrix<T>&,   \
                                    const Matrix<T>&, OutputLayer<T>*);        \
  template Matrix<T> StatsPoolForward(const FrameBatch<T>&,                    \
                                      StatsPoolCache<T>*);                     \
  template Matrix<T> StatsPoolBackward(const StatsPoolCache<T>&,               \
                                       const Matrix<T>&);                      \
  template FrameBatch<T> GatherSegments(const FrameBatch<T>&,                  \
                                        std::span<const int>);                 \
  template void ScatterAddSegments(const FrameBatch<T>&, std::span<const int>, \
                                   const Matrix<T>&, Matrix<T>*);

STF_INSTANTIATE_LAYERS(float)
STF_INSTANTIATE_LAYERS(double)

#undef STF_INSTANTIATE_LAYERS

}  // namespace stf
