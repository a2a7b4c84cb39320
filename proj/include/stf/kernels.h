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

#ifndef STF_KERNELS_H_
#define STF_KERNELS_H_

// Dense linear-algebra kernels used by every layer. All matrices are
// row-major and densely packed.
//
// The OpenMP versions split work over output rows only, so each output
// element is reduced in the same order regardless of the thread count and
// results are bit-identical between 1 and N threads. The reference versions
// are plain serial triple loops kept for tests and benchmarks.

#include <cstddef>

namespace stf::kernels {

// Below this many multiply-adds the parallel region costs more than it saves.
inline constexpr long kParallelThreshold = 1L << 16;

// C = A * B, or C += A * B when accumulate. A: m x k, B: k x n, C: m x n.
template <typename T>
void GemmNN(const T* a, const T* b, T* c, int m, int k, int n,
            bool accumulate) {
  const long work = static_cast<long>(m) * k * n;
#pragma omp parallel for schedule(static) if (work > kParallelThreshold)
  for (int i = 0; i < m; ++i) {
    T* __restrict c_row = c + static_cast<size_t>(i) * n;
    const T* a_row = a + static_cast<size_t>(i) * k;
    if (!accumulate) {
      for (int j = 0; j < n; ++j) c_row[j] = T(0);
    }
    for (int p = 0; p < k; ++p) {
      const T a_ip = a_row[p];
      const T* __restrict b_row = b + static_cast<size_t>(p) * n;
#pragma omp simd
      for (int j = 0; j < n; ++j) c_row[j] += a_ip * b_row[j];
    }
  }
}

// C += A^T * B. A: m x k, B: m x n, C: k x n.
template <typename T>
void GemmTN(const T* a, const T* b, T* c, int m, int k, int n) {
  constexpr int kBlock = 8;
  const int num_blocks = (k + kBlock - 1) / kBlock;
  const long work = static_cast<long>(m) * k * n;
#pragma omp parallel for schedule(static) if (work > kParallelThreshold)
  for (int blk = 0; blk < num_blocks; ++blk) {
    const int p0 = blk * kBlock;
    const int p1 = p0 + kBlock < k ? p0 + kBlock : k;
    for (int i = 0; i < m; ++i) {
      const T* a_row = a + static_cast<size_t>(i) * k;
      const T* __restrict b_row = b + static_cast<size_t>(i) * n;
      for (int p = p0; p < p1; ++p) {
        const T a_ip = a_row[p];
        T* __restrict c_row = c + static_cast<size_t>(p) * n;
#pragma omp simd
        for (int j = 0; j < n; ++j) c_row[j] += a_ip * b_row[j];
      }
    }
  }
}

// C = A * B^T. A: m x k, B: n x k, C: m x n.
template <typename T>
void GemmNT(const T* a, const T* b, T* c, int m, int k, int n) {
  const long work = static_cast<long>(m) * k * n;
#pragma omp parallel for schedule(static) if (work > kParallelThreshold)
  for (int i = 0; i < m; ++i) {
    const T* __restrict a_row = a + static_cast<size_t>(i) * k;
    for (int j = 0; j < n; ++j) {
      const T* __restrict b_row = b + static_cast<size_t>(j) * k;
      T acc = T(0);
#pragma omp simd reduction(+ : acc)
      for (int p = 0; p < k; ++p) acc += a_row[p] * b_row[p];
      c[static_cast<size_t>(i) * n + j] = acc;
    }
  }
}

namespace reference {

template <typename T>
void GemmNN(const T* a, const T* b, T* c, int m, int k, int n,
            bool accumulate) {
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      T acc = accumulate ? c[static_cast<size_t>(i) * n + j] : T(0);
      for (int p = 0; p < k; ++p) {
        acc += a[static_cast<size_t>(i) * k + p] *
               b[static_cast<size_t>(p) * n + j];
      }
      c[static_cast<size_t>(i) * n + j] = acc;
    }
  }
}

template <typename T>
void GemmTN(const T* a, const T* b, T* c, int m, int k, int n) {
  for (int p = 0; p < k; ++p) {
    for (int j = 0; j < n; ++j) {
      T acc = c[static_cast<size_t>(p) * n + j];
      for (int i = 0; i < m; ++i) {
        acc += a[static_cast<size_t>(i) * k + p] *
               b[static_cast<size_t>(i) * n + j];
      }
      c[static_cast<size_t>(p) * n + j] = acc;
    }
  }
}

template <typename T>
void GemmNT(const T* a, const T* b, T* c, int m, int k, int n) {
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      T acc = T(0);
      for (int p = 0; p < k; ++p) {
        acc += a[static_cast<size_t>(i) * k + p] *
               b[static_cast<size_t>(j) * k + p];
      }
      c[static_cast<size_t>(i) * n + j] = acc;
    }
  }
}

}  // namespace reference
}  // namespace stf::kernels

#endif  // STF_KERNELS_H_
