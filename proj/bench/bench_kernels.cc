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

// Compares the OpenMP GEMM kernels against the serial reference loops at
// the shapes a default training batch produces.

#include <random>
#include <vector>

#include "benchmark/benchmark.h"
#include "stf/kernels.h"

namespace {

std::vector<float> Random(size_t n, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<float> normal;
  std::vector<float> v(n);
  for (float& x : v) x = normal(rng);
  return v;
}

// Rows of frames x (context * input dim) x output dim.
void Shapes(benchmark::internal::Benchmark* b) {
  b->Args({2880, 200, 64})->Args({2880, 192, 64})->Args({64, 128, 64})->Args({512, 64, 1000});
}

template <bool kReference>
void BM_GemmNN(benchmark::State& state) {
  const int m = state.range(0), k = state.range(1), n = state.range(2);
  const auto a = Random(size_t(m) * k, 1), b = Random(size_t(k) * n, 2);
  std::vector<float> c(size_t(m) * n);
  for (auto _ : state) {
    if constexpr (kReference) {
      stf::kernels::reference::GemmNN(a.data(), b.data(), c.data(), m, k, n, false);
    } else {
      stf::kernels::GemmNN(a.data(), b.data(), c.data(), m, k, n, false);
    }
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(state.iterations() * int64_t(m) * k * n);
}

template <bool kReference>
void BM_GemmTN(benchmark::State& state) {
  const int m = state.range(0), k = state.range(1), n = state.range(2);
  const auto a = Random(size_t(m) * k, 3), b = Random(size_t(m) * n, 4);
  std::vector<float> c(size_t(k) * n);
  for (auto _ : state) {
    if constexpr (kReference) {
      stf::kernels::reference::GemmTN(a.data(), b.data(), c.data(), m, k, n);
    } else {
      stf::kernels::GemmTN(a.data(), b.data(), c.data(), m, k, n);
    }
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(state.iterations() * int64_t(m) * k * n);
}

template <bool kReference>
void BM_GemmNT(benchmark::State& state) {
  const int m = state.range(0), k = state.range(1), n = state.range(2);
  const auto a = Random(size_t(m) * k, 5), b = Random(size_t(n) * k, 6);
  std::vector<float> c(size_t(m) * n);
  for (auto _ : state) {
    if constexpr (kReference) {
      stf::kernels::reference::GemmNT(a.data(), b.data(), c.data(), m, k, n);
    } else {
      stf::kernels::GemmNT(a.data(), b.data(), c.data(), m, k, n);
    }
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(state.iterations() * int64_t(m) * k * n);
}

BENCHMARK(BM_GemmNN<true>)->Name("GemmNN/reference")->Apply(Shapes);
BENCHMARK(BM_GemmNN<false>)->Name("GemmNN/parallel")->Apply(Shapes);
BENCHMARK(BM_GemmTN<true>)->Name("GemmTN/reference")->Apply(Shapes);
BENCHMARK(BM_GemmTN<false>)->Name("GemmTN/parallel")->Apply(Shapes);
BENCHMARK(BM_GemmNT<true>)->Name("GemmNT/reference")->Apply(Shapes);
BENCHMARK(BM_GemmNT<false>)->Name("GemmNT/parallel")->Apply(Shapes);

}  // namespace

BENCHMARK_MAIN();
