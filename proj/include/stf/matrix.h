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

#ifndef STF_MATRIX_H_
#define STF_MATRIX_H_

#include <algorithm>
#include <cassert>
#include <span>
#include <vector>

namespace stf {

// Dense row-major matrix with value semantics.
template <typename T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols, T fill = T(0))
      : rows_(rows), cols_(cols), data_(static_cast<size_t>(rows) * cols, fill) {}

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  std::span<T> values() { return data_; }
  std::span<const T> values() const { return data_; }

  T& operator()(int r, int c) {
    assert(r >= 0 && r < rows_ && c >= 0 && c < cols_);
    return data_[static_cast<size_t>(r) * cols_ + c];
  }
  T operator()(int r, int c) const {
    assert(r >= 0 && r < rows_ && c >= 0 && c < cols_);
    return data_[static_cast<size_t>(r) * cols_ + c];
  }

  std::span<T> row(int r) {
    return {data_.data() + static_cast<size_t>(r) * cols_,
            static_cast<size_t>(cols_)};
  }
  std::span<const T> row(int r) const {
    return {data_.data() + static_cast<size_t>(r) * cols_,
            static_cast<size_t>(cols_)};
  }

  // Discards contents; all entries become zero.
  void Resize(int rows, int cols) {
    rows_ = rows;
    cols_ = cols;
    data_.assign(static_cast<size_t>(rows) * cols, T(0));
  }
  void SetZero() { std::fill(data_.begin(), data_.end(), T(0)); }

  bool operator==(const Matrix&) const = default;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<T> data_;
};

template <typename To, typename From>
Matrix<To> MatrixCast(const Matrix<From>& m) {
  Matrix<To> out(m.rows(), m.cols());
  for (size_t i = 0; i < m.size(); ++i) {
    out.data()[i] = static_cast<To>(m.data()[i]);
  }
  return out;
}

// A batch of variable-length segments stored back to back. Segment s owns
// rows [offsets[s], offsets[s + 1]) of frames.
template <typename T>
struct FrameBatch {
  Matrix<T> frames;
  std::vector<int> offsets{0};

  int num_segments() const { return static_cast<int>(offsets.size()) - 1; }
  int length(int s) const { return offsets[s + 1] - offsets[s]; }
};

}  // namespace stf

#endif  // STF_MATRIX_H_
