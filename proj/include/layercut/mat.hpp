// Copyright 2026 The layercut Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef LAYERCUT_MAT_HPP
#define LAYERCUT_MAT_HPP

#include <cassert>
#include <cstddef>
#include <vector>

namespace layercut {

/// Dense row-major matrix. 1-D tensors are stored as a single row.
/// Deliberately minimal: the encoder and trainer run at toy scale, so
/// plain loops beat any BLAS dependency.
template <class T>
struct Mat {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<T> v;

  Mat() = default;
  Mat(std::size_t r, std::size_t c, T fill = T(0)) : rows(r), cols(c), v(r * c, fill) {}

  static Mat row_vector(std::vector<T> values) {
    Mat m;
    m.rows = 1;
    m.cols = values.size();
    m.v = std::move(values);
    return m;
  }

  T& operator()(std::size_t r, std::size_t c) {
    assert(r < rows && c < cols);
    return v[r * cols + c];
  }
  const T& operator()(std::size_t r, std::size_t c) const {
    assert(r < rows && c < cols);
    return v[r * cols + c];
  }

  std::size_t size() const { return v.size(); }
  bool same_shape(const Mat& o) const { return rows == o.rows && cols == o.cols; }

  bool operator==(const Mat& o) const {
    return rows == o.rows && cols == o.cols && v == o.v;
  }
};

// y += x, elementwise.
template <class T>
void add_inplace(Mat<T>& y, const Mat<T>& x) {
  assert(y.same_shape(x));
  for (std::size_t i = 0; i < y.v.size(); ++i) y.v[i] += x.v[i];
}

// y += s * x
template <class T>
void axpy(Mat<T>& y, T s, const Mat<T>& x) {
  assert(y.same_shape(x));
  for (std::size_t i = 0; i < y.v.size(); ++i) y.v[i] += s * x.v[i];
}

// C = A * B
template <class T>
Mat<T> matmul(const Mat<T>& a, const Mat<T>& b) {
  assert(a.cols == b.rows);
  Mat<T> c(a.rows, b.cols);
  for (std::size_t i = 0; i < a.rows; ++i) {
    for (std::size_t k = 0; k < a.cols; ++k) {
      const T aik = a(i, k);
      if (aik == T(0)) continue;
      const T* brow = &b.v[k * b.cols];
      T* crow = &c.v[i * c.cols];
      for (std::size_t j = 0; j < b.cols; ++j) crow[j] += aik * brow[j];
    }
  }
  return c;
}

// C = A * B^T
template <class T>
Mat<T> matmul_nt(const Mat<T>& a, const Mat<T>& b) {
  assert(a.cols == b.cols);
  Mat<T> c(a.rows, b.rows);
  for (std::size_t i = 0; i < a.rows; ++i) {
    for (std::size_t j = 0; j < b.rows; ++j) {
      T acc = T(0);
      const T* ar = &a.v[i * a.cols];
      const T* br = &b.v[j * b.cols];
      for (std::size_t k = 0; k < a.cols; ++k) acc += ar[k] * br[k];
      c(i, j) = acc;
    }
  }
  return c;
}

// C = A^T * B
template <class T>
Mat<T> matmul_tn(const Mat<T>& a, const Mat<T>& b) {
  assert(a.rows == b.rows);
  Mat<T> c(a.cols, b.cols);
  for (std::size_t k = 0; k < a.rows; ++k) {
    for (std::size_t i = 0; i < a.cols; ++i) {
      const T aki = a(k, i);
      if (aki == T(0)) continue;
      const T* br = &b.v[k * b.cols];
      T* cr = &c.v[i * c.cols];
      for (std::size_t j = 0; j < b.cols; ++j) cr[j] += aki * br[j];
    }
  }
  return c;
}

}  // namespace layercut

#endif  // LAYERCUT_MAT_HPP
