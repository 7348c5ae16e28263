// Copyright 2026 The Entrec Authors.
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

#ifndef ENTREC_MATRIX_H_
#define ENTREC_MATRIX_H_

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "entrec/errors.h"

namespace entrec {

// Dense row-major matrix. Training code uses Matrix<double>; serving indexes
// hold Matrix<float>.
template <typename T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(size_t rows, size_t cols, T fill = T(0))
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  size_t rows() const { return rows_; }
  size_t cols() const { return cols_; }
  size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T &operator()(size_t r, size_t c) { return data_[r * cols_ + c]; }
  const T &operator()(size_t r, size_t c) const { return data_[r * cols_ + c]; }

  std::span<T> row(size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const T> row(size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  std::span<T> values() { return data_; }
  std::span<const T> values() const { return data_; }
  T *data() { return data_.data(); }
  const T *data() const { return data_.data(); }

  void Fill(T value) { std::fill(data_.begin(), data_.end(), value); }

  bool AllFinite() const {
    return std::all_of(data_.begin(), data_.end(),
                       [](T v) { return std::isfinite(v); });
  }

  bool operator==(const Matrix &other) const = default;

 private:
  size_t rows_ = 0;
  size_t cols_ = 0;
  std::vector<T> data_;
};

using MatrixD = Matrix<double>;
using MatrixF = Matrix<float>;

inline double Dot(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  double sum = 0;
  for (size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
  return sum;
}

// Float dot product with eight independent partial sums so the compiler can
// keep it in vector registers. The summation order is fixed, so results are
// reproducible for identical inputs.
inline float DotFloat(const float *a, const float *b, size_t n) {
  float acc[8] = {0, 0, 0, 0, 0, 0, 0, 0};
  size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    for (size_t j = 0; j < 8; ++j) acc[j] += a[i + j] * b[i + j];
  }
  for (; i < n; ++i) acc[0] += a[i] * b[i];
  return ((acc[0] + acc[1]) + (acc[2] + acc[3])) +
         ((acc[4] + acc[5]) + (acc[6] + acc[7]));
}

inline double L2Norm(std::span<const double> v) { return std::sqrt(Dot(v, v)); }

// y += alpha * x
inline void Axpy(double alpha, std::span<const double> x, std::span<double> y) {
  assert(x.size() == y.size());
  for (size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

// y = A x
inline void MatVec(const MatrixD &a, std::span<const double> x,
                   std::span<double> y) {
  assert(x.size() == a.cols() && y.size() == a.rows());
  for (size_t r = 0; r < a.rows(); ++r) y[r] = Dot(a.row(r), x);
}

// y += A x
inline void MatVecAdd(const MatrixD &a, std::span<const double> x,
                      std::span<double> y) {
  assert(x.size() == a.cols() && y.size() == a.rows());
  for (size_t r = 0; r < a.rows(); ++r) y[r] += Dot(a.row(r), x);
}

// y += A^T x
inline void MatTVecAdd(const MatrixD &a, std::span<const double> x,
                       std::span<double> y) {
  assert(x.size() == a.rows() && y.size() == a.cols());
  for (size_t r = 0; r < a.rows(); ++r) {
    if (x[r] != 0) Axpy(x[r], a.row(r), y);
  }
}

// A += scale * x y^T
inline void AddOuter(MatrixD &a, double scale, std::span<const double> x,
                     std::span<const double> y) {
  assert(x.size() == a.rows() && y.size() == a.cols());
  for (size_t r = 0; r < a.rows(); ++r) {
    const double s = scale * x[r];
    if (s != 0) Axpy(s, y, a.row(r));
  }
}

inline MatrixD Matmul(const MatrixD &a, const MatrixD &b) {
  if (a.cols() != b.rows()) {
    throw Error(ErrorCode::kDimensionMismatch, "matmul inner dimensions differ");
  }
  MatrixD out(a.rows(), b.cols());
  for (size_t i = 0; i < a.rows(); ++i) {
    for (size_t k = 0; k < a.cols(); ++k) {
      const double s = a(i, k);
      if (s != 0) Axpy(s, b.row(k), out.row(i));
    }
  }
  return out;
}

inline double Sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// Max-subtracted softmax. Input must be finite and non-empty.
std::vector<double> Softmax(std::span<const double> logits);

// Numerically stable log(sum(exp(v))).
double LogSumExp(std::span<const double> v);

}  // namespace entrec

#endif  // ENTREC_MATRIX_H_
