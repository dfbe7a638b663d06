#pragma once

#include <cassert>
#include <cstddef>
#include <vector>

namespace urllc {

// Minimal dense row-major matrix. Just enough linear algebra for the GCN
// forward/backward passes; anything fancier would be dead weight.
template <typename T = double>
class Mat {
 public:
  Mat() = default;
  Mat(int rows, int cols)
      : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, T{0}) {}

  static Mat filled(int rows, int cols, T value) {
    Mat m(rows, cols);
    for (auto& v : m.data_) v = value;
    return m;
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  T& operator()(int r, int c) { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
  const T& operator()(int r, int c) const {
    return data_[static_cast<std::size_t>(r) * cols_ + c];
  }

  T* row(int r) { return data_.data() + static_cast<std::size_t>(r) * cols_; }
  const T* row(int r) const { return data_.data() + static_cast<std::size_t>(r) * cols_; }

  std::vector<T>& data() { return data_; }
  const std::vector<T>& data() const { return data_; }

  bool same_shape(const Mat& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  template <typename U>
  Mat<U> cast() const {
    Mat<U> m(rows_, cols_);
    for (std::size_t i = 0; i < data_.size(); ++i) m.data()[i] = static_cast<U>(data_[i]);
    return m;
  }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<T> data_;
};

using Matd = Mat<double>;
using Matf = Mat<float>;

// C = A * B, ikj loop order for cache-friendly row-major access.
template <typename T>
Mat<T> matmul(const Mat<T>& a, const Mat<T>& b) {
  assert(a.cols() == b.rows());
  Mat<T> c(a.rows(), b.cols());
  const int n = b.cols();
  for (int i = 0; i < a.rows(); ++i) {
    T* ci = c.row(i);
    const T* ai = a.row(i);
    for (int k = 0; k < a.cols(); ++k) {
      const T aik = ai[k];
      if (aik == T{0}) continue;
      const T* bk = b.row(k);
      for (int j = 0; j < n; ++j) ci[j] += aik * bk[j];
    }
  }
  return c;
}

// C = A^T * B without materializing the transpose.
template <typename T>
Mat<T> matmul_at_b(const Mat<T>& a, const Mat<T>& b) {
  assert(a.rows() == b.rows());
  Mat<T> c(a.cols(), b.cols());
  const int n = b.cols();
  for (int k = 0; k < a.rows(); ++k) {
    const T* ak = a.row(k);
    const T* bk = b.row(k);
    for (int i = 0; i < a.cols(); ++i) {
      const T aki = ak[i];
      if (aki == T{0}) continue;
      T* ci = c.row(i);
      for (int j = 0; j < n; ++j) ci[j] += aki * bk[j];
    }
  }
  return c;
}

// C = A * B^T.
template <typename T>
Mat<T> matmul_a_bt(const Mat<T>& a, const Mat<T>& b) {
  assert(a.cols() == b.cols());
  Mat<T> c(a.rows(), b.rows());
  for (int i = 0; i < a.rows(); ++i) {
    const T* ai = a.row(i);
    T* ci = c.row(i);
    for (int j = 0; j < b.rows(); ++j) {
      const T* bj = b.row(j);
      T acc{0};
      for (int k = 0; k < a.cols(); ++k) acc += ai[k] * bj[k];
      ci[j] = acc;
    }
  }
  return c;
}

}  // namespace urllc
