#pragma once

#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

namespace superloc {

/// Row-major dense matrix over a ring T that need not be a field or commutative.
///
/// T must be constructible from int (0 and 1) and provide +, -, * and unary -.
template <typename T>
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(int rows, int cols) : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, T(0)) {}

  static DenseMatrix identity(int n) {
    DenseMatrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = T(1);
    return m;
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  bool is_square() const { return rows_ == cols_; }

  T& operator()(int r, int c) { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
  const T& operator()(int r, int c) const { return data_[static_cast<std::size_t>(r) * cols_ + c]; }

  DenseMatrix block(int r0, int c0, int nr, int nc) const {
    DenseMatrix b(nr, nc);
    for (int i = 0; i < nr; ++i)
      for (int j = 0; j < nc; ++j) b(i, j) = (*this)(r0 + i, c0 + j);
    return b;
  }

  void set_block(int r0, int c0, const DenseMatrix& b) {
    for (int i = 0; i < b.rows(); ++i)
      for (int j = 0; j < b.cols(); ++j) (*this)(r0 + i, c0 + j) = b(i, j);
  }

  DenseMatrix transpose() const {
    DenseMatrix t(cols_, rows_);
    for (int i = 0; i < rows_; ++i)
      for (int j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  template <typename F>
  auto map(F&& f) const {
    using U = decltype(f(std::declval<const T&>()));
    DenseMatrix<U> out(rows_, cols_);
    for (int i = 0; i < rows_; ++i)
      for (int j = 0; j < cols_; ++j) out(i, j) = f((*this)(i, j));
    return out;
  }

  DenseMatrix& operator+=(const DenseMatrix& o) {
    check_same(o);
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
    return *this;
  }
  DenseMatrix& operator-=(const DenseMatrix& o) {
    check_same(o);
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
    return *this;
  }
  friend DenseMatrix operator+(DenseMatrix a, const DenseMatrix& b) { return a += b; }
  friend DenseMatrix operator-(DenseMatrix a, const DenseMatrix& b) { return a -= b; }
  DenseMatrix operator-() const {
    DenseMatrix r(rows_, cols_);
    for (std::size_t k = 0; k < data_.size(); ++k) r.data_[k] = -data_[k];
    return r;
  }

  friend DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols_ != b.rows_) throw std::invalid_argument("matrix product dimension mismatch");
    DenseMatrix r(a.rows_, b.cols_);
    for (int i = 0; i < a.rows_; ++i)
      for (int k = 0; k < a.cols_; ++k)
        for (int j = 0; j < b.cols_; ++j) r(i, j) += a(i, k) * b(k, j);
    return r;
  }

  friend bool operator==(const DenseMatrix& a, const DenseMatrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

 private:
  void check_same(const DenseMatrix& o) const {
    if (rows_ != o.rows_ || cols_ != o.cols_) throw std::invalid_argument("matrix shape mismatch");
  }

  int rows_ = 0;
  int cols_ = 0;
  std::vector<T> data_;
};

/// Determinant by Laplace expansion along the first row. Entries must commute.
template <typename T>
T determinant(const DenseMatrix<T>& m) {
  if (!m.is_square()) throw std::invalid_argument("determinant of a non-square matrix");
  const int n = m.rows();
  if (n == 0) return T(1);
  if (n == 1) return m(0, 0);
  T det(0);
  for (int j = 0; j < n; ++j) {
    if (m(0, j) == T(0)) continue;
    DenseMatrix<T> minor(n - 1, n - 1);
    for (int r = 1; r < n; ++r)
      for (int c = 0, cc = 0; c < n; ++c) {
        if (c == j) continue;
        minor(r - 1, cc++) = m(r, c);
      }
    T term = m(0, j) * determinant(minor);
    if (j % 2) {
      det -= term;
    } else {
      det += term;
    }
  }
  return det;
}

/// Pfaffian by expansion along the first row:
/// pf(S) = sum_{j>0} (-1)^{j+1} S(0,j) pf(S without rows/cols 0 and j).
template <typename T>
T pfaffian(const DenseMatrix<T>& s) {
  if (!s.is_square()) throw std::invalid_argument("pfaffian of a non-square matrix");
  const int n = s.rows();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j)
      if (!(s(i, j) == -s(j, i))) throw std::invalid_argument("pfaffian of a matrix that is not skew-symmetric");
  if (n % 2) throw std::invalid_argument("pfaffian of an odd-dimensional matrix");
  if (n == 0) return T(1);
  T result(0);
  for (int j = 1; j < n; ++j) {
    if (s(0, j) == T(0)) continue;
    std::vector<int> keep;
    for (int k = 1; k < n; ++k)
      if (k != j) keep.push_back(k);
    DenseMatrix<T> minor(n - 2, n - 2);
    for (int a = 0; a < n - 2; ++a)
      for (int b = 0; b < n - 2; ++b) minor(a, b) = s(keep[a], keep[b]);
    T term = s(0, j) * pfaffian(minor);
    if (j % 2) {
      result += term;
    } else {
      result -= term;
    }
  }
  return result;
}

}  // namespace superloc
