#pragma once

// Small dense linear algebra over double and exact rationals. Dimensions in
// this library are tiny (d = 1..3 in practice), so everything is row-major
// std::vector storage with straightforward loops.

#include <gmpxx.h>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "fractal_pressure/error.hpp"

namespace fp {

using Rational = mpq_class;

template <class T>
using Vector = std::vector<T>;

template <class T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, T(0)) {}

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = T(1);
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  T& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const T& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  Matrix transposed() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  friend Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols_ != b.rows_) throw Error(ErrorCode::internal, "matrix shape mismatch");
    Matrix c(a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i)
      for (std::size_t k = 0; k < a.cols_; ++k) {
        if (a(i, k) == 0) continue;
        for (std::size_t j = 0; j < b.cols_; ++j) c(i, j) += a(i, k) * b(k, j);
      }
    return c;
  }

  friend Matrix operator-(const Matrix& a, const Matrix& b) {
    Matrix c(a.rows_, a.cols_);
    for (std::size_t i = 0; i < a.data_.size(); ++i) c.data_[i] = a.data_[i] - b.data_[i];
    return c;
  }

  friend Matrix operator*(const T& s, const Matrix& a) {
    Matrix c = a;
    for (auto& x : c.data_) x *= s;
    return c;
  }

  friend bool operator==(const Matrix& a, const Matrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

  const std::vector<T>& data() const noexcept { return data_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

template <class T>
void multiply_into(const Matrix<T>& m, const Vector<T>& x, Vector<T>& out) {
  const std::size_t n = m.rows();
  out.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = 0;
    for (std::size_t j = 0; j < m.cols(); ++j) out[i] += m(i, j) * x[j];
  }
}

template <class T>
Vector<T> operator*(const Matrix<T>& m, const Vector<T>& x) {
  Vector<T> out;
  multiply_into(m, x, out);
  return out;
}

template <class T>
Vector<T> operator+(const Vector<T>& a, const Vector<T>& b) {
  Vector<T> c(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) c[i] = a[i] + b[i];
  return c;
}

template <class T>
Matrix<T> power(const Matrix<T>& m, unsigned k) {
  Matrix<T> result = Matrix<T>::identity(m.rows());
  Matrix<T> base = m;
  while (k > 0) {
    if (k & 1U) result = result * base;
    k >>= 1U;
    if (k > 0) base = base * base;
  }
  return result;
}

// Gaussian elimination. Exact for Rational; partial pivoting for double.
// Throws numeric error on a singular system.
template <class T>
Matrix<T> solve(Matrix<T> a, Matrix<T> b) {
  const std::size_t n = a.rows();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    if constexpr (std::is_same_v<T, double>) {
      for (std::size_t r = col + 1; r < n; ++r)
        if (std::fabs(a(r, col)) > std::fabs(a(pivot, col))) pivot = r;
    } else {
      while (pivot < n && a(pivot, col) == 0) ++pivot;
    }
    if (pivot == n || a(pivot, col) == 0) throw Error(ErrorCode::numeric, "singular linear system");
    if (pivot != col) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(col, j), a(pivot, j));
      for (std::size_t j = 0; j < b.cols(); ++j) std::swap(b(col, j), b(pivot, j));
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col || a(r, col) == 0) continue;
      T factor = a(r, col) / a(col, col);
      for (std::size_t j = col; j < n; ++j) a(r, j) -= factor * a(col, j);
      for (std::size_t j = 0; j < b.cols(); ++j) b(r, j) -= factor * b(col, j);
    }
  }
  for (std::size_t r = 0; r < n; ++r) {
    T inv = T(1) / a(r, r);
    for (std::size_t j = 0; j < b.cols(); ++j) b(r, j) *= inv;
  }
  return b;
}

template <class T>
Matrix<T> inverse(const Matrix<T>& a) {
  return solve(a, Matrix<T>::identity(a.rows()));
}

template <class T>
Vector<T> solve(const Matrix<T>& a, const Vector<T>& b) {
  Matrix<T> rhs(b.size(), 1);
  for (std::size_t i = 0; i < b.size(); ++i) rhs(i, 0) = b[i];
  Matrix<T> x = solve(a, rhs);
  Vector<T> out(b.size());
  for (std::size_t i = 0; i < b.size(); ++i) out[i] = x(i, 0);
  return out;
}

inline double to_double(double x) { return x; }
inline double to_double(const Rational& x) { return x.get_d(); }

Matrix<double> to_double(const Matrix<Rational>& m);
Vector<double> to_double(const Vector<Rational>& v);
inline const Matrix<double>& to_double(const Matrix<double>& m) { return m; }
inline const Vector<double>& to_double(const Vector<double>& v) { return v; }

// Exact rational value of a finite double.
Rational exact_rational(double x);

// Largest singular value.
double spectral_norm(const Matrix<double>& m);
// Ratio of largest to smallest singular value (infinity when singular).
double condition_number(const Matrix<double>& m);

// Accepts "p/q", "-p/q", integers and plain decimals such as "0.25" or "-1.5e-2".
// Throws ErrorCode::config on malformed input or zero denominator.
Rational parse_rational(std::string_view text);
std::string format_rational(const Rational& q);

// Absolute tolerance, in grid-cell units, for boundary decisions in floating
// mode.
inline constexpr double kBoundaryTolerance = 1e-9;

// Grid-coordinate predicates. The double overloads snap values lying within
// kBoundaryTolerance of an integer onto that integer before deciding.
inline double snapped(double x) {
  const double r = std::nearbyint(x);
  return std::fabs(x - r) <= kBoundaryTolerance ? r : x;
}
inline const Rational& snapped(const Rational& x) { return x; }

std::int64_t floor_key(double x);
std::int64_t floor_key(const Rational& x);
std::int64_t ceil_key(double x);
std::int64_t ceil_key(const Rational& x);

inline bool on_integer(double x) { return std::fabs(x - std::nearbyint(x)) <= kBoundaryTolerance; }
inline bool on_integer(const Rational& x) { return x.get_den() == 1; }

}  // namespace fp
