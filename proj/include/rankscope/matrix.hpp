#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "rankscope/error.hpp"

namespace rankscope {

using Integer = boost::multiprecision::cpp_int;

enum class Kind { ExactInt, Real };

template <class Scalar>
inline constexpr bool is_exact_v = std::is_same_v<Scalar, Integer>;

template <class Scalar>
inline constexpr Kind kind_of_v = is_exact_v<Scalar> ? Kind::ExactInt : Kind::Real;

/// Dense row-major matrix. `Matrix<Integer>` is the exact kind and
/// `Matrix<double>` the real kind; crossing between them is always an explicit
/// call to `to_real`.
template <class Scalar>
class Matrix {
  static_assert(std::is_same_v<Scalar, Integer> || std::is_same_v<Scalar, double>,
                "Matrix supports exact integers and doubles only");

 public:
  using value_type = Scalar;

  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, Scalar(0)) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<Scalar> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) fail(ErrorCode::BadShape, "entry count does not match rows x cols");
  }
  Matrix(std::initializer_list<std::initializer_list<Scalar>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
      if (r.size() != cols_) fail(ErrorCode::BadShape, "ragged matrix literal");
      data_.insert(data_.end(), r.begin(), r.end());
    }
  }

  static Matrix identity(std::size_t n) {
    Matrix out(n, n);
    for (std::size_t i = 0; i < n; ++i) out(i, i) = Scalar(1);
    return out;
  }
  static Matrix zeros(std::size_t rows, std::size_t cols) { return Matrix(rows, cols); }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }
  static constexpr Kind kind() noexcept { return kind_of_v<Scalar>; }

  Scalar& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const Scalar& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<const Scalar> entries() const noexcept { return data_; }
  std::span<Scalar> entries() noexcept { return data_; }

  Matrix transpose() const {
    Matrix out(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) out(j, i) = (*this)(i, j);
    return out;
  }

  /// Copy of the `nr x nc` block whose top-left corner is (r0, c0).
  Matrix block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const {
    if (r0 + nr > rows_ || c0 + nc > cols_) fail(ErrorCode::BadIndex, "block exceeds matrix bounds");
    Matrix out(nr, nc);
    for (std::size_t i = 0; i < nr; ++i)
      for (std::size_t j = 0; j < nc; ++j) out(i, j) = (*this)(r0 + i, c0 + j);
    return out;
  }

  void set_block(std::size_t r0, std::size_t c0, const Matrix& b) {
    if (r0 + b.rows() > rows_ || c0 + b.cols() > cols_) fail(ErrorCode::BadIndex, "block exceeds matrix bounds");
    for (std::size_t i = 0; i < b.rows(); ++i)
      for (std::size_t j = 0; j < b.cols(); ++j) (*this)(r0 + i, c0 + j) = b(i, j);
  }

  Matrix& operator+=(const Matrix& o) {
    require_same_shape(o);
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
    return *this;
  }
  Matrix& operator-=(const Matrix& o) {
    require_same_shape(o);
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
    return *this;
  }
  Matrix& operator*=(const Scalar& s) {
    for (auto& v : data_) v *= s;
    return *this;
  }

  friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
  friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
  friend Matrix operator*(Matrix a, const Scalar& s) { return a *= s; }
  friend Matrix operator*(const Scalar& s, Matrix a) { return a *= s; }
  friend Matrix operator-(Matrix a) {
    for (auto& v : a.data_) v = -v;
    return a;
  }

  friend Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols_ != b.rows_) fail(ErrorCode::BadShape, "inner dimensions differ in matrix product");
    Matrix out(a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i)
      for (std::size_t k = 0; k < a.cols_; ++k) {
        const Scalar& aik = a(i, k);
        if (aik == 0) continue;
        for (std::size_t j = 0; j < b.cols_; ++j) out(i, j) += aik * b(k, j);
      }
    return out;
  }

  friend bool operator==(const Matrix& a, const Matrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

  bool is_zero() const {
    return std::all_of(data_.begin(), data_.end(), [](const Scalar& v) { return v == 0; });
  }

 private:
  void require_same_shape(const Matrix& o) const {
    if (rows_ != o.rows_ || cols_ != o.cols_) fail(ErrorCode::BadShape, "matrix shapes differ");
  }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Scalar> data_;
};

using IntMat = Matrix<Integer>;
using RealMat = Matrix<double>;

inline RealMat to_real(const IntMat& m) {
  RealMat out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) = m(i, j).template convert_to<double>();
  return out;
}
inline const RealMat& to_real(const RealMat& m) { return m; }

template <class Scalar>
double max_abs(const Matrix<Scalar>& m) {
  double best = 0.0;
  for (const auto& v : m.entries()) {
    double a;
    if constexpr (is_exact_v<Scalar>) a = std::fabs(v.template convert_to<double>());
    else a = std::fabs(v);
    best = std::max(best, a);
  }
  return best;
}

/// Kronecker product: block (i, j) of the result is a(i, j) * b.
template <class Scalar>
Matrix<Scalar> kron(const Matrix<Scalar>& a, const Matrix<Scalar>& b) {
  Matrix<Scalar> out(a.rows() * b.rows(), a.cols() * b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) {
      const Scalar& aij = a(i, j);
      if (aij == 0) continue;
      for (std::size_t k = 0; k < b.rows(); ++k)
        for (std::size_t l = 0; l < b.cols(); ++l) out(i * b.rows() + k, j * b.cols() + l) = aij * b(k, l);
    }
  return out;
}

/// Left-folded Kronecker chain, e.g. kron_chain({A, P, Q}) = A (x) P (x) Q.
template <class Scalar>
Matrix<Scalar> kron_chain(std::initializer_list<Matrix<Scalar>> factors) {
  if (factors.size() == 0) return Matrix<Scalar>::identity(1);
  auto it = factors.begin();
  Matrix<Scalar> out = *it++;
  for (; it != factors.end(); ++it) out = kron(out, *it);
  return out;
}

template <class Scalar>
Matrix<Scalar> block_diag(std::span<const Matrix<Scalar>> parts) {
  if (parts.empty()) fail(ErrorCode::BadShape, "block_diag needs at least one block");
  std::size_t r = 0, c = 0;
  for (const auto& p : parts) {
    r += p.rows();
    c += p.cols();
  }
  Matrix<Scalar> out(r, c);
  r = c = 0;
  for (const auto& p : parts) {
    out.set_block(r, c, p);
    r += p.rows();
    c += p.cols();
  }
  return out;
}

template <class Scalar>
Matrix<Scalar> block_diag(std::initializer_list<Matrix<Scalar>> parts) {
  return block_diag(std::span<const Matrix<Scalar>>(parts.begin(), parts.size()));
}

/// Which slab of a matrix `sub_block` returns.
enum class Slab {
  ColsPrefix,  ///< first j columns
  ColsSuffix,  ///< columns after the first j
  RowsPrefix,  ///< first i rows
  RowsSuffix,  ///< rows after the first i
};

template <class Scalar>
Matrix<Scalar> sub_block(const Matrix<Scalar>& m, Slab slab, std::size_t index) {
  const bool by_cols = slab == Slab::ColsPrefix || slab == Slab::ColsSuffix;
  const std::size_t extent = by_cols ? m.cols() : m.rows();
  if (index > extent) fail(ErrorCode::BadIndex, "sub_block index " + std::to_string(index) + " exceeds " + std::to_string(extent));
  switch (slab) {
    case Slab::ColsPrefix: return m.block(0, 0, m.rows(), index);
    case Slab::ColsSuffix: return m.block(0, index, m.rows(), m.cols() - index);
    case Slab::RowsPrefix: return m.block(0, 0, index, m.cols());
    case Slab::RowsSuffix: return m.block(index, 0, m.rows() - index, m.cols());
  }
  return {};
}

template <class Scalar>
Matrix<Scalar> hstack(std::span<const Matrix<Scalar>> parts) {
  if (parts.empty()) return {};
  std::size_t c = 0;
  const std::size_t r = parts.front().rows();
  for (const auto& p : parts) {
    if (p.rows() != r) fail(ErrorCode::BadShape, "hstack row counts differ");
    c += p.cols();
  }
  Matrix<Scalar> out(r, c);
  c = 0;
  for (const auto& p : parts) {
    out.set_block(0, c, p);
    c += p.cols();
  }
  return out;
}

template <class Scalar>
Matrix<Scalar> hstack(std::initializer_list<Matrix<Scalar>> parts) {
  return hstack(std::span<const Matrix<Scalar>>(parts.begin(), parts.size()));
}

template <class Scalar>
Matrix<Scalar> vstack(std::span<const Matrix<Scalar>> parts) {
  if (parts.empty()) return {};
  std::size_t r = 0;
  const std::size_t c = parts.front().cols();
  for (const auto& p : parts) {
    if (p.cols() != c) fail(ErrorCode::BadShape, "vstack column counts differ");
    r += p.rows();
  }
  Matrix<Scalar> out(r, c);
  r = 0;
  for (const auto& p : parts) {
    out.set_block(r, 0, p);
    r += p.rows();
  }
  return out;
}

template <class Scalar>
Matrix<Scalar> vstack(std::initializer_list<Matrix<Scalar>> parts) {
  return vstack(std::span<const Matrix<Scalar>>(parts.begin(), parts.size()));
}

/// The 2x2 building blocks shared by every Hurwitz-Radon construction.
namespace basis {
inline IntMat rot() { return IntMat{{0, 1}, {-1, 0}}; }
inline IntMat swap() { return IntMat{{0, 1}, {1, 0}}; }
inline IntMat flip() { return IntMat{{1, 0}, {0, -1}}; }
inline IntMat eye(std::size_t n) { return IntMat::identity(n); }
}  // namespace basis

}  // namespace rankscope
