#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "rankscope/linalg.hpp"
#include "rankscope/matrix.hpp"

namespace rankscope {

/// An m x n x p tensor stored as its p frontal m x n slices (A_1; ...; A_p).
template <class Scalar>
class Tensor3 {
 public:
  using value_type = Scalar;
  using Slice = Matrix<Scalar>;

  Tensor3() = default;
  explicit Tensor3(std::vector<Slice> slices) : slices_(std::move(slices)) {
    if (slices_.empty()) fail(ErrorCode::BadShape, "a tensor needs at least one slice");
    const auto& first = slices_.front();
    if (first.rows() == 0 || first.cols() == 0) fail(ErrorCode::BadShape, "slices must be nonempty");
    for (const auto& s : slices_)
      if (s.rows() != first.rows() || s.cols() != first.cols())
        fail(ErrorCode::BadShape, "all slices must share one shape");
  }

  static Tensor3 zeros(std::size_t m, std::size_t n, std::size_t p) {
    return Tensor3(std::vector<Slice>(p, Slice(m, n)));
  }

  std::size_t m() const noexcept { return slices_.empty() ? 0 : slices_.front().rows(); }
  std::size_t n() const noexcept { return slices_.empty() ? 0 : slices_.front().cols(); }
  std::size_t p() const noexcept { return slices_.size(); }
  static constexpr Kind kind() noexcept { return kind_of_v<Scalar>; }

  const Slice& slice(std::size_t k) const { return slices_.at(k); }
  const std::vector<Slice>& slices() const noexcept { return slices_; }

  Scalar& operator()(std::size_t i, std::size_t j, std::size_t k) { return slices_[k](i, j); }
  const Scalar& operator()(std::size_t i, std::size_t j, std::size_t k) const { return slices_[k](i, j); }

  friend bool operator==(const Tensor3& a, const Tensor3& b) { return a.slices_ == b.slices_; }

 private:
  std::vector<Slice> slices_;
};

using IntTensor = Tensor3<Integer>;
using RealTensor = Tensor3<double>;

inline RealTensor to_real(const IntTensor& t) {
  std::vector<RealMat> s;
  s.reserve(t.p());
  for (const auto& a : t.slices()) s.push_back(to_real(a));
  return RealTensor(std::move(s));
}
inline const RealTensor& to_real(const RealTensor& t) { return t; }

/// (P A_1 Q; ...; P A_p Q).
template <class Scalar>
Tensor3<Scalar> sandwich(const Matrix<Scalar>& pmat, const Tensor3<Scalar>& t, const Matrix<Scalar>& qmat) {
  if (pmat.cols() != t.m() || qmat.rows() != t.n()) fail(ErrorCode::BadShape, "sandwich factors do not match the tensor");
  std::vector<Matrix<Scalar>> s;
  s.reserve(t.p());
  for (const auto& a : t.slices()) s.push_back(pmat * a * qmat);
  return Tensor3<Scalar>(std::move(s));
}

/// Slice-wise map, e.g. cutting columns or Kronecker lifting.
template <class Scalar, class F>
Tensor3<Scalar> map_slices(const Tensor3<Scalar>& t, F&& f) {
  std::vector<Matrix<Scalar>> s;
  s.reserve(t.p());
  for (const auto& a : t.slices()) s.push_back(f(a));
  return Tensor3<Scalar>(std::move(s));
}

/// T_{<=j}: the first j columns of every slice.
template <class Scalar>
Tensor3<Scalar> cut_columns(const Tensor3<Scalar>& t, std::size_t j) {
  return map_slices(t, [j](const Matrix<Scalar>& a) { return sub_block(a, Slab::ColsPrefix, j); });
}

/// Vertically stacked slices (mp x n); its rank is the column rank.
template <class Scalar>
Matrix<Scalar> column_flattening(const Tensor3<Scalar>& t) {
  return vstack(std::span<const Matrix<Scalar>>(t.slices()));
}

/// Horizontally aligned slices (m x np); its rank is the row rank.
template <class Scalar>
Matrix<Scalar> row_flattening(const Tensor3<Scalar>& t) {
  return hstack(std::span<const Matrix<Scalar>>(t.slices()));
}

struct FlattenRanks {
  std::size_t crank = 0;
  std::size_t rrank = 0;
  friend bool operator==(const FlattenRanks&, const FlattenRanks&) = default;
};

template <class Scalar>
FlattenRanks flatten_ranks(const Tensor3<Scalar>& t) {
  if constexpr (is_exact_v<Scalar>) {
    return {exact_rank(column_flattening(t)), exact_rank(row_flattening(t))};
  } else {
    return {numerical_rank(to_eigen(column_flattening(t))), numerical_rank(to_eigen(row_flattening(t)))};
  }
}

/// Sum_k x_k A_k as an Eigen matrix.
inline EMat combine(const std::vector<EMat>& slices, const EVec& x) {
  EMat out = EMat::Zero(slices.front().rows(), slices.front().cols());
  for (std::size_t k = 0; k < slices.size(); ++k) out += x(static_cast<Eigen::Index>(k)) * slices[k];
  return out;
}

inline std::vector<EMat> eigen_slices(const RealTensor& t) {
  std::vector<EMat> out;
  out.reserve(t.p());
  for (const auto& a : t.slices()) out.push_back(to_eigen(a));
  return out;
}

inline RealTensor from_eigen_slices(const std::vector<EMat>& slices) {
  std::vector<RealMat> s;
  s.reserve(slices.size());
  for (const auto& a : slices) s.push_back(from_eigen(a));
  return RealTensor(std::move(s));
}

inline RealTensor operator-(const RealTensor& a, const RealTensor& b) {
  if (a.m() != b.m() || a.n() != b.n() || a.p() != b.p()) fail(ErrorCode::BadShape, "tensor shapes differ");
  std::vector<RealMat> s;
  s.reserve(a.p());
  for (std::size_t k = 0; k < a.p(); ++k) s.push_back(a.slice(k) - b.slice(k));
  return RealTensor(std::move(s));
}

inline double max_abs(const RealTensor& t) {
  double best = 0.0;
  for (const auto& a : t.slices()) best = std::max(best, max_abs(a));
  return best;
}

}  // namespace rankscope
