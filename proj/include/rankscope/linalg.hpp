#pragma once

#include <cstddef>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "rankscope/matrix.hpp"

namespace rankscope {

using EMat = Eigen::MatrixXd;
using EVec = Eigen::VectorXd;

inline EMat to_eigen(const RealMat& m) {
  EMat out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) = m(i, j);
  return out;
}
inline EMat to_eigen(const IntMat& m) { return to_eigen(to_real(m)); }

inline RealMat from_eigen(const EMat& m) {
  RealMat out(m.rows(), m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out(i, j) = m(i, j);
  return out;
}

/// Relative threshold below which a singular value counts as zero.
inline constexpr double kRankTolerance = 1e-9;

inline EVec singular_values(const EMat& m) {
  if (m.size() == 0) return EVec();
  return Eigen::JacobiSVD<EMat>(m).singularValues();
}

/// Singular values below kRankTolerance * max(sigma_max, 1) are dropped.
inline std::size_t numerical_rank(const EMat& m, double rel_tol = kRankTolerance) {
  const EVec sv = singular_values(m);
  if (sv.size() == 0) return 0;
  const double cut = rel_tol * std::max(sv(0), 1.0);
  std::size_t r = 0;
  for (Eigen::Index k = 0; k < sv.size(); ++k)
    if (sv(k) > cut) ++r;
  return r;
}

/// Smallest singular value counting min(rows, cols) values; zero for wide
/// matrices when measuring column rank is what matters, so callers pass tall
/// or square matrices.
inline double sigma_min(const EMat& m) {
  const EVec sv = singular_values(m);
  return sv.size() == 0 ? 0.0 : sv(sv.size() - 1);
}

inline double spectral_norm(const EMat& m) {
  const EVec sv = singular_values(m);
  return sv.size() == 0 ? 0.0 : sv(0);
}

inline double condition_number(const EMat& m) {
  const EVec sv = singular_values(m);
  if (sv.size() == 0) return 1.0;
  const double lo = sv(sv.size() - 1);
  return lo == 0.0 ? std::numeric_limits<double>::infinity() : sv(0) / lo;
}

/// Orthonormal basis of the right null space, using the same relative cut as
/// `numerical_rank`.
inline EMat null_space(const EMat& m, double rel_tol = kRankTolerance) {
  Eigen::JacobiSVD<EMat> svd(m, Eigen::ComputeFullV);
  const EVec& sv = svd.singularValues();
  const double cut = rel_tol * std::max(sv.size() ? sv(0) : 0.0, 1.0);
  Eigen::Index r = 0;
  for (Eigen::Index k = 0; k < sv.size(); ++k)
    if (sv(k) > cut) ++r;
  return svd.matrixV().rightCols(m.cols() - r);
}

/// Exact rank over the rationals by fraction-free (Bareiss) elimination.
inline std::size_t exact_rank(IntMat m) {
  const std::size_t rows = m.rows(), cols = m.cols();
  std::size_t rank = 0;
  Integer prev = 1;
  for (std::size_t col = 0; col < cols && rank < rows; ++col) {
    std::size_t pivot = rank;
    while (pivot < rows && m(pivot, col) == 0) ++pivot;
    if (pivot == rows) continue;
    if (pivot != rank)
      for (std::size_t j = 0; j < cols; ++j) std::swap(m(pivot, j), m(rank, j));
    for (std::size_t i = rank + 1; i < rows; ++i) {
      for (std::size_t j = col + 1; j < cols; ++j)
        m(i, j) = (m(rank, col) * m(i, j) - m(i, col) * m(rank, j)) / prev;
      m(i, col) = 0;
    }
    prev = m(rank, col);
    ++rank;
  }
  return rank;
}

}  // namespace rankscope
