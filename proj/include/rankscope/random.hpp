#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

#include "rankscope/tensor.hpp"

namespace rankscope {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer; mixes (seed, stream) into an independent child seed.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline EVec gaussian_vector(Rng& rng, Eigen::Index n) {
  std::normal_distribution<double> g;
  EVec v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = g(rng);
  return v;
}

inline EMat gaussian_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> g;
  EMat out(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) out(i, j) = g(rng);
  return out;
}

inline EVec random_unit(Rng& rng, Eigen::Index n) {
  EVec v;
  do v = gaussian_vector(rng, n);
  while (v.norm() < 1e-12);
  return v.normalized();
}

/// I.i.d. standard Gaussian m x n x p tensor.
inline RealTensor gaussian_tensor(Rng& rng, std::size_t m, std::size_t n, std::size_t p) {
  std::vector<RealMat> s;
  s.reserve(p);
  for (std::size_t k = 0; k < p; ++k)
    s.push_back(from_eigen(gaussian_matrix(rng, static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n))));
  return RealTensor(std::move(s));
}

inline IntTensor random_int_tensor(Rng& rng, std::size_t m, std::size_t n, std::size_t p, int lo, int hi) {
  std::uniform_int_distribution<int> u(lo, hi);
  std::vector<IntMat> s;
  for (std::size_t k = 0; k < p; ++k) {
    IntMat a(m, n);
    for (auto& v : a.entries()) v = u(rng);
    s.push_back(std::move(a));
  }
  return IntTensor(std::move(s));
}

}  // namespace rankscope
