#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>

#include "rankscope/random.hpp"
#include "rankscope/tensor.hpp"

namespace rankscope {

/// Factors of sum_r a_r (x) b_r (x) c_r: T(i, j, k) = sum_r A(i,r) B(j,r) C(k,r).
struct CpFactors {
  EMat a;
  EMat b;
  EMat c;
};

struct CpOptions {
  std::size_t restarts = 20;
  std::uint64_t seed = 0;
  std::size_t als_sweeps = 50;
  std::size_t lm_iters = 400;
  /// FitFound threshold on |T - model|_F / |T|_F.
  double fit_tol = 1e-6;
};

struct CpFit {
  bool found = false;
  /// Best relative residual over the restarts that ran.
  double residual = std::numeric_limits<double>::infinity();
  std::size_t restarts_used = 0;
  std::optional<CpFactors> factors;
};

namespace detail {

inline EMat cp_model(const EMat& a, const EMat& b, const EMat& c, std::size_t m, std::size_t n, std::size_t p) {
  // Rows indexed by k*m*n + i*n + j.
  EMat out(static_cast<Eigen::Index>(m * n * p), 1);
  Eigen::Index at = 0;
  for (Eigen::Index k = 0; k < c.rows(); ++k)
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      for (Eigen::Index j = 0; j < b.rows(); ++j) out(at++) = (a.row(i).cwiseProduct(b.row(j)).cwiseProduct(c.row(k))).sum();
  return out;
}

inline EVec flatten(const RealTensor& t) {
  EVec v(static_cast<Eigen::Index>(t.m() * t.n() * t.p()));
  Eigen::Index at = 0;
  for (std::size_t k = 0; k < t.p(); ++k)
    for (std::size_t i = 0; i < t.m(); ++i)
      for (std::size_t j = 0; j < t.n(); ++j) v(at++) = t(i, j, k);
  return v;
}

/// One ALS sweep; each factor is the least-squares solution with the other
/// two fixed.
inline void als_sweep(const RealTensor& t, EMat& a, EMat& b, EMat& c) {
  const auto m = a.rows(), n = b.rows(), p = c.rows(), r = a.cols();
  auto solve = [](const EMat& gram, const EMat& rhs) {
    return EMat(gram.completeOrthogonalDecomposition().solve(rhs.transpose()).transpose());
  };
  EMat rhs = EMat::Zero(m, r);
  for (Eigen::Index k = 0; k < p; ++k)
    for (Eigen::Index i = 0; i < m; ++i)
      for (Eigen::Index j = 0; j < n; ++j) rhs.row(i) += t(i, j, k) * b.row(j).cwiseProduct(c.row(k));
  a = solve((b.transpose() * b).cwiseProduct(c.transpose() * c), rhs);
  rhs = EMat::Zero(n, r);
  for (Eigen::Index k = 0; k < p; ++k)
    for (Eigen::Index i = 0; i < m; ++i)
      for (Eigen::Index j = 0; j < n; ++j) rhs.row(j) += t(i, j, k) * a.row(i).cwiseProduct(c.row(k));
  b = solve((a.transpose() * a).cwiseProduct(c.transpose() * c), rhs);
  rhs = EMat::Zero(p, r);
  for (Eigen::Index k = 0; k < p; ++k)
    for (Eigen::Index i = 0; i < m; ++i)
      for (Eigen::Index j = 0; j < n; ++j) rhs.row(k) += t(i, j, k) * a.row(i).cwiseProduct(b.row(j));
  c = solve((a.transpose() * a).cwiseProduct(b.transpose() * b), rhs);
}

/// Levenberg-Marquardt on all factor entries at once.
inline double lm_polish(const EVec& target, EMat& a, EMat& b, EMat& c, std::size_t iters, double stop) {
  const auto m = a.rows(), n = b.rows(), p = c.rows(), r = a.cols();
  const Eigen::Index np = r * (m + n + p);
  auto pack = [&] {
    EVec th(np);
    th << Eigen::Map<const EVec>(a.data(), m * r), Eigen::Map<const EVec>(b.data(), n * r),
        Eigen::Map<const EVec>(c.data(), p * r);
    return th;
  };
  auto unpack = [&](const EVec& th) {
    a = Eigen::Map<const EMat>(th.data(), m, r);
    b = Eigen::Map<const EMat>(th.data() + m * r, n, r);
    c = Eigen::Map<const EMat>(th.data() + (m + n) * r, p, r);
  };
  auto residual = [&] { return EVec(cp_model(a, b, c, m, n, p) - target); };

  EVec res = residual();
  double cost = res.squaredNorm();
  double mu = 1e-3;
  EMat jac(target.size(), np);
  for (std::size_t it = 0; it < iters && std::sqrt(cost) > stop; ++it) {
    jac.setZero();
    Eigen::Index row = 0;
    for (Eigen::Index k = 0; k < p; ++k)
      for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = 0; j < n; ++j, ++row)
          for (Eigen::Index q = 0; q < r; ++q) {
            jac(row, q * m + i) = b(j, q) * c(k, q);
            jac(row, m * r + q * n + j) = a(i, q) * c(k, q);
            jac(row, (m + n) * r + q * p + k) = a(i, q) * b(j, q);
          }
    const EMat jtj = jac.transpose() * jac;
    const EVec g = jac.transpose() * res;
    const EVec th = pack();
    bool improved = false;
    for (int tries = 0; tries < 12 && !improved; ++tries) {
      EMat h = jtj;
      h.diagonal().array() += mu * (1.0 + jtj.diagonal().array());
      const EVec step = h.ldlt().solve(-g);
      unpack(th + step);
      const EVec trial = residual();
      const double tc = trial.squaredNorm();
      if (tc < cost) {
        res = trial;
        const bool tiny = cost - tc < 1e-15 * cost;
        cost = tc;
        mu = std::max(mu / 3.0, 1e-12);
        improved = true;
        if (tiny && it > 50) it = iters;
      } else {
        mu *= 4.0;
      }
    }
    if (!improved) {
      unpack(th);
      break;
    }
  }
  return std::sqrt(cost);
}

}  // namespace detail

/// Numerical evidence for rank <= r: restarts of ALS from Gaussian factors,
/// each finished by Levenberg-Marquardt. FitFound proves nothing exactly; a
/// miss says nothing about rank > r.
inline CpFit rank_leq_oracle(const RealTensor& t, std::size_t r, const CpOptions& opt = {}) {
  if (r == 0) fail(ErrorCode::BadIndex, "rank_leq_oracle needs r >= 1");
  const EVec target = detail::flatten(t);
  const double norm = target.norm();
  CpFit out;
  if (norm == 0.0) {
    out.found = true;
    out.residual = 0.0;
    out.restarts_used = 0;
    return out;
  }
  const RealTensor unit = map_slices(t, [norm](const RealMat& s) { return s * (1.0 / norm); });
  const EVec utarget = target / norm;
  const auto ri = static_cast<Eigen::Index>(r);
  for (std::size_t restart = 0; restart < std::max<std::size_t>(opt.restarts, 1); ++restart) {
    Rng rng(derive_seed(opt.seed, restart));
    EMat a = gaussian_matrix(rng, static_cast<Eigen::Index>(t.m()), ri);
    EMat b = gaussian_matrix(rng, static_cast<Eigen::Index>(t.n()), ri);
    EMat c = gaussian_matrix(rng, static_cast<Eigen::Index>(t.p()), ri);
    for (std::size_t s = 0; s < opt.als_sweeps; ++s) detail::als_sweep(unit, a, b, c);
    const double res = detail::lm_polish(utarget, a, b, c, opt.lm_iters, 0.01 * opt.fit_tol);
    ++out.restarts_used;
    if (std::isfinite(res) && res < out.residual) {
      out.residual = res;
      out.factors = CpFactors{a * norm, b, c};
    }
    if (out.residual <= opt.fit_tol) {
      out.found = true;
      break;
    }
  }
  return out;
}

/// Rank lower bound from the flattenings never exceeds the smallest r with a
/// numerical fit.
inline bool lower_bound_check(const RealTensor& t, const CpOptions& opt = {}) {
  const FlattenRanks fr = flatten_ranks(t);
  const std::size_t bound = std::max(fr.crank, fr.rrank);
  const std::size_t cap = std::min({t.m() * t.n(), t.m() * t.p(), t.n() * t.p()});
  for (std::size_t r = 1; r <= cap; ++r)
    if (rank_leq_oracle(t, r, opt).found) return r >= bound;
  return true;
}

}  // namespace rankscope
