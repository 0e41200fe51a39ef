#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "rankscope/random.hpp"
#include "rankscope/tensor.hpp"

namespace rankscope {

/// Transforms taking an s x t x u tensor to a normal form, plus the max-abs
/// deviation of sandwich(pmat, input, qmat) from the target pattern.
struct CanonResult {
  RealMat pmat;
  RealMat qmat;
  RealTensor canonical;
  double residual = 0.0;
  double cond_p = 1.0;
  double cond_q = 1.0;
};

struct CanonOptions {
  double tolerance = 1e-8;
  std::uint64_t seed = 0;
  std::size_t attempts = 8;
  /// Transforms with a larger condition number are treated as singular.
  double max_condition = 1e12;
};

/// Staircase target of the multi-slice normal form for s x t x u, v = t-(u-1)s:
/// X_1 = (E_s, O), X_k = (O_{v+(k-2)s}, E_s, O) for k >= 2, X_u = (O, E_s).
inline RealTensor staircase_pattern(std::size_t s, std::size_t t, std::size_t u) {
  if (u < 2 || (u - 1) * s >= t) fail(ErrorCode::BadShape, "staircase pattern needs u >= 2 and (u-1)s < t");
  const std::size_t v = t - (u - 1) * s;
  std::vector<RealMat> slices(u, RealMat(s, t));
  for (std::size_t i = 0; i < s; ++i) slices[0](i, i) = 1.0;
  for (std::size_t k = 1; k < u; ++k)
    for (std::size_t i = 0; i < s; ++i) slices[k](i, v + (k - 1) * s + i) = 1.0;
  return RealTensor(std::move(slices));
}

/// Max-abs deviation from the multi-slice normal form. Slice 1 is
/// (E_s, O_{s x v}, M) where M is free except that its top min(v, s) rows
/// must vanish.
inline double staircase_residual(const RealTensor& z) {
  const std::size_t s = z.m(), t = z.n(), u = z.p();
  const RealTensor pattern = staircase_pattern(s, t, u);
  const std::size_t v = t - (u - 1) * s;
  double res = 0.0;
  for (std::size_t k = 1; k < u; ++k) res = std::max(res, max_abs(z.slice(k) - pattern.slice(k)));
  const RealMat& z1 = z.slice(0);
  const std::size_t pinned_rows = std::min(v, s);
  for (std::size_t i = 0; i < s; ++i)
    for (std::size_t j = 0; j < t; ++j) {
      double want;
      if (j < s) want = i == j ? 1.0 : 0.0;
      else if (j < s + v || i < pinned_rows) want = 0.0;
      else continue;
      res = std::max(res, std::fabs(z1(i, j) - want));
    }
  return res;
}

namespace detail {

struct RawTransform {
  EMat pmat;
  EMat qmat;
};

inline bool usable(const EMat& m, double max_condition) {
  const double c = condition_number(m);
  return std::isfinite(c) && c <= max_condition;
}

/// Q in GL(t) with A Q = (O, E_s) for a full-row-rank s x t matrix A. Uses
/// Q = (N | A^+) with N the projection of the leading coordinate vectors onto
/// ker A, so A = (O, E_s) gives Q = E_t exactly.
inline EMat last_slice_transform(const EMat& a, double max_condition) {
  const Eigen::Index s = a.rows(), t = a.cols();
  if (numerical_rank(a) != static_cast<std::size_t>(s))
    fail(ErrorCode::DomainError, "last slice is not of full row rank");
  const EMat pinv = a.transpose() * (a * a.transpose()).inverse();
  EMat q(t, t);
  const EMat proj = EMat::Identity(t, t) - pinv * a;
  q.leftCols(t - s) = proj.leftCols(t - s);
  q.rightCols(s) = pinv;
  if (!usable(q, max_condition)) q.leftCols(t - s) = null_space(a);
  if (!usable(q, max_condition)) fail(ErrorCode::DomainError, "no well-conditioned completion of the last slice");
  return q;
}

/// Solves A_1 Q = (R, O) and A_2 Q = (O, R) for (Q, R); then R^{-1} A Q is
/// ((E_s, O); (O, E_s)). The first candidate is the orthogonal projection of
/// (E_t, E_s) onto the solution space, so canonical inputs map to identities.
inline RawTransform pencil_transform(const EMat& a1, const EMat& a2, const CanonOptions& opt) {
  const Eigen::Index s = a1.rows(), t = a1.cols();
  const Eigen::Index nq = t * t, nr = s * s;
  EMat sys = EMat::Zero(2 * s * t, nq + nr);
  auto qi = [t](Eigen::Index k, Eigen::Index j) { return k * t + j; };
  auto ri = [nq, s](Eigen::Index a, Eigen::Index b) { return nq + a * s + b; };
  for (Eigen::Index i = 0; i < s; ++i)
    for (Eigen::Index j = 0; j < t; ++j) {
      const Eigen::Index e1 = i * t + j, e2 = s * t + i * t + j;
      for (Eigen::Index k = 0; k < t; ++k) {
        sys(e1, qi(k, j)) = a1(i, k);
        sys(e2, qi(k, j)) = a2(i, k);
      }
      if (j < s) sys(e1, ri(i, j)) = -1.0;
      if (j >= t - s) sys(e2, ri(i, j - (t - s))) = -1.0;
    }
  const EMat basis = null_space(sys);
  if (basis.cols() == 0) fail(ErrorCode::DomainError, "pencil has no nonzero normalizing transform");

  EVec identity = EVec::Zero(nq + nr);
  for (Eigen::Index k = 0; k < t; ++k) identity(qi(k, k)) = 1.0;
  for (Eigen::Index a = 0; a < s; ++a) identity(ri(a, a)) = 1.0;
  const EVec nearest = basis * (basis.transpose() * identity);
  const double spread = std::max(nearest.norm(), 1.0) / std::sqrt(static_cast<double>(basis.cols()));

  auto unpack = [&](const EVec& z, EMat& q, EMat& r) {
    q.resize(t, t);
    r.resize(s, s);
    for (Eigen::Index k = 0; k < t; ++k)
      for (Eigen::Index j = 0; j < t; ++j) q(k, j) = z(qi(k, j));
    for (Eigen::Index a = 0; a < s; ++a)
      for (Eigen::Index b = 0; b < s; ++b) r(a, b) = z(ri(a, b));
  };
  // log cond Q + log cond R; infinite when either is unusable.
  auto score = [&](const EVec& z) {
    EMat q, r;
    unpack(z, q, r);
    const double cq = condition_number(q), cr = condition_number(r);
    if (!std::isfinite(cq) || !std::isfinite(cr) || cq > opt.max_condition || cr > opt.max_condition)
      return std::numeric_limits<double>::infinity();
    return std::log(cq) + std::log(cr);
  };

  // The solution set is a linear space; any invertible member works, so
  // prefer the best conditioned one. The projection of (E_t, E_s) is tried
  // first and kept on ties, which makes canonical inputs fixed points.
  Rng rng(opt.seed);
  EVec best = nearest;
  double best_score = score(nearest);
  std::vector<EVec> kept{nearest};
  if (best_score > 1e-12) {
    const std::size_t tries = std::max<std::size_t>(opt.attempts, 1) * 4;
    for (std::size_t k = 0; k < tries; ++k) {
      const EVec z = nearest + spread * (basis * gaussian_vector(rng, basis.cols()));
      const double sc = score(z);
      if (sc < best_score) {
        best = z;
        best_score = sc;
        kept.push_back(z);
      }
    }
    double step = 0.3;
    for (std::size_t it = 0; it < 60 * opt.attempts && std::isfinite(best_score) && step > 1e-4; ++it) {
      const EVec z = best + step * best.norm() * (basis * gaussian_vector(rng, basis.cols())).normalized();
      const double sc = score(z);
      if (sc < best_score - 1e-9) {
        best = z;
        best_score = sc;
        kept.push_back(z);
        step *= 1.5;
      } else {
        step *= 0.93;
      }
    }
  }
  // Best conditioned first; fall back along the improvement path.
  EMat want1 = EMat::Zero(s, t), want2 = EMat::Zero(s, t);
  want1.leftCols(s).setIdentity();
  want2.rightCols(s).setIdentity();
  for (auto it = kept.rbegin(); it != kept.rend(); ++it) {
    if (!std::isfinite(score(*it))) continue;
    EMat q, r;
    unpack(*it, q, r);
    const EMat p = r.inverse();
    const double res = std::max((p * a1 * q - want1).cwiseAbs().maxCoeff(), (p * a2 * q - want2).cwiseAbs().maxCoeff());
    if (res <= 0.1 * opt.tolerance) return {p, q};
  }
  fail(ErrorCode::DomainError, "pencil lies outside the generic domain: no invertible normalizing pair found");
}

inline RawTransform staircase_transform(const std::vector<EMat>& slices, const CanonOptions& opt) {
  const std::size_t u = slices.size();
  const Eigen::Index s = slices.front().rows(), t = slices.front().cols();
  if (u == 2) return pencil_transform(slices[0], slices[1], opt);

  const Eigen::Index v = t - static_cast<Eigen::Index>(u - 1) * s;
  const Eigen::Index w = t - s;  // width left after peeling the last slice
  const EMat q1 = last_slice_transform(slices.back(), opt.max_condition);

  std::vector<EMat> front, tails;
  for (std::size_t k = 0; k + 1 < u; ++k) {
    const EMat aq = slices[k] * q1;
    front.push_back(aq.leftCols(w));
    tails.push_back(aq.rightCols(s));
  }
  const RawTransform inner = staircase_transform(front, opt);
  const EMat p_inv = inner.pmat.inverse();

  // Clear the trailing s columns of slices 2..u-1 and the pinned rows of
  // slice 1 by adding multiples of the leading columns: Q3 = [[E, W], [O, E]].
  EMat wmat = EMat::Zero(w, s);
  for (std::size_t k = 1; k + 1 < u; ++k) {
    const EMat g = inner.pmat * tails[k] * p_inv;
    wmat.middleRows(v + static_cast<Eigen::Index>(k - 1) * s, s) = -g;
  }
  const EMat x1 = inner.pmat * front[0] * inner.qmat;
  const EMat g1 = inner.pmat * tails[0] * p_inv;
  const Eigen::Index h = std::min(v, s);
  if (h > 0) {
    const EMat rhs = -(g1.topRows(h) + x1.topRightCorner(h, w - h) * wmat.bottomRows(w - h));
    wmat.topRows(h) = x1.topLeftCorner(h, h).partialPivLu().solve(rhs);
  }

  EMat q2 = EMat::Zero(t, t);
  q2.topLeftCorner(w, w) = inner.qmat;
  q2.bottomRightCorner(s, s) = p_inv;
  EMat q3 = EMat::Identity(t, t);
  q3.topRightCorner(w, s) = wmat;
  return {inner.pmat, q1 * q2 * q3};
}

inline CanonResult finish(const RealTensor& input, const RawTransform& raw, double scale, double residual_of_pattern) {
  CanonResult out;
  out.pmat = from_eigen(raw.pmat / scale);
  out.qmat = from_eigen(raw.qmat);
  out.canonical = sandwich(out.pmat, input, out.qmat);
  out.residual = residual_of_pattern;
  out.cond_p = condition_number(raw.pmat);
  out.cond_q = condition_number(raw.qmat);
  return out;
}

inline double input_scale(const RealTensor& t) {
  const double c = max_abs(t);
  if (c == 0.0) fail(ErrorCode::DomainError, "zero tensor cannot be canonicalized");
  return c;
}

inline std::vector<EMat> scaled_slices(const RealTensor& t, double scale) {
  auto s = eigen_slices(t);
  for (auto& a : s) a /= scale;
  return s;
}

}  // namespace detail

/// Q with A_u Q = (O, E_s); pmat is E_s. Inputs whose last slice is already
/// (O, E_s) return Q = E_t.
inline CanonResult last_slice_normalize(const RealTensor& t, const CanonOptions& opt = {}) {
  const std::size_t s = t.m(), tt = t.n();
  if (s >= tt) fail(ErrorCode::BadShape, "last_slice_normalize needs s < t");
  const EMat q = detail::last_slice_transform(to_eigen(t.slice(t.p() - 1)), opt.max_condition);
  CanonResult out = detail::finish(t, {EMat::Identity(s, s), q}, 1.0, 0.0);
  RealMat target(s, tt);
  for (std::size_t i = 0; i < s; ++i) target(i, tt - s + i) = 1.0;
  out.residual = max_abs(out.canonical.slice(t.p() - 1) - target);
  if (out.residual > opt.tolerance) fail(ErrorCode::DomainError, "last slice normalization residual too large");
  return out;
}

/// P, Q with P A_1 Q = (E_s, O) and P A_2 Q = (O, E_s) for an s x t pencil,
/// 0 < s < t.
inline CanonResult pencil_canonicalize(const RealTensor& t, const CanonOptions& opt = {}) {
  if (t.p() != 2) fail(ErrorCode::BadShape, "pencil_canonicalize needs exactly two slices");
  if (t.m() >= t.n()) fail(ErrorCode::BadShape, "pencil_canonicalize needs s < t");
  const double scale = detail::input_scale(t);
  const auto slices = detail::scaled_slices(t, scale);
  const auto raw = detail::pencil_transform(slices[0], slices[1], opt);
  CanonResult out = detail::finish(t, raw, scale, 0.0);
  out.residual = staircase_residual(out.canonical);
  if (out.residual > opt.tolerance)
    fail(ErrorCode::DomainError, "pencil canonicalization residual " + std::to_string(out.residual) + " too large");
  return out;
}

/// P, Q with P T Q = ((E_s, O_{s x v}, M); X_2; ...; X_u) for an s x t x u
/// tensor with (u-1)s < t. Peels the last slice, recurses on the leading
/// t-s columns of the remaining slices, then clears the trailing block with
/// column operations.
inline CanonResult multi_canonicalize(const RealTensor& t, const CanonOptions& opt = {}) {
  const std::size_t s = t.m(), tt = t.n(), u = t.p();
  if (u < 2 || (u - 1) * s >= tt) fail(ErrorCode::BadShape, "multi_canonicalize needs u >= 2 and (u-1)s < t");
  const double scale = detail::input_scale(t);
  const auto raw = detail::staircase_transform(detail::scaled_slices(t, scale), opt);
  CanonResult out = detail::finish(t, raw, scale, 0.0);
  out.residual = staircase_residual(out.canonical);
  if (!(out.residual <= opt.tolerance))
    fail(ErrorCode::DomainError, "canonicalization residual " + std::to_string(out.residual) + " too large");
  return out;
}

}  // namespace rankscope
