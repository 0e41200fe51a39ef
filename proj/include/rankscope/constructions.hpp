#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rankscope/afr.hpp"
#include "rankscope/canonical.hpp"
#include "rankscope/hurwitz_radon.hpp"

namespace rankscope {

/// The four sporadic size families with m = 3, 4, 6, 10 slices.
enum class MiscCase { M3, M4, M6, M10 };

struct MiscCaseInfo {
  std::size_t m;       ///< slices
  std::size_t l;       ///< extra rows, (m-1)n - p
  std::size_t block;   ///< order of the Hurwitz-Radon block
  std::size_t modulus;
  std::size_t residue;
  std::size_t min_n;
  std::string_view name;
};

constexpr MiscCaseInfo info(MiscCase c) {
  switch (c) {
    case MiscCase::M3: return {3, 1, 4, 4, 3, 3, "m3"};
    case MiscCase::M4: return {4, 2, 4, 4, 2, 6, "m4"};
    case MiscCase::M6: return {6, 4, 8, 8, 4, 12, "m6"};
    case MiscCase::M10: return {10, 8, 32, 32, 24, 24, "m10"};
  }
  return {0, 0, 0, 0, 0, 0, ""};
}

inline std::optional<MiscCase> parse_misc_case(std::string_view s) {
  for (MiscCase c : {MiscCase::M3, MiscCase::M4, MiscCase::M6, MiscCase::M10})
    if (info(c).name == s) return c;
  return std::nullopt;
}

/// The uncut (n+l) x (n+l) x m absolutely nonsingular tensor
/// (E_u (x) M_1; ...; E_u (x) M_{m-1}; E_{n+l}) whose first n columns give
/// `build_misc`. Member order follows the proofs exactly, since only slices
/// 3..m are constrained to have vanishing bottom rows.
inline IntTensor build_misc_parent(MiscCase c, std::size_t n) {
  const MiscCaseInfo ci = info(c);
  if (n % ci.modulus != ci.residue || n < ci.min_n)
    fail(ErrorCode::BadCongruence, "case " + std::string(ci.name) + " needs n = " + std::to_string(ci.residue) +
                                       " mod " + std::to_string(ci.modulus) + " and n >= " + std::to_string(ci.min_n) +
                                       ", got n = " + std::to_string(n));
  using namespace basis;
  const IntMat A = rot(), P = swap(), Q = flip(), E2 = eye(2);
  std::vector<IntMat> members;
  switch (c) {
    case MiscCase::M3: members = {kron(A, E2), kron(P, A)}; break;
    case MiscCase::M4: members = {kron(A, E2), kron(P, A), kron(Q, A)}; break;
    case MiscCase::M6:
      members = {kron_chain({P, Q, A}), kron_chain({A, P, Q}), kron_chain({E2, A, E2}), kron_chain({E2, P, A}),
                 kron_chain({Q, Q, A})};
      break;
    case MiscCase::M10: {
      members = {kron(A, eye(16)), kron_chain({P, A, eye(8)})};
      for (const auto& l : hr_base(8).members) members.push_back(kron_chain({Q, E2, l}));
      break;
    }
  }
  const std::size_t u = (n + ci.l) / ci.block;
  const IntMat eu = eye(u);
  std::vector<IntMat> slices;
  for (const auto& mm : members) slices.push_back(kron(eu, mm));
  slices.push_back(eye(n + ci.l));
  return IntTensor(std::move(slices));
}

/// (n+l) x n x m tensor satisfying the zero-bottom AFR condition.
inline IntTensor build_misc(MiscCase c, std::size_t n) { return cut_columns(build_misc_parent(c, n), n); }

/// Whether the bottom `l` rows of slices 3..m vanish exactly.
template <class Scalar>
bool bottom_rows_zero(const Tensor3<Scalar>& t, std::size_t l) {
  for (std::size_t k = 2; k < t.p(); ++k)
    for (std::size_t i = t.m() - l; i < t.m(); ++i)
      for (std::size_t j = 0; j < t.n(); ++j)
        if (t(i, j, k) != 0) return false;
  return true;
}

struct SpAfrReport {
  bool ok = false;
  bool bottom_zero = false;
  /// AFR accepted without a certificate (p > 4 and no witness found).
  bool heuristic = false;
  AfrVerdict verdict;
};

/// (n+l) x n x m, AFR, and slices 3..m have zero bottom l rows.
template <class Scalar>
SpAfrReport sp_afr_report(const Tensor3<Scalar>& t, std::size_t l, const AfrOptions& opt = {}) {
  if (t.m() <= l || t.m() - l != t.n() || l >= t.n() || t.p() < 3)
    fail(ErrorCode::BadShape, "expected an (n+l) x n x m tensor with 0 <= l < n and m >= 3");
  SpAfrReport r;
  r.bottom_zero = bottom_rows_zero(t, l);
  if (!r.bottom_zero) return r;
  r.verdict = afr_check(t, opt);
  if (r.verdict.falsified()) return r;
  const bool certifiable = t.p() <= 4 && opt.use_grid;
  r.heuristic = !r.verdict.certified();
  r.ok = r.verdict.certified() || !certifiable;
  return r;
}

template <class Scalar>
bool sp_afr_check(const Tensor3<Scalar>& t, std::size_t l, const AfrOptions& opt = {}) {
  return sp_afr_report(t, l, opt).ok;
}

/// A = (B_1 | B_0 | B_2) of widths (n-l, l, n-l) plus A_3, ..., A_m.
struct CondSeq {
  std::size_t n = 0;
  std::size_t l = 0;
  std::size_t m = 0;
  RealMat a;
  std::vector<RealMat> extras;

  RealMat b1() const { return a.block(0, 0, n, n - l); }
  RealMat b0() const { return a.block(0, n - l, n, l); }
  RealMat b2() const { return a.block(0, n, n, n - l); }

  void validate() const {
    if (m < 3 || l >= n) fail(ErrorCode::BadShape, "sequence needs m >= 3 and 0 <= l < n");
    if (a.rows() != n || a.cols() != 2 * n - l) fail(ErrorCode::BadShape, "A must be n x (2n-l)");
    if (extras.size() != m - 2) fail(ErrorCode::BadShape, "expected m-2 extra matrices");
    for (const auto& e : extras)
      if (e.rows() != n || e.cols() != n) fail(ErrorCode::BadShape, "extra matrices must be n x n");
  }
};

/// The 2n x n x m tensor ((B_1 O; B_1 B_0); (B_0 B_2; O B_2); (A_3; A_3); ...);
/// the sequence satisfies the condition exactly when this tensor is AFR.
inline RealTensor seq_to_stacked(const CondSeq& seq) {
  seq.validate();
  const std::size_t n = seq.n, l = seq.l;
  const RealMat b1 = seq.b1(), b0 = seq.b0(), b2 = seq.b2();
  std::vector<RealMat> slices;
  slices.push_back(vstack({hstack({b1, RealMat(n, l)}), hstack({b1, b0})}));
  slices.push_back(vstack({hstack({b0, b2}), hstack({RealMat(n, l), b2})}));
  for (const auto& e : seq.extras) slices.push_back(vstack({e, e}));
  return RealTensor(std::move(slices));
}

/// Row operation diag(G, G) on the stacked tensor with G = A_m^{-1}, which
/// keeps the stacked block form and makes the last extra the identity.
inline CondSeq with_identity_last(const CondSeq& seq) {
  seq.validate();
  const EMat last = to_eigen(seq.extras.back());
  if (!std::isfinite(condition_number(last)) || condition_number(last) > 1e12)
    fail(ErrorCode::DomainError, "last matrix of the sequence is singular");
  const EMat g = last.inverse();
  CondSeq out = seq;
  out.a = from_eigen(g * to_eigen(seq.a));
  for (auto& e : out.extras) e = from_eigen(g * to_eigen(e));
  out.extras.back() = RealMat::identity(seq.n);
  return out;
}

struct SeqOptions {
  AfrOptions afr;
  std::uint64_t seed = 0;
  std::size_t attempts = 8;
};

namespace detail {

/// Pencil normalization A_1 Q = R (E, O), A_2 Q = R (O, E) for s x t with
/// 2s <= t, built from orthonormal kernel bases: Q = (X, M, Y) with M spanning
/// ker A_1 n ker A_2, X its complement in ker A_2 and Y the least-norm
/// solution in ker A_1. Keeps Q close to orthogonal where the projection
/// approach drifts.
inline RawTransform kernel_pencil_transform(const EMat& a1, const EMat& a2, const CanonOptions& opt) {
  const Eigen::Index s = a1.rows(), t = a1.cols();
  const double sc = std::max({a1.cwiseAbs().maxCoeff(), a2.cwiseAbs().maxCoeff(), 1e-300});
  const EMat b1 = a1 / sc, b2 = a2 / sc;
  if (2 * s > t || numerical_rank(b1) != static_cast<std::size_t>(s) ||
      numerical_rank(b2) != static_cast<std::size_t>(s))
    fail(ErrorCode::DomainError, "pencil rows are not independent");
  const EMat n2 = null_space(b2), n1 = null_space(b1);
  Eigen::JacobiSVD<EMat> svd(b1 * n2, Eigen::ComputeFullV);
  const EMat x = n2 * svd.matrixV().leftCols(s);
  const EMat mid = n2 * svd.matrixV().rightCols(n2.cols() - s);
  const EMat r = b1 * x;
  const EMat y = n1 * (b2 * n1).completeOrthogonalDecomposition().solve(r);
  EMat q(t, t);
  q << x, mid, y;
  if (!usable(q, opt.max_condition) || !usable(r, opt.max_condition))
    fail(ErrorCode::DomainError, "pencil normalization is singular");
  const EMat p = r.inverse();
  EMat want1 = EMat::Zero(s, t), want2 = EMat::Zero(s, t);
  want1.leftCols(s).setIdentity();
  want2.rightCols(s).setIdentity();
  const double res = std::max((p * b1 * q - want1).cwiseAbs().maxCoeff(), (p * b2 * q - want2).cwiseAbs().maxCoeff());
  if (res > 0.1 * opt.tolerance) fail(ErrorCode::DomainError, "pencil normalization residual too large");
  return {p / sc, q};
}

}  // namespace detail

/// Turns a zero-bottom AFR tensor into a sequence whose stacked tensor is AFR:
/// normalize the bottom pencil (-C_2'; C_1') to ((E,O);(O,E)) so the bottom
/// rows read (O, E_l) and (-E_l, O), clear the top-right block of slice 1
/// with a row operation (B_0 = A_1 + A_2), then read off (B_1 | B_0 | B_2)
/// and the tops of slices 3..m. Out-of-domain inputs are perturbed by a
/// fixed fraction of the tracked margin, which AFR survives.
template <class Scalar>
CondSeq sp_afr_to_seq(const Tensor3<Scalar>& t, std::size_t l, const SeqOptions& opt = {}) {
  const SpAfrReport report = sp_afr_report(t, l, opt.afr);
  if (!report.ok) fail(ErrorCode::Precondition, "input does not satisfy the zero-bottom AFR condition");
  const std::size_t n = t.n(), m = t.p();
  const auto nn = static_cast<Eigen::Index>(n), ll = static_cast<Eigen::Index>(l);
  std::vector<EMat> c = eigen_slices(to_real(t));
  // Lower bound on the AFR margin of the current slices; perturbations of
  // total size below it keep AFR.
  std::optional<double> margin =
      report.verdict.certified() ? std::optional<double>(report.verdict.margin) : std::nullopt;
  Rng rng(opt.seed);

  // Moves `block` by fraction * margin along a random direction with
  // orthonormal columns (or rows), so no singular value shrinks.
  auto perturb = [&](EMat& block, double fraction) {
    if (!margin) fail(ErrorCode::DomainError, "input outside the canonicalization domain and no certified margin");
    const bool tall = block.rows() >= block.cols();
    const EMat g = tall ? gaussian_matrix(rng, block.rows(), block.cols()) : gaussian_matrix(rng, block.cols(), block.rows());
    const EMat u = Eigen::HouseholderQR<EMat>(g).householderQ() * EMat::Identity(g.rows(), g.cols());
    block += fraction * *margin * (tall ? u : EMat(u.transpose()));
    *margin *= 1.0 - fraction;
  };

  if (l > 0) {
    CanonOptions copt;
    copt.seed = opt.seed;
    std::optional<detail::RawTransform> tr;
    for (std::size_t attempt = 0; attempt <= opt.attempts && !tr; ++attempt) {
      try {
        tr = detail::kernel_pencil_transform(-c[1].bottomRows(ll), c[0].bottomRows(ll), copt);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::DomainError || attempt == opt.attempts) throw;
        EMat b0 = c[0].bottomRows(ll), b1 = c[1].bottomRows(ll);
        perturb(b0, 0.2);
        perturb(b1, 0.2);
        c[0].bottomRows(ll) = b0;
        c[1].bottomRows(ll) = b1;
      }
    }
    EMat rows = EMat::Identity(nn + ll, nn + ll);
    rows.bottomRightCorner(ll, ll) = tr->pmat;
    for (auto& s : c) s = rows * s * tr->qmat;
    if (margin) *margin *= sigma_min(rows) * sigma_min(tr->qmat);

    // Columns of A_1 + A_2 must be independent for the row-operation step.
    for (std::size_t attempt = 0;; ++attempt) {
      const EMat sum = c[0].topRightCorner(nn, ll) + c[1].topLeftCorner(nn, ll);
      if (numerical_rank(sum, 1e-8) == l && (!margin || sigma_min(sum) >= 0.1 * *margin)) break;
      if (attempt == opt.attempts) fail(ErrorCode::DomainError, "could not make B_0 of full column rank");
      EMat a1 = c[0].topRightCorner(nn, ll);
      perturb(a1, 0.4);
      c[0].topRightCorner(nn, ll) = a1;
    }
  }

  CondSeq seq;
  seq.n = n;
  seq.l = l;
  seq.m = m;
  EMat a(nn, 2 * nn - ll);
  a.leftCols(nn - ll) = c[0].topLeftCorner(nn, nn - ll);
  a.middleCols(nn - ll, ll) = c[0].topRightCorner(nn, ll) + c[1].topLeftCorner(nn, ll);
  a.rightCols(nn - ll) = c[1].topRightCorner(nn, nn - ll);
  seq.a = from_eigen(a);
  for (std::size_t k = 2; k < m; ++k) seq.extras.push_back(from_eigen(c[k].topRows(nn)));

  if (afr_check(seq_to_stacked(seq), opt.afr).falsified())
    fail(ErrorCode::DomainError, "stacked tensor of the extracted sequence is not AFR");
  return seq;
}

/// Pads an n x n x m absolutely nonsingular tensor with l zero rows; the
/// result satisfies the zero-bottom AFR condition for that l.
template <class Scalar>
Tensor3<Scalar> ans_to_sp_afr(const Tensor3<Scalar>& ans, std::size_t l) {
  if (ans.m() != ans.n()) fail(ErrorCode::BadShape, "expected a square-sliced tensor");
  if (l == 0) return ans;
  return transform(ans, {TransformKind::PadRows, l});
}

/// Raises l to l_new (l < l_new < n) by padding zero rows.
template <class Scalar>
Tensor3<Scalar> widen_sp_afr(const Tensor3<Scalar>& t, std::size_t l, std::size_t l_new) {
  if (l_new <= l || l_new >= t.n()) fail(ErrorCode::BadIndex, "need l < l' < n");
  if (t.m() != t.n() + l) fail(ErrorCode::BadShape, "expected an (n+l) x n x m tensor");
  return transform(t, {TransformKind::PadRows, l_new - l});
}

}  // namespace rankscope
