#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "rankscope/tensor.hpp"

namespace rankscope {

/// Hurwitz-Radon function: for n = (2a+1) 2^(b+4c) with 0 <= b < 4 it is
/// 8c + 2^b, the largest p admitting an n x n x p absolutely nonsingular
/// tensor.
constexpr std::size_t rho(std::size_t n) {
  if (n == 0) fail(ErrorCode::BadIndex, "rho is defined for n >= 1");
  const auto k = static_cast<std::size_t>(std::countr_zero(n));
  return 8 * (k / 4) + (std::size_t{1} << (k % 4));
}

/// Anticommuting, antisymmetric, orthogonal integer matrices of one order.
struct HRFamily {
  std::size_t order = 1;
  std::vector<IntMat> members;

  std::size_t size() const noexcept { return members.size(); }

  /// First `count` members; any subfamily is again a Hurwitz-Radon family.
  HRFamily prefix(std::size_t count) const {
    if (count > members.size()) fail(ErrorCode::BadIndex, "subfamily larger than family");
    return {order, std::vector<IntMat>(members.begin(), members.begin() + static_cast<std::ptrdiff_t>(count))};
  }
};

/// Exact check of A A^T = E, A = -A^T and pairwise anticommutation.
inline bool validate_hr(const HRFamily& fam) {
  const IntMat eye = IntMat::identity(fam.order);
  for (const auto& a : fam.members)
    if (a.rows() != fam.order || a.cols() != fam.order) fail(ErrorCode::BadShape, "family member is not order x order");
  for (std::size_t i = 0; i < fam.members.size(); ++i) {
    const IntMat& a = fam.members[i];
    const IntMat at = a.transpose();
    if (!(a == -at)) return false;
    if (!(a * at == eye)) return false;
    for (std::size_t j = i + 1; j < fam.members.size(); ++j) {
      const IntMat& b = fam.members[j];
      if (!(a * b + b * a).is_zero()) return false;
    }
  }
  return true;
}

/// The literal families of orders 2, 4 and 8 from which every other order is
/// assembled.
inline HRFamily hr_base(std::size_t order) {
  using namespace basis;
  const IntMat A = rot(), P = swap(), Q = flip(), E2 = eye(2);
  switch (order) {
    case 2: return {2, {A}};
    case 4: return {4, {kron(A, E2), kron(P, A), kron(Q, A)}};
    case 8:
      return {8,
              {kron_chain({E2, A, E2}), kron_chain({E2, P, A}), kron_chain({Q, Q, A}), kron_chain({P, Q, A}),
               kron_chain({A, P, Q}), kron_chain({A, P, P}), kron_chain({A, Q, E2})}};
    default: fail(ErrorCode::BadIndex, "base families exist for orders 2, 4 and 8 only, not " + std::to_string(order));
  }
}

namespace detail {
inline void require_valid(const HRFamily& fam) {
  if (!validate_hr(fam)) fail(ErrorCode::InvalidFamily, "input is not a Hurwitz-Radon family");
}
}  // namespace detail

/// {A (x) E_n, Q (x) M_1, ..., Q (x) M_s}: order doubles, one member more.
inline HRFamily hr_double(const HRFamily& fam) {
  detail::require_valid(fam);
  using namespace basis;
  HRFamily out{2 * fam.order, {kron(rot(), eye(fam.order))}};
  for (const auto& m : fam.members) out.members.push_back(kron(flip(), m));
  return out;
}

/// Order-2nm family {P (x) M_i (x) E_m} u {Q (x) E_n (x) L_j} u {A (x) E_nm}.
inline HRFamily hr_compose(const HRFamily& fam_n, const HRFamily& fam_m) {
  detail::require_valid(fam_n);
  detail::require_valid(fam_m);
  using namespace basis;
  const std::size_t n = fam_n.order, m = fam_m.order;
  HRFamily out{2 * n * m, {}};
  for (const auto& mi : fam_n.members) out.members.push_back(kron_chain({swap(), mi, eye(m)}));
  for (const auto& lj : fam_m.members) out.members.push_back(kron_chain({flip(), eye(n), lj}));
  out.members.push_back(kron(rot(), eye(n * m)));
  return out;
}

/// A family of rho(order) - 1 members. The 2-power part is built from the base
/// families and `hr_compose`; an odd factor u is absorbed as E_u (x) M.
inline HRFamily hr_family(std::size_t order) {
  if (order == 0) fail(ErrorCode::BadIndex, "order must be positive");
  const auto k = static_cast<std::size_t>(std::countr_zero(order));
  const std::size_t odd = order >> k;

  HRFamily pow2;
  if (k == 0) pow2 = {1, {}};
  else if (k <= 3) pow2 = hr_base(std::size_t{1} << k);
  else pow2 = hr_compose(hr_base(8), hr_family(std::size_t{1} << (k - 4)));

  if (odd == 1) return pow2;
  HRFamily out{order, {}};
  const IntMat eu = IntMat::identity(odd);
  for (const auto& m : pow2.members) out.members.push_back(kron(eu, m));
  return out;
}

/// (A_1; ...; A_{p-1}; E_n) from the first p-1 members of `hr_family(n)`.
/// Every nonzero combination x satisfies (sum x_k A_k)^T (sum x_k A_k) = |x|^2 E_n.
inline IntTensor ans_tensor(std::size_t n, std::size_t p) {
  if (n == 0 || p == 0) fail(ErrorCode::BadIndex, "ans_tensor needs n, p >= 1");
  if (p > rho(n))
    fail(ErrorCode::NotConstructible, "no " + std::to_string(n) + "x" + std::to_string(n) + "x" + std::to_string(p) +
                                          " absolutely nonsingular tensor exists since rho(" + std::to_string(n) +
                                          ") = " + std::to_string(rho(n)));
  auto members = hr_family(n).prefix(p - 1).members;
  members.push_back(IntMat::identity(n));
  return IntTensor(std::move(members));
}

}  // namespace rankscope
