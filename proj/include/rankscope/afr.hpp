#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Eigenvalues>

#include "rankscope/parallel.hpp"
#include "rankscope/random.hpp"
#include "rankscope/tensor.hpp"

namespace rankscope {

// An l x n x p tensor (A_1; ...; A_p) is absolutely full column rank (AFR)
// when sum_k x_k A_k has rank n for every nonzero real x, i.e. when
// sum_k x_k A_k y != 0 for all unit x in R^p and unit y in R^n.

enum class AfrStatus { CertifiedExact, CertifiedNumeric, Falsified, Inconclusive };

inline std::string_view to_string(AfrStatus s) {
  switch (s) {
    case AfrStatus::CertifiedExact: return "CertifiedExact";
    case AfrStatus::CertifiedNumeric: return "CertifiedNumeric";
    case AfrStatus::Falsified: return "Falsified";
    case AfrStatus::Inconclusive: return "Inconclusive";
  }
  return "Unknown";
}

/// Unit vectors x (slice weights) and y (column combination) with
/// |sum x_i A_i y| = residual.
struct Witness {
  EVec x;
  EVec y;
  double residual = 0.0;
};

struct AfrVerdict {
  AfrStatus status = AfrStatus::Inconclusive;
  /// Certified lower bound on min sigma_n(sum x_i A_i) over the unit sphere.
  double margin = 0.0;
  std::optional<Witness> witness;

  bool certified() const noexcept {
    return status == AfrStatus::CertifiedExact || status == AfrStatus::CertifiedNumeric;
  }
  bool falsified() const noexcept { return status == AfrStatus::Falsified; }
};

struct FalsifyOptions {
  std::size_t restarts = 32;
  /// Relative to max_i |A_i|_2.
  double tol = 1e-9;
  std::size_t max_iters = 200;
  std::uint64_t seed = 7;
  std::size_t workers = 1;
};

struct GridOptions {
  double mesh = 0.01;
  double slack = 1e-6;
  /// Extra bisection levels allowed below the uniform mesh for cells that do
  /// not certify at mesh resolution.
  std::size_t refine_levels = 6;
  std::size_t max_evals = 2'000'000;
};

enum class AfrPolicy { ExactFirst, NumericOnly };

struct AfrOptions {
  AfrPolicy policy = AfrPolicy::ExactFirst;
  FalsifyOptions falsify;
  GridOptions grid;
  bool use_grid = true;
};

/// Sufficient certificate: A_i^T A_i = E_n and A_i^T A_j + A_j^T A_i = O for
/// i != j, which forces (sum x_i A_i)^T (sum x_i A_i) = |x|^2 E_n. Exact for
/// integer tensors; real tensors are compared to 1e-12 relative to the
/// squared entry scale. `false` only means no certificate.
template <class Scalar>
bool exact_certify(const Tensor3<Scalar>& t) {
  if (t.m() < t.n()) fail(ErrorCode::BadShape, "exact_certify needs l >= n");
  const auto eye = Matrix<Scalar>::identity(t.n());
  std::vector<Matrix<Scalar>> trans;
  for (const auto& a : t.slices()) trans.push_back(a.transpose());

  auto near = [&](const Matrix<Scalar>& got, const Matrix<Scalar>& want) {
    if constexpr (is_exact_v<Scalar>) {
      return got == want;
    } else {
      const double scale = std::max(1.0, max_abs(t) * max_abs(t));
      return max_abs(got - want) <= 1e-12 * scale;
    }
  };

  const auto zero = Matrix<Scalar>::zeros(t.n(), t.n());
  for (std::size_t i = 0; i < t.p(); ++i) {
    if (!near(trans[i] * t.slice(i), eye)) return false;
    for (std::size_t j = i + 1; j < t.p(); ++j)
      if (!near(trans[i] * t.slice(j) + trans[j] * t.slice(i), zero)) return false;
  }
  return true;
}

namespace detail {

/// sigma_n of a tall-or-square matrix; zero when rows < cols.
inline double column_margin(const EMat& m) {
  if (m.rows() < m.cols()) return 0.0;
  return sigma_min(m);
}

inline EVec least_right_singular_vector(const EMat& m) {
  Eigen::JacobiSVD<EMat> svd(m, Eigen::ComputeFullV);
  return svd.matrixV().col(m.cols() - 1);
}

/// [A_1 y, ..., A_p y].
inline EMat apply_columns(const std::vector<EMat>& slices, const EVec& y) {
  EMat k(slices.front().rows(), static_cast<Eigen::Index>(slices.size()));
  for (std::size_t i = 0; i < slices.size(); ++i) k.col(static_cast<Eigen::Index>(i)) = slices[i] * y;
  return k;
}

inline double slice_scale(const std::vector<EMat>& slices) {
  double s = 0.0;
  for (const auto& a : slices) s = std::max(s, spectral_norm(a));
  return s;
}

/// Gauss-Newton on F(x, y) = sum x_i A_i y with minimum-norm steps, which
/// converges quadratically onto nearby zeros of the bilinear system.
inline Witness polish(const std::vector<EMat>& slices, EVec x, EVec y, double target, std::size_t iters = 40) {
  const Eigen::Index p = x.size(), n = y.size();
  Witness best{x, y, (combine(slices, x) * y).norm()};
  for (std::size_t it = 0; it < iters && best.residual > target; ++it) {
    const EMat mx = combine(slices, x);
    const EVec f = mx * y;
    EMat jac(mx.rows(), p + n);
    jac.leftCols(p) = apply_columns(slices, y);
    jac.rightCols(n) = mx;
    const EVec step = jac.completeOrthogonalDecomposition().solve(-f);
    x = (x + step.head(p)).normalized();
    y = (y + step.tail(n)).normalized();
    const double r = (combine(slices, x) * y).norm();
    if (!(r < best.residual)) break;
    best = {x, y, r};
  }
  return best;
}

/// One alternating-minimization run of |M(x) y|^2 on the product of spheres.
inline Witness alternate(const std::vector<EMat>& slices, EVec x, std::size_t max_iters) {
  EVec y = least_right_singular_vector(combine(slices, x));
  double f = (combine(slices, x) * y).norm();
  for (std::size_t it = 0; it < max_iters; ++it) {
    x = least_right_singular_vector(apply_columns(slices, y));
    y = least_right_singular_vector(combine(slices, x));
    const double next = (combine(slices, x) * y).norm();
    const bool stalled = f - next <= 1e-10 * f;
    f = next;
    if (stalled || f == 0.0) break;
  }
  return {x, y, f};
}

inline Witness trivial_witness(const std::vector<EMat>& slices) {
  // l < n: the first slice alone already has a kernel.
  const Eigen::Index p = static_cast<Eigen::Index>(slices.size());
  EVec x = EVec::Zero(p);
  x(0) = 1.0;
  EVec y = least_right_singular_vector(slices.front());
  return {x, y, (slices.front() * y).norm()};
}

}  // namespace detail

/// Multi-start search for (x, y) on S^{p-1} x S^{n-1} with
/// |sum x_i A_i y| <= tol * max_i |A_i|_2. Restart r uses the seed
/// derive_seed(seed, r); the lowest successful restart wins, so the result
/// is independent of the worker count.
template <class Scalar>
std::optional<Witness> falsify(const Tensor3<Scalar>& t, const FalsifyOptions& opt = {}) {
  if (opt.restarts == 0) fail(ErrorCode::Precondition, "falsify needs at least one restart");
  const auto slices = eigen_slices(to_real(t));
  const double scale = detail::slice_scale(slices);
  const double target = opt.tol * scale;
  const auto p = static_cast<Eigen::Index>(t.p());

  if (scale == 0.0) {
    EVec x = EVec::Zero(p), y = EVec::Zero(static_cast<Eigen::Index>(t.n()));
    x(0) = y(0) = 1.0;
    return Witness{x, y, 0.0};
  }
  if (t.m() < t.n()) return detail::trivial_witness(slices);

  std::vector<std::optional<Witness>> found(opt.restarts);
  std::atomic<std::size_t> first_hit{opt.restarts};
  parallel_for(opt.restarts, opt.workers, [&](std::size_t r) {
    if (r > first_hit.load()) return;
    Rng rng(derive_seed(opt.seed, r));
    Witness w = detail::alternate(slices, random_unit(rng, p), opt.max_iters);
    if (w.residual > target && w.residual < 1e-2 * scale) w = detail::polish(slices, w.x, w.y, 1e-3 * target);
    if (w.residual <= target) {
      found[r] = std::move(w);
      std::size_t cur = first_hit.load();
      while (r < cur && !first_hit.compare_exchange_weak(cur, r)) {
      }
    }
  });
  for (auto& w : found)
    if (w) return w;
  return std::nullopt;
}

namespace detail {

/// sigma_n(sum x_i A_i) via the smallest eigenvalue of the Gram matrix built
/// from precomputed blocks A_i^T A_j.
class GramEvaluator {
 public:
  explicit GramEvaluator(const std::vector<EMat>& slices) : p_(slices.size()), n_(slices.front().cols()) {
    blocks_.resize(p_ * p_);
    for (std::size_t i = 0; i < p_; ++i)
      for (std::size_t j = 0; j < p_; ++j) blocks_[i * p_ + j] = slices[i].transpose() * slices[j];
  }

  double sigma(const EVec& x) {
    EMat g = EMat::Zero(n_, n_);
    for (std::size_t i = 0; i < p_; ++i)
      for (std::size_t j = 0; j < p_; ++j) {
        const double w = x(static_cast<Eigen::Index>(i)) * x(static_cast<Eigen::Index>(j));
        if (w != 0.0) g.noalias() += w * blocks_[i * p_ + j];
      }
    solver_.compute(g, Eigen::EigenvaluesOnly);
    return std::sqrt(std::max(0.0, solver_.eigenvalues()(0)));
  }

 private:
  std::size_t p_;
  Eigen::Index n_;
  std::vector<EMat> blocks_;
  Eigen::SelfAdjointEigenSolver<EMat> solver_;
};

}  // namespace detail

/// Lipschitz covering certificate on the unit sphere, p <= 4.
///
/// Every x or -x lies on a facet {x_k = 1} of the cube [-1, 1]^p; radial
/// projection onto the sphere is 1-Lipschitz there, so a facet box of
/// half-width h projects into a spherical cap of radius h sqrt(p-1) around
/// its projected center c. With L = sqrt(sum_i |A_i|_2^2),
/// sigma_n(M(x)) >= sigma_n(M(c)) - L |x - c|, so a box is certified when
/// sigma_n(M(c)) - L r >= slack. Facets start at the uniform mesh; boxes that
/// fail are bisected up to `refine_levels` more times. The margin is the
/// smallest certified lower bound over all leaves.
template <class Scalar>
AfrVerdict grid_certify(const Tensor3<Scalar>& t, const GridOptions& opt = {}, const FalsifyOptions& fopt = {}) {
  const std::size_t p = t.p();
  if (p > 4) fail(ErrorCode::Unsupported, "grid certification covers p <= 4 only, got p = " + std::to_string(p));
  if (!(opt.mesh > 0.0)) fail(ErrorCode::Precondition, "mesh must be positive");
  const auto slices = eigen_slices(to_real(t));
  const double scale = detail::slice_scale(slices);
  const double target = fopt.tol * scale;

  AfrVerdict inconclusive{AfrStatus::Inconclusive, 0.0, std::nullopt};
  if (t.m() < t.n()) {
    auto w = detail::trivial_witness(slices);
    return {AfrStatus::Falsified, 0.0, w};
  }

  double lip2 = 0.0;
  for (const auto& a : slices) lip2 += std::pow(spectral_norm(a), 2);
  const double lip = std::sqrt(lip2);
  // Gram eigenvalue round-off, folded into the slack.
  const double slack = opt.slack + 1e-7 * lip;

  detail::GramEvaluator eval(slices);

  if (p == 1) {
    EVec x(1);
    x(0) = 1.0;
    const double s = eval.sigma(x);
    if (s > slack) return {AfrStatus::CertifiedNumeric, s, std::nullopt};
    auto w = detail::polish(slices, x, detail::least_right_singular_vector(slices[0]), target);
    if (w.residual <= target) return {AfrStatus::Falsified, 0.0, w};
    return inconclusive;
  }

  const std::size_t dim = p - 1;
  const double root = std::sqrt(static_cast<double>(dim));
  std::size_t per_axis = static_cast<std::size_t>(std::ceil(root / opt.mesh));
  // Cap the uniform level at half the evaluation budget; refinement takes over.
  while (per_axis > 1 && p * static_cast<std::size_t>(std::pow(per_axis, dim)) > opt.max_evals / 2) per_axis /= 2;

  std::size_t evals = 0;
  double margin = std::numeric_limits<double>::infinity();

  struct Box {
    std::vector<double> center;  // coordinates on the facet, in [-1, 1]
    double half;
    std::size_t level;
  };

  auto point_of = [&](std::size_t facet, const std::vector<double>& c) {
    EVec u(static_cast<Eigen::Index>(p));
    std::size_t k = 0;
    for (std::size_t i = 0; i < p; ++i) u(static_cast<Eigen::Index>(i)) = i == facet ? 1.0 : c[k++];
    return EVec(u.normalized());
  };

  for (std::size_t facet = 0; facet < p; ++facet) {
    std::vector<Box> stack;
    const double h0 = 1.0 / static_cast<double>(per_axis);
    std::vector<std::size_t> idx(dim, 0);
    while (true) {
      std::vector<double> c(dim);
      for (std::size_t d = 0; d < dim; ++d) c[d] = -1.0 + (2.0 * static_cast<double>(idx[d]) + 1.0) * h0;
      stack.push_back({std::move(c), h0, 0});
      std::size_t d = 0;
      while (d < dim && ++idx[d] == per_axis) idx[d++] = 0;
      if (d == dim) break;
    }

    while (!stack.empty()) {
      Box box = std::move(stack.back());
      stack.pop_back();
      if (++evals > opt.max_evals) return inconclusive;
      const EVec x = point_of(facet, box.center);
      const double radius = box.half * root;
      const double s = eval.sigma(x);
      if (s - lip * radius >= slack) {
        margin = std::min(margin, s - lip * radius);
        continue;
      }
      if (s <= 1e3 * target || box.level >= opt.refine_levels) {
        auto w = detail::polish(slices, x, detail::least_right_singular_vector(combine(slices, x)), 1e-3 * target);
        if (w.residual <= target) return {AfrStatus::Falsified, 0.0, w};
        if (box.level >= opt.refine_levels) return inconclusive;
      }
      const std::size_t children = std::size_t{1} << dim;
      for (std::size_t mask = 0; mask < children; ++mask) {
        std::vector<double> c = box.center;
        for (std::size_t d = 0; d < dim; ++d) c[d] += ((mask >> d) & 1 ? 0.5 : -0.5) * box.half;
        stack.push_back({std::move(c), box.half / 2, box.level + 1});
      }
    }
  }
  return {AfrStatus::CertifiedNumeric, margin, std::nullopt};
}

namespace detail {

/// G^{-1/2} for a symmetric positive definite G; nullopt when near singular.
inline std::optional<EMat> inverse_sqrt(const EMat& g) {
  Eigen::SelfAdjointEigenSolver<EMat> es(g);
  const EVec& ev = es.eigenvalues();
  if (ev.size() == 0 || !(ev(0) > 1e-14 * ev(ev.size() - 1))) return std::nullopt;
  return es.eigenvectors() * ev.cwiseSqrt().cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace detail

/// An equivalent tensor (P A_i Q mixed by an invertible slice map) whose row
/// flattening, column flattening and slice Gram matrix are close to
/// isotropic. AFR status is unchanged, but badly scaled inputs become well
/// conditioned for falsification and covering.
inline RealTensor balance(const RealTensor& t, std::size_t sweeps = 6) {
  std::vector<EMat> s = eigen_slices(t);
  const auto l = s.front().rows(), n = s.front().cols();
  const auto p = static_cast<Eigen::Index>(s.size());
  for (std::size_t sweep = 0; sweep < sweeps; ++sweep) {
    EMat g = EMat::Zero(l, l);
    for (const auto& a : s) g += a * a.transpose();
    if (auto r = detail::inverse_sqrt(g))
      for (auto& a : s) a = *r * a;
    g = EMat::Zero(n, n);
    for (const auto& a : s) g += a.transpose() * a;
    if (auto r = detail::inverse_sqrt(g))
      for (auto& a : s) a = a * *r;
    g = EMat(p, p);
    for (Eigen::Index i = 0; i < p; ++i)
      for (Eigen::Index j = 0; j < p; ++j) g(i, j) = s[i].cwiseProduct(s[j]).sum();
    if (auto r = detail::inverse_sqrt(g)) {
      std::vector<EMat> mixed(s.size(), EMat::Zero(l, n));
      for (Eigen::Index i = 0; i < p; ++i)
        for (Eigen::Index j = 0; j < p; ++j) mixed[i] += (*r)(i, j) * s[j];
      s = std::move(mixed);
    }
  }
  return from_eigen_slices(s);
}

/// exact certificate, then falsification, then (p <= 4) the covering
/// certificate. Never reports a certified status for a tensor with a found
/// witness.
template <class Scalar>
AfrVerdict afr_check(const Tensor3<Scalar>& t, const AfrOptions& opt = {}) {
  if (t.m() < t.n()) {
    const auto slices = eigen_slices(to_real(t));
    return {AfrStatus::Falsified, 0.0, detail::trivial_witness(slices)};
  }
  if (opt.policy == AfrPolicy::ExactFirst && exact_certify(t)) return {AfrStatus::CertifiedExact, 1.0, std::nullopt};
  if (auto w = falsify(t, opt.falsify)) return {AfrStatus::Falsified, 0.0, std::move(w)};
  if (opt.use_grid && t.p() <= 4) return grid_certify(t, opt.grid, opt.falsify);
  return {AfrStatus::Inconclusive, 0.0, std::nullopt};
}

enum class TransformKind { Rotate, PadRows, CutCols, KronLift };

struct TransformSpec {
  TransformKind kind = TransformKind::Rotate;
  std::size_t amount = 0;
};

/// AFR-preserving reshapes. Rotate maps l x n x p to l x p x n with
/// B_j = (a_{pj}, a_{p-1,j}, ..., a_{1j}) and preserves AFR in both
/// directions; the others preserve it forwards.
template <class Scalar>
Tensor3<Scalar> transform(const Tensor3<Scalar>& t, TransformSpec spec) {
  using M = Matrix<Scalar>;
  const std::size_t l = t.m(), n = t.n(), p = t.p();
  switch (spec.kind) {
    case TransformKind::Rotate: {
      std::vector<M> out;
      out.reserve(n);
      for (std::size_t j = 0; j < n; ++j) {
        M b(l, p);
        for (std::size_t c = 0; c < p; ++c)
          for (std::size_t r = 0; r < l; ++r) b(r, c) = t(r, j, p - 1 - c);
        out.push_back(std::move(b));
      }
      return Tensor3<Scalar>(std::move(out));
    }
    case TransformKind::PadRows: {
      if (spec.amount == 0) fail(ErrorCode::BadIndex, "pad_rows needs k >= 1");
      return map_slices(t, [&](const M& a) { return vstack({a, M(spec.amount, n)}); });
    }
    case TransformKind::CutCols: {
      if (spec.amount == 0 || spec.amount >= n)
        fail(ErrorCode::BadIndex, "cut_cols needs 1 <= k <= n-1, got k = " + std::to_string(spec.amount));
      return cut_columns(t, spec.amount);
    }
    case TransformKind::KronLift: {
      if (spec.amount == 0) fail(ErrorCode::BadIndex, "kron_lift needs u >= 1");
      const M eu = M::identity(spec.amount);
      return map_slices(t, [&](const M& a) { return kron(eu, a); });
    }
  }
  return t;
}

}  // namespace rankscope
