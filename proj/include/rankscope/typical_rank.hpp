#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Eigenvalues>

#include "rankscope/afr.hpp"
#include "rankscope/canonical.hpp"
#include "rankscope/constructions.hpp"
#include "rankscope/cp.hpp"
#include "rankscope/parallel.hpp"

namespace rankscope {

enum class DetectorStatus { HigherRank, NotInU, DomainError };

inline std::string_view to_string(DetectorStatus s) {
  switch (s) {
    case DetectorStatus::HigherRank: return "HigherRank";
    case DetectorStatus::NotInU: return "NotInU";
    case DetectorStatus::DomainError: return "DomainError";
  }
  return "Unknown";
}

struct DetectorTranscript {
  double canonical_residual = 0.0;
  double cond_p = 0.0;
  double cond_q = 0.0;
  double cond_v = 0.0;
  AfrStatus afr = AfrStatus::Inconclusive;
  double margin = 0.0;
  /// Which randomized canonicalization produced the verdict.
  std::size_t pass = 0;
  std::string note;
};

struct DetectorVerdict {
  DetectorStatus status = DetectorStatus::DomainError;
  /// The stacked tensor was certified AFR, not merely unfalsified.
  bool certified = false;
  std::optional<RealTensor> stacked;
  DetectorTranscript transcript;
};

struct DetectorOptions {
  CanonOptions canon;
  /// The stacked tensor is computed through two transforms, so a
  /// combination within 1e-6 of singular is treated as a witness.
  AfrOptions afr{.falsify = {.tol = 1e-6}};
  /// V with a larger condition number counts as singular.
  double max_condition_v = 1e12;
  std::size_t passes = 1;
  std::uint64_t seed = 0;
  /// Check AFR on an isotropically rescaled equivalent of the stacked tensor.
  bool balance = true;
};

struct DetectorShape {
  std::size_t n, p, m, l, v;
};

/// n x p x m with m >= 3 and (m-2)n < p <= (m-1)n.
inline DetectorShape detector_shape(std::size_t n, std::size_t p, std::size_t m) {
  if (n == 0 || m < 3 || p <= (m - 2) * n || p > (m - 1) * n)
    fail(ErrorCode::BadShape, "detector needs m >= 3 and (m-2)n < p <= (m-1)n, got n=" + std::to_string(n) +
                                  " p=" + std::to_string(p) + " m=" + std::to_string(m));
  const std::size_t l = (m - 1) * n - p;
  return {n, p, m, l, n - l};
}

namespace detail {

/// One pass of the detector with a fixed equivalence (P0, Q0) applied
/// before canonicalization.
inline DetectorVerdict detect_once(const RealTensor& t, const DetectorShape& sh, const EMat& p0, const EMat& q0,
                                   const DetectorOptions& opt) {
  const std::size_t n = sh.n, p = sh.p, m = sh.m, l = sh.l;
  const auto nn = static_cast<Eigen::Index>(n), pp = static_cast<Eigen::Index>(p), ll = static_cast<Eigen::Index>(l);
  DetectorVerdict out;

  std::vector<EMat> x;
  for (std::size_t k = 0; k < m; ++k) x.push_back(p0 * to_eigen(t.slice(k)) * q0);
  std::vector<EMat> front(x.begin(), x.end() - 1);
  CanonResult canon;
  try {
    canon = multi_canonicalize(from_eigen_slices(front), opt.canon);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::DomainError) throw;
    out.transcript.note = e.what();
    return out;
  }
  out.transcript.canonical_residual = canon.residual;
  out.transcript.cond_p = canon.cond_p;
  out.transcript.cond_q = canon.cond_q;

  const EMat pm = to_eigen(canon.pmat), qm = to_eigen(canon.qmat);
  const EMat z1 = pm * x.front() * qm;
  const EMat zm = pm * x.back() * qm;
  EMat w = EMat::Zero(pp, pp);
  w.topRows(nn) = z1;
  w.bottomRightCorner(pp - nn, pp - nn).setIdentity();
  const double cv = condition_number(w);
  out.transcript.cond_v = cv;
  if (!std::isfinite(cv) || cv > opt.max_condition_v) {
    out.transcript.note = "V is singular";
    return out;
  }
  const EMat zv = zm * w.inverse();

  // Column widths (n-l, l, n-l, n, ..., n).
  const Eigen::Index v = nn - ll;
  auto b = [&](const EMat& z, std::size_t part) -> EMat {
    switch (part) {
      case 1: return z.leftCols(v);
      case 0: return z.middleCols(v, ll);
      case 2: return z.middleCols(v + ll, v);
      default: return z.middleCols(2 * nn - ll + static_cast<Eigen::Index>(part - 3) * nn, nn);
    }
  };
  std::vector<EMat> slices;
  EMat s1 = EMat::Zero(2 * nn, nn), s2 = EMat::Zero(2 * nn, nn);
  s1.topLeftCorner(nn, v) = b(zm, 1);
  s1.bottomLeftCorner(nn, v) = b(zv, 1);
  s1.bottomRightCorner(nn, ll) = b(zv, 0);
  s2.topLeftCorner(nn, ll) = b(zm, 0);
  s2.topRightCorner(nn, v) = b(zm, 2);
  s2.bottomRightCorner(nn, v) = b(zv, 2);
  slices.push_back(s1);
  slices.push_back(s2);
  for (std::size_t k = 3; k < m; ++k) {
    EMat s(2 * nn, nn);
    s << b(zm, k), b(zv, k);
    slices.push_back(s);
  }
  EMat last(2 * nn, nn);
  last << EMat::Identity(nn, nn), EMat::Identity(nn, nn);
  slices.push_back(last);
  RealTensor stacked = from_eigen_slices(slices);

  const AfrVerdict av = afr_check(opt.balance ? balance(stacked) : stacked, opt.afr);
  out.transcript.afr = av.status;
  out.transcript.margin = av.margin;
  out.status = av.falsified() ? DetectorStatus::NotInU : DetectorStatus::HigherRank;
  out.certified = av.certified();
  out.stacked = std::move(stacked);
  return out;
}

}  // namespace detail

/// Tests membership in the open set U on which every tensor has real rank
/// > p: bring slices 1..m-1 to the staircase form, build the 2n x n x m
/// tensor from Z_m and Z_m V, and look for a rank-deficient combination.
///
/// The staircase form is not unique, and every choice defines such a set.
/// Pass 0 canonicalizes t itself; each further pass canonicalizes a seeded
/// random equivalent P0 t Q0. The first unfalsified pass wins.
inline DetectorVerdict detector(const RealTensor& t, const DetectorOptions& opt = {}) {
  const DetectorShape sh = detector_shape(t.m(), t.n(), t.p());
  const auto nn = static_cast<Eigen::Index>(sh.n), pp = static_cast<Eigen::Index>(sh.p);
  Rng rng(opt.seed);
  DetectorVerdict first;
  for (std::size_t pass = 0; pass < std::max<std::size_t>(opt.passes, 1); ++pass) {
    EMat p0 = EMat::Identity(nn, nn), q0 = EMat::Identity(pp, pp);
    if (pass > 0) {
      p0 = gaussian_matrix(rng, nn, nn);
      q0 = gaussian_matrix(rng, pp, pp);
    }
    DetectorVerdict v = detail::detect_once(t, sh, p0, q0, opt);
    v.transcript.pass = pass;
    if (v.status == DetectorStatus::HigherRank) return v;
    if (pass == 0 || first.status == DetectorStatus::DomainError) first = std::move(v);
  }
  return first;
}

/// The tensor Y = (Y_1; ...; Y_m) of shape n x p x m: Y_1..Y_{m-1} the
/// staircase pattern and Y_m = (A, A_3, ..., A_{m-1}) after scaling the
/// sequence so that A_m = E_n. Its stacked tensor is the sequence's.
inline RealTensor assemble_witness(const CondSeq& seq) {
  const CondSeq s = with_identity_last(seq);
  const std::size_t n = s.n, m = s.m, p = (m - 1) * n - s.l;
  std::vector<RealMat> slices = staircase_pattern(n, p, m - 1).slices();
  std::vector<RealMat> parts{s.a};
  for (std::size_t k = 0; k + 1 < s.extras.size(); ++k) parts.push_back(s.extras[k]);
  slices.push_back(hstack(std::span<const RealMat>(parts)));
  return RealTensor(std::move(slices));
}

/// Real rank of an n x n x 2 tensor (A_1; A_2) with A_1 invertible, from the
/// Jordan structure of F = A_1^{-1} A_2: n plus the largest count, over one
/// eigenvalue, of Jordan blocks of size >= 2 (real eigenvalue) or of all
/// blocks (non-real eigenvalue). nullopt when A_1 is near singular or the
/// numerical Jordan structure is ambiguous.
inline std::optional<std::size_t> rank_nn2(const RealTensor& t) {
  if (t.p() != 2 || t.m() != t.n()) fail(ErrorCode::BadShape, "rank_nn2 needs an n x n x 2 tensor");
  using CMat = Eigen::MatrixXcd;
  using C = std::complex<double>;
  const EMat a1 = to_eigen(t.slice(0)), a2 = to_eigen(t.slice(1));
  const double c1 = condition_number(a1);
  if (!std::isfinite(c1) || c1 > 1e12) return std::nullopt;
  const EMat f = a1.partialPivLu().solve(a2);
  const auto n = f.rows();
  const double scale = std::max(f.norm(), 1e-300);

  Eigen::EigenSolver<EMat> es(f, false);
  const Eigen::VectorXcd ev = es.eigenvalues();

  // Single-linkage clusters; a defective eigenvalue splits by about
  // eps^(1/k) so the merge radius is generous.
  const double merge = 1e-4 * scale, gap = 1e-2 * scale;
  std::vector<int> label(static_cast<std::size_t>(n), -1);
  int clusters = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (label[i] >= 0) continue;
    std::vector<Eigen::Index> stack{i};
    label[i] = clusters;
    while (!stack.empty()) {
      const auto a = stack.back();
      stack.pop_back();
      for (Eigen::Index j = 0; j < n; ++j)
        if (label[j] < 0 && std::abs(ev(a) - ev(j)) < merge) {
          label[j] = clusters;
          stack.push_back(j);
        }
    }
    ++clusters;
  }
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (label[i] != label[j] && std::abs(ev(i) - ev(j)) < gap) return std::nullopt;

  // Numerical rank with a dead zone; values inside it are ambiguous.
  auto crank = [&](const CMat& m) -> std::optional<Eigen::Index> {
    Eigen::JacobiSVD<CMat> svd(m);
    const auto& sv = svd.singularValues();
    Eigen::Index r = 0;
    for (Eigen::Index k = 0; k < sv.size(); ++k) {
      if (sv(k) > 1e-4 * scale) ++r;
      else if (sv(k) > 1e-7 * scale) return std::nullopt;
    }
    return r;
  };

  std::size_t delta = 0;
  for (int c = 0; c < clusters; ++c) {
    C centre = 0.0;
    int mult = 0;
    for (Eigen::Index i = 0; i < n; ++i)
      if (label[i] == c) {
        centre += ev(i);
        ++mult;
      }
    centre /= static_cast<double>(mult);
    const bool real = std::abs(centre.imag()) <= 1e-8 * scale;
    if (real) centre = centre.real();
    const CMat g = f.cast<C>() - centre * CMat::Identity(n, n);
    const auto r1 = crank(g);
    if (!r1) return std::nullopt;
    if (real) {
      const auto r2 = crank(g * g);
      if (!r2) return std::nullopt;
      delta = std::max(delta, static_cast<std::size_t>(*r1 - *r2));
    } else {
      delta = std::max(delta, static_cast<std::size_t>(n - *r1));
    }
  }
  return static_cast<std::size_t>(n) + delta;
}

struct McOptions {
  std::size_t samples = 1000;
  std::uint64_t seed = 0;
  bool crosscheck = false;
  std::size_t workers = 1;
  DetectorOptions detector;
  /// Restarts are kept low: a miss costs every restart on each NotInU sample.
  CpOptions cp{.restarts = 4};
};

struct McSummary {
  std::size_t m = 0, n = 0, p = 0;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  bool crosscheck = false;
  std::map<std::string, std::size_t> counts;
  /// HigherRank samples whose stacked tensor was certified.
  std::size_t certified_higher = 0;
  /// NotInU samples with a rank-p fit.
  std::size_t fit_p = 0;
  double fraction_higher = 0.0;
  double fraction_fit_p = 0.0;
  double runtime = 0.0;
};

/// Detector defaults tuned for bulk sampling: fewer falsification restarts and
/// a smaller grid budget. Unfalsified but uncertified stacks still count as
/// HigherRank, flagged by certified = false.
inline DetectorOptions mc_detector_defaults() {
  DetectorOptions o;
  o.afr.falsify.restarts = 16;
  o.afr.grid.max_evals = 200'000;
  return o;
}

/// Samples i.i.d. Gaussian n x p x m tensors (sample i seeded from
/// (seed, i)), runs the detector and, if asked, fits rank p to the NotInU
/// ones. Results are gathered by index, so the summary does not depend on
/// the worker count.
inline McSummary mc_experiment(std::size_t m, std::size_t n, std::size_t p, const McOptions& opt) {
  detector_shape(n, p, m);
  const auto start = std::chrono::steady_clock::now();
  std::vector<DetectorStatus> status(opt.samples);
  std::vector<char> certified(opt.samples, 0), fit(opt.samples, 0);
  parallel_for(opt.samples, opt.workers, [&](std::size_t i) {
    Rng rng(derive_seed(opt.seed, i));
    const RealTensor t = gaussian_tensor(rng, n, p, m);
    DetectorOptions d = opt.detector;
    d.afr.falsify.workers = 1;
    d.afr.falsify.seed = derive_seed(opt.seed ^ 0xA5A5A5A5ULL, i);
    d.canon.seed = derive_seed(opt.seed ^ 0x5A5A5A5AULL, i);
    d.seed = derive_seed(opt.seed ^ 0x3C3C3C3CULL, i);
    const DetectorVerdict v = detector(t, d);
    status[i] = v.status;
    certified[i] = v.certified;
    if (opt.crosscheck && v.status == DetectorStatus::NotInU) {
      CpOptions c = opt.cp;
      c.seed = derive_seed(opt.seed ^ 0xC3C3C3C3ULL, i);
      fit[i] = rank_leq_oracle(t, p, c).found;
    }
  });

  McSummary s;
  s.m = m;
  s.n = n;
  s.p = p;
  s.samples = opt.samples;
  s.seed = opt.seed;
  s.crosscheck = opt.crosscheck;
  for (auto st : {DetectorStatus::HigherRank, DetectorStatus::NotInU, DetectorStatus::DomainError})
    s.counts[std::string(to_string(st))] = 0;
  for (std::size_t i = 0; i < opt.samples; ++i) {
    ++s.counts[std::string(to_string(status[i]))];
    if (status[i] == DetectorStatus::HigherRank && certified[i]) ++s.certified_higher;
    if (fit[i]) ++s.fit_p;
  }
  if (opt.samples > 0) {
    const double total = static_cast<double>(opt.samples);
    s.fraction_higher = static_cast<double>(s.counts["HigherRank"]) / total;
    s.fraction_fit_p = static_cast<double>(s.fit_p) / total;
  }
  s.runtime = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return s;
}

}  // namespace rankscope
