#include <gtest/gtest.h>

#include "rankscope/canonical.hpp"

using namespace rankscope;

namespace {

RealTensor gaussian(std::uint64_t seed, std::size_t s, std::size_t t, std::size_t u) {
  Rng rng(seed);
  return gaussian_tensor(rng, s, t, u);
}

double identity_deviation(const RealMat& m) { return max_abs(m - RealMat::identity(m.rows())); }

// Recomputes the sandwich independently of the library's own bookkeeping.
double recomputed_residual(const RealTensor& input, const CanonResult& r) {
  const EMat p = to_eigen(r.pmat), q = to_eigen(r.qmat);
  std::vector<EMat> z;
  for (const auto& a : input.slices()) z.push_back(p * to_eigen(a) * q);
  return staircase_residual(from_eigen_slices(z));
}

}  // namespace

TEST(StaircasePattern, Shapes) {
  const RealTensor x = staircase_pattern(3, 7, 3);
  // v = 1: X_2 = (O_1, E_3, O_3), X_3 = (O_4, E_3)
  EXPECT_EQ(x.slice(1)(0, 1), 1.0);
  EXPECT_EQ(x.slice(2)(2, 6), 1.0);
  EXPECT_EQ(staircase_residual(x), 0.0);
  EXPECT_THROW(staircase_pattern(3, 6, 3), Error);
  EXPECT_THROW(staircase_pattern(3, 5, 3), Error);
}

TEST(LastSliceNormalize, FixedPoint) {
  const RealTensor x = staircase_pattern(2, 5, 2);
  const auto r = last_slice_normalize(x);
  EXPECT_EQ(identity_deviation(r.qmat), 0.0);
  EXPECT_EQ(identity_deviation(r.pmat), 0.0);
}

TEST(LastSliceNormalize, Gaussian) {
  const RealTensor t = gaussian(1, 2, 4, 3);
  const auto r = last_slice_normalize(t);
  RealMat want(2, 4);
  want(0, 2) = want(1, 3) = 1.0;
  EXPECT_LE(max_abs(r.canonical.slice(2) - want), 1e-10);
}

TEST(LastSliceNormalize, RankDeficient) {
  const RealTensor t({RealMat(2, 4), RealMat(2, 4)});
  try {
    last_slice_normalize(t);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DomainError);
  }
}

TEST(PencilCanonicalize, FixedPoint) {
  const auto r = pencil_canonicalize(staircase_pattern(2, 3, 2));
  EXPECT_LE(identity_deviation(r.pmat), 1e-12);
  EXPECT_LE(identity_deviation(r.qmat), 1e-12);
  EXPECT_LE(r.residual, 1e-12);
}

TEST(PencilCanonicalize, GaussianSamples) {
  for (auto [s, t] : {std::pair{2, 3}, {3, 5}, {3, 7}, {1, 3}, {4, 8}}) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const RealTensor in = gaussian(100 + seed, s, t, 2);
      const auto r = pencil_canonicalize(in);
      EXPECT_LE(r.residual, 1e-8);
      EXPECT_NEAR(recomputed_residual(in, r), r.residual, 1e-12);
    }
  }
}

TEST(PencilCanonicalize, ZeroPencil) {
  try {
    pencil_canonicalize(RealTensor({RealMat(2, 3), RealMat(2, 3)}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DomainError);
  }
}

TEST(PencilCanonicalize, RejectsWrongShapes) {
  EXPECT_THROW(pencil_canonicalize(gaussian(1, 3, 3, 2)), Error);
  EXPECT_THROW(pencil_canonicalize(gaussian(1, 2, 3, 3)), Error);
}

TEST(MultiCanonicalize, FixedPoints) {
  for (auto [s, t, u] : {std::tuple{3, 5, 2}, {2, 5, 3}, {2, 7, 3}, {3, 8, 3}, {4, 9, 3}, {2, 7, 4}}) {
    const auto r = multi_canonicalize(staircase_pattern(s, t, u));
    EXPECT_LE(identity_deviation(r.pmat), 1e-12);
    EXPECT_LE(identity_deviation(r.qmat), 1e-12);
    EXPECT_LE(r.residual, 1e-12);
  }
}

TEST(MultiCanonicalize, GaussianPatterns) {
  for (auto [s, t, u] : {std::tuple{3, 5, 2}, {2, 5, 3}, {2, 7, 4}, {4, 9, 3}, {3, 8, 3}, {2, 9, 3}, {3, 10, 4}}) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const RealTensor in = gaussian(500 + seed, s, t, u);
      const auto r = multi_canonicalize(in);
      EXPECT_LE(r.residual, 1e-8);
      EXPECT_NEAR(recomputed_residual(in, r), r.residual, 1e-12);
      const EMat pp = to_eigen(r.pmat) * to_eigen(r.pmat).inverse();
      EXPECT_LE((pp - EMat::Identity(s, s)).cwiseAbs().maxCoeff(), 1e-10);
      EXPECT_TRUE(std::isfinite(r.cond_p));
      EXPECT_TRUE(std::isfinite(r.cond_q));
    }
  }
}

TEST(MultiCanonicalize, ThreeByEightByThreeStructure) {
  // s = 3, t = 8, u = 3: v = 2, M is 3 x 3 with its top two rows zero.
  const auto r = multi_canonicalize(gaussian(77, 3, 8, 3));
  const RealTensor x = staircase_pattern(3, 8, 3);
  EXPECT_LE(max_abs(r.canonical.slice(1) - x.slice(1)), 1e-8);
  EXPECT_LE(max_abs(r.canonical.slice(2) - x.slice(2)), 1e-8);
  const RealMat& z1 = r.canonical.slice(0);
  for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(z1(j, j), 1.0, 1e-8);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 3; j < 8; ++j) EXPECT_LE(std::fabs(z1(i, j)), 1e-8);
  for (std::size_t j = 3; j < 5; ++j) EXPECT_LE(std::fabs(z1(2, j)), 1e-8);
}

TEST(MultiCanonicalize, RejectsInadmissibleShapes) {
  // (u-1)s >= t
  EXPECT_THROW(multi_canonicalize(gaussian(1, 3, 5, 3)), Error);
  EXPECT_THROW(multi_canonicalize(gaussian(1, 2, 6, 4)), Error);
}

TEST(MultiCanonicalize, WideCaseHasZeroM) {
  // t >= us: v = 3 >= s = 2, so M vanishes.
  const auto r = multi_canonicalize(gaussian(8, 2, 5, 2));
  EXPECT_LE(r.residual, 1e-8);
  const auto r3 = multi_canonicalize(gaussian(9, 2, 7, 3));
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 2; j < 7; ++j) EXPECT_LE(std::fabs(r3.canonical.slice(0)(i, j)), 1e-8);
}

TEST(MultiCanonicalize, PreservesFlattenRanks) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const RealTensor in = gaussian(900 + seed, 3, 8, 3);
    const auto r = multi_canonicalize(in);
    EXPECT_EQ(flatten_ranks(r.canonical), flatten_ranks(in));
  }
}

TEST(MultiCanonicalize, ZeroFirstSliceStillFails) {
  RealTensor in = gaussian(3, 3, 7, 3);
  std::vector<RealMat> s = in.slices();
  s[0] = RealMat(3, 7);
  try {
    multi_canonicalize(RealTensor(s));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DomainError);
  }
}
